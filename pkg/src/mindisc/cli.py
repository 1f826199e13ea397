"""Command-line interface.

Subcommands: curve, instrument, scheme, verify, montecarlo. Output is CSV
(header row, LF, 12 significant digits) or a JSON array of flat objects.
Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

import argparse
import csv
import io
import json
import math
import re
import sys

from . import analytic, montecarlo, oracle, schemes
from .instrument import (disturbance, optimal_instrument, povm_of,
                         success_probability)

_PI_FRACTION = re.compile(
    r"^\s*(?P<num>[+-]?(\d+(\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(/\s*(?P<den>\d+(\.\d*)?))?\s*$",
    re.IGNORECASE)


class UsageError(Exception):
    pass


def parse_angle(text):
    """Radians from ``0.39``, ``pi``, ``pi/8``, ``3pi/16`` or ``3*pi/16``."""
    m = _PI_FRACTION.match(text)
    if m:
        num = m.group("num")
        if num in (None, "", "+"):
            k = 1.0
        elif num == "-":
            k = -1.0
        else:
            k = float(num)
        den = float(m.group("den")) if m.group("den") else 1.0
        if den == 0:
            raise argparse.ArgumentTypeError(f"zero denominator in angle {text!r}")
        return k * math.pi / den
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle must be finite, got {text!r}")
    return value


def _finite_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"number must be finite, got {text!r}")
    return value


def fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        text = f"{value:.12g}"
        return "0" if text == "-0" else text
    return str(value)


def _json_value(value):
    if isinstance(value, bool) or isinstance(value, int) or isinstance(value, str):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(fmt(value))
    return str(value)


def render(records, fmt_name):
    if fmt_name == "json":
        data = [{k: _json_value(v) for k, v in rec.items()} for rec in records]
        return json.dumps(data, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(records[0].keys()))
    for rec in records:
        writer.writerow([fmt(v) for v in rec.values()])
    return buf.getvalue()


def _pair(alpha):
    try:
        return analytic.StatePair(alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _require(cond, message):
    if not cond:
        raise UsageError(message)


def cmd_curve(args):
    pair = _pair(args.alpha)
    _require(args.points >= 2, f"--points must be >= 2, got {args.points}")
    return [{"t": p.t, "gamma": p.gamma, "beta_t": p.beta_t, "P": p.P, "D": p.D}
            for p in analytic.tradeoff_curve(pair, args.points)], 0


def _matrix_fields(prefix, m):
    out = {}
    for r in range(2):
        for c in range(2):
            out[f"{prefix}_{r + 1}{c + 1}_re"] = float(m[r, c].real)
            out[f"{prefix}_{r + 1}{c + 1}_im"] = float(m[r, c].imag)
    return out


def cmd_instrument(args):
    pair = _pair(args.alpha)
    _require(args.t is not None, "--t is required")
    _require(0.0 <= args.t <= 1.0, f"--t must lie in [0, 1], got {args.t}")
    instr = optimal_instrument(pair, args.t)
    P, D = success_probability(instr, pair), disturbance(instr, pair)
    P_ref, D_ref = analytic.probability_of_t(pair, args.t), analytic.disturbance_of_t(pair, args.t)
    rec = {"alpha": pair.alpha, "t": args.t, "gamma": analytic.gamma_of_t(args.t),
           "beta_t": analytic.tilt_of_t(pair, args.t), "P": P, "D": D,
           "P_closed_form": P_ref, "D_closed_form": D_ref,
           "P_residual": abs(P - P_ref), "D_residual": abs(D - D_ref)}
    for label in instr.labels:
        rec.update(_matrix_fields(f"kraus{label}", instr.kraus(label)[0]))
    for label, elem in zip(instr.labels, povm_of(instr)):
        rec.update(_matrix_fields(f"povm{label}", elem))
    return [rec], 0


def cmd_scheme(args):
    pair = _pair(args.alpha)
    if args.scheme == "kerr":
        _require(args.phi is not None, "kerr scheme needs --phi")
        _require(0.0 <= args.phi <= math.pi + 1e-15, f"--phi must lie in [0, pi], got {args.phi}")
        scheme = schemes.KerrScheme(args.phi, args.feedback)
        rep = schemes.kerr_report(scheme, pair)
        rec = {"scheme": "kerr", "alpha": pair.alpha, "phi": scheme.phi, "feedback": args.feedback}
    else:
        _require(args.t is not None, "parity scheme needs --t")
        _require(0.0 <= args.t <= 1.0, f"--t must lie in [0, 1], got {args.t}")
        rep = schemes.parity_report(schemes.ParityScheme(args.t), pair)
        rec = {"scheme": "parity", "alpha": pair.alpha, "t": args.t}
    rec.update({"t_effective": rep.t_effective, "P": rep.achieved_P, "D": rep.achieved_D,
                "postselect_rate": rep.postselect_rate, "D_optimal_at_P": rep.D_optimal_at_P,
                "gap": rep.gap})
    if args.scheme == "parity":
        rec.update({"theta": rep.theta, "choi_residual": rep.choi_residual})
    return [rec], 0


def cmd_verify(args):
    pair = _pair(args.alpha)
    _require(args.points >= 3, f"--points must be >= 3, got {args.points}")
    _require(args.budget >= 1, f"--budget must be >= 1, got {args.budget}")
    rows = oracle.verify_curve(pair, args.points, args.budget, args.seed)
    records, failed = [], []
    for row in rows:
        ok = oracle.curve_ok(row)
        status = "ok" if ok else (row.message or "gap out of range")
        records.append({"t": row.t, "target_P": row.target_P, "achieved_P": row.achieved_P,
                        "D_analytic": row.D_analytic, "D_oracle": row.D_oracle, "gap": row.gap,
                        "residual": row.residual, "converged": row.converged,
                        "evaluations": row.evaluations, "status": status})
        if not ok:
            failed.append(records[-1])
    for rec in failed:
        print(f"verify: FAILED at t={fmt(rec['t'])}: gap={fmt(rec['gap'])} "
              f"converged={fmt(rec['converged'])} ({rec['status']})", file=sys.stderr)
    return records, (1 if failed else 0)


def _z(estimate, reference, se):
    if not math.isfinite(se):
        return float("nan")
    if se == 0.0:
        return 0.0 if estimate == reference else math.copysign(math.inf, estimate - reference)
    return (estimate - reference) / se


def cmd_montecarlo(args):
    _pair(args.alpha)
    _require(args.shots >= 1, f"--shots must be >= 1, got {args.shots}")
    _require(0 <= args.seed < 2 ** 64, "--seed must be a 64-bit unsigned integer")
    if args.scheme == "kerr":
        _require(args.phi is not None, "kerr scheme needs --phi")
        param = args.phi
    else:
        _require(args.t is not None, f"{args.scheme} scheme needs --t")
        param = args.t
    try:
        config = montecarlo.SimConfig(args.shots, args.seed, args.alpha, param, args.scheme)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    est = montecarlo.run(config)
    P_ref, D_ref, rate_ref = montecarlo.reference_values(config)
    rec = {"scheme": args.scheme, "alpha": args.alpha,
           ("phi" if args.scheme == "kerr" else "t"): param,
           "shots": args.shots, "seed": args.seed,
           "P_hat": est.P_hat, "P_se": est.P_se, "D_hat": est.D_hat, "D_se": est.D_se,
           "discarded": est.discarded, "shots_used": est.shots_used,
           "P_ref": P_ref, "D_ref": D_ref,
           "z_P": _z(est.P_hat, P_ref, est.P_se), "z_D": _z(est.D_hat, D_ref, est.D_se)}
    if args.scheme == "parity":
        rate_hat = est.shots_used / args.shots
        rate_se = math.sqrt(rate_ref * (1 - rate_ref) / args.shots)
        rec.update({"rate_hat": rate_hat, "rate_ref": rate_ref,
                    "z_rate": _z(rate_hat, rate_ref, rate_se)})
    return [rec], 0


def build_parser():
    parser = argparse.ArgumentParser(prog="mindisc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--alpha", type=parse_angle, required=True,
                       help="state half-angle in radians, e.g. 0.39 or pi/8")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default="-", help="output path (default: stdout)")

    p = sub.add_parser("curve", help="closed-form tradeoff curve")
    common(p)
    p.add_argument("--points", type=int, default=11)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("instrument", help="optimal instrument at a given t")
    common(p)
    p.add_argument("--t", type=_finite_float, required=True)
    p.set_defaults(func=cmd_instrument)

    p = sub.add_parser("scheme", help="score a measurement scheme against the optimal curve")
    p.add_argument("scheme", choices=("kerr", "parity"))
    common(p)
    p.add_argument("--phi", type=parse_angle)
    p.add_argument("--t", type=_finite_float)
    p.add_argument("--feedback", choices=schemes.FEEDBACK_MODES, default="tilt")
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("verify", help="numerical oracle against the closed-form curve")
    common(p)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("montecarlo", help="shot-by-shot sampling estimates")
    p.add_argument("scheme", choices=montecarlo.SCHEMES)
    common(p)
    p.add_argument("--t", type=_finite_float)
    p.add_argument("--phi", type=parse_angle)
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_montecarlo)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        records, code = args.func(args)
    except UsageError as exc:
        print(f"mindisc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = render(records, args.format)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return code
