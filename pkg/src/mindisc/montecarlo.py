"""Shot-by-shot sampling estimates of success probability and disturbance.

Each shot draws a hypothesis i with probability 1/2, samples a measurement
outcome from the Born probabilities of the configured instrument, scores
``outcome == i`` and records the infidelity of the exact posterior branch
with ``psi_i``. The parity scheme first samples the parity check and discards
``n`` events.

Seeding: a config at position ``k`` of a sweep draws from
``SeedSequence([seed, k])``; :func:`run` is position 0. Shots are processed in
chunks of ``CHUNK`` whose generators are ``spawn``-ed children of that
sequence, so results depend only on (seed, position, shots).
"""

from dataclasses import dataclass
import math

import numpy as np

from . import analytic, schemes
from .instrument import disturbance, optimal_instrument
from .qmath import projector

SCHEMES = ("optimal", "kerr", "parity")
CHUNK = 1 << 17


@dataclass(frozen=True)
class SimConfig:
    shots: int
    seed: int
    alpha: float
    t_or_phi: float
    scheme: str = "optimal"

    def __post_init__(self):
        if int(self.shots) < 1:
            raise ValueError("shots must be >= 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        seed = int(self.seed)
        if not 0 <= seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        analytic.StatePair(self.alpha)
        bound = math.pi if self.scheme == "kerr" else 1.0
        if not 0.0 <= float(self.t_or_phi) <= bound + 1e-15:
            name = "phi" if self.scheme == "kerr" else "t"
            raise ValueError(f"{name} must lie in [0, {bound:g}], got {self.t_or_phi}")


@dataclass(frozen=True)
class SimEstimate:
    P_hat: float
    P_se: float
    D_hat: float
    D_se: float
    discarded: int
    shots_used: int


def _branch_tables(config):
    """Outcome probabilities, branch infidelities and parity acceptance per hypothesis.

    Returns ``(probs, infid, accept)`` with ``probs[i, o]`` the probability of
    outcome ``o + 1`` given ``psi_{i+1}`` (conditioned on acceptance for the
    parity scheme), ``infid[i, o]`` the infidelity ``1 - <psi|rho_post|psi>`` of
    that branch, and ``accept[i]`` the probability a shot is kept.
    """
    pair = analytic.StatePair(config.alpha)
    accept = np.ones(2)
    if config.scheme == "optimal":
        instr = optimal_instrument(pair, config.t_or_phi)
    elif config.scheme == "kerr":
        instr = schemes.kerr_effective_instrument(schemes.KerrScheme(config.t_or_phi), pair)
    else:
        instr, _ = schemes.parity_effective_instrument(schemes.ParityScheme(config.t_or_phi), pair)
        accept = np.array([schemes.parity_postselect_rate(projector(pair.state(i))) for i in (1, 2)])

    probs = np.zeros((2, 2))
    infid = np.zeros((2, 2))
    for i in (1, 2):
        psi = pair.state(i)
        perp = np.array([-np.conj(psi[1]), np.conj(psi[0])])
        # <perp|E|psi> summed entrywise so undisturbed branches cancel exactly
        overlap = np.outer(perp.conj(), psi)
        for o in (1, 2):
            ops = instr.kraus(o)
            p = sum(float(np.linalg.norm(k @ psi) ** 2) for k in ops)
            probs[i - 1, o - 1] = p
            if p > 1e-14:
                infid[i - 1, o - 1] = sum(abs(np.sum(k * overlap)) ** 2 for k in ops) / p
    probs /= probs.sum(axis=1, keepdims=True)
    return probs, infid, accept


def _merge(a, b):
    """Chan et al. pairwise merge of (n, mean, M2) accumulators."""
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    if n == 0:
        return a
    delta = mb - ma
    return n, ma + delta * nb / n, sa + sb + delta * delta * na * nb / n


def _moments(x):
    n = x.size
    if n == 0:
        return 0, 0.0, 0.0
    m = float(x.mean())
    return n, m, float(((x - m) ** 2).sum())


def _chunk(rng, n, probs, infid, accept):
    hyp = rng.integers(0, 2, size=n)
    kept = rng.random(n) < accept[hyp]
    hyp = hyp[kept]
    outcome = (rng.random(hyp.size) >= probs[hyp, 0]).astype(int)
    correct = (outcome == hyp).astype(float)
    d = infid[hyp, outcome]
    return n - hyp.size, _moments(correct), _moments(d)


def run(config, index=0):
    """Monte Carlo estimate for one configuration (stream position ``index``)."""
    probs, infid, accept = _branch_tables(config)
    seq = np.random.SeedSequence([int(config.seed), int(index)])
    shots = int(config.shots)
    sizes = [CHUNK] * (shots // CHUNK) + ([shots % CHUNK] if shots % CHUNK else [])
    discarded = 0
    acc_p = acc_d = (0, 0.0, 0.0)
    for child, n in zip(seq.spawn(len(sizes)), sizes):
        dropped, mp, md = _chunk(np.random.default_rng(child), n, probs, infid, accept)
        discarded += dropped
        acc_p, acc_d = _merge(acc_p, mp), _merge(acc_d, md)

    used = acc_p[0]
    if used == 0:
        nan = float("nan")
        return SimEstimate(nan, nan, nan, nan, discarded, 0)

    def se(acc):
        n, _, m2 = acc
        return math.sqrt(m2 / (n - 1) / n) if n > 1 else float("nan")

    return SimEstimate(P_hat=acc_p[1], P_se=se(acc_p), D_hat=acc_d[1], D_se=se(acc_d),
                       discarded=discarded, shots_used=used)


def sweep(configs):
    """Run configs in order; position k uses stream ``SeedSequence([seed_k, k])``."""
    configs = list(configs)
    if not configs:
        raise ValueError("sweep needs at least one config")
    return [run(c, k) for k, c in enumerate(configs)]


def reference_values(config):
    """Exact (P, D, acceptance rate) the estimates should converge to.

    Closed-form values for the optimal and parity schemes; for the Kerr scheme
    P comes from t = sin^2(phi/2) and D from the effective instrument.
    """
    pair = analytic.StatePair(config.alpha)
    if config.scheme == "kerr":
        t = schemes.KerrScheme(config.t_or_phi).t_effective
        instr = schemes.kerr_effective_instrument(schemes.KerrScheme(config.t_or_phi), pair)
        return analytic.probability_of_t(pair, t), disturbance(instr, pair), 1.0
    t = config.t_or_phi
    rate = 0.5 if config.scheme == "parity" else 1.0
    return analytic.probability_of_t(pair, t), analytic.disturbance_of_t(pair, t), rate
