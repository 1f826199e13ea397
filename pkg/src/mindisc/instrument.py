"""Quantum instruments on a qubit: construction, application and scoring.

An :class:`Instrument` is an ordered list of outcomes, each carrying its Kraus
operators. Outcome ``i`` is read as "declare psi_i". Channels are compared
through their Choi matrices, which are blind to the phase and unitary-mixing
freedom in the choice of Kraus operators.
"""

from dataclasses import dataclass

import numpy as np

from . import analytic
from .qmath import (ATOL_ALGEBRA, ATOL_POSITIVE, I2, SZ, as_operator,
                    check_density, is_density, projector, rotation)


@dataclass(frozen=True)
class Instrument:
    """Outcome-labelled Kraus lists, complete up to 1e-12.

    ``outcomes`` is a tuple of ``(label, (K_1, K_2, ...))`` pairs.
    """

    outcomes: tuple

    def __post_init__(self):
        normalized = []
        labels = set()
        for label, ops in self.outcomes:
            label = int(label)
            if label in labels:
                raise ValueError(f"duplicate outcome label {label}")
            labels.add(label)
            ops = tuple(as_operator(k) for k in ops)
            if not ops:
                raise ValueError(f"outcome {label} has no Kraus operators")
            if any(k.shape != (2, 2) for k in ops):
                raise ValueError("instrument Kraus operators must be 2x2")
            normalized.append((label, ops))
        if not normalized:
            raise ValueError("instrument needs at least one outcome")
        object.__setattr__(self, "outcomes", tuple(normalized))
        total = sum(_effect(ops) for _, ops in self.outcomes)
        residual = np.abs(total - I2).max()
        if residual > ATOL_ALGEBRA:
            raise ValueError(f"completeness violated: max |sum E^dag E - I| = {residual:.3e}")

    @property
    def labels(self):
        return tuple(label for label, _ in self.outcomes)

    def kraus(self, label):
        for lab, ops in self.outcomes:
            if lab == label:
                return ops
        raise KeyError(f"unknown outcome label {label}")

    @classmethod
    def pure(cls, *kraus, labels=None):
        """Instrument with one Kraus operator per outcome, labelled 1, 2, ... by default."""
        labels = labels or range(1, len(kraus) + 1)
        return cls(tuple((lab, (k,)) for lab, k in zip(labels, kraus)))


def _effect(ops):
    return sum(k.conj().T @ k for k in ops)


def _apply(ops, rho):
    return sum(k @ rho @ k.conj().T for k in ops)


def identity_instrument():
    return Instrument.pure(I2)


def helstrom_instrument(pair):
    """Measure in {|1>, |2>} and prepare the tilted state U_i|i>."""
    u = rotation(analytic.helstrom_tilt(pair))
    e1 = u @ np.diag([1.0, 0.0])
    e2 = u.conj().T @ np.diag([0.0, 1.0])
    return Instrument.pure(e1, e2)


def optimal_kraus_pair(pair, t):
    """The pure Kraus pair achieving minimal disturbance at success probability P_t."""
    gamma = analytic.gamma_of_t(t)
    u = rotation(analytic.tilt_of_t(pair, t))
    t = float(t)
    # sqrt(1 - gamma) = t / sqrt(1 + gamma), stable for small t
    lo, hi = t / np.sqrt(1.0 + gamma) / 2.0, np.sqrt(1.0 + gamma) / 2.0
    e1 = u @ (lo * SZ + hi * I2)
    e2 = u.conj().T @ (-lo * SZ + hi * I2)
    return e1, e2


def optimal_instrument(pair, t):
    return Instrument.pure(*optimal_kraus_pair(pair, t))


def povm_of(instr):
    """POVM elements in outcome order."""
    elements = [_effect(ops) for _, ops in instr.outcomes]
    if np.abs(sum(elements) - I2).max() > ATOL_ALGEBRA:
        raise ValueError("POVM elements do not sum to identity")
    return elements


def apply_outcome(instr, outcome, rho):
    """Probability of ``outcome`` on ``rho`` and the normalized posterior state.

    The posterior is ``None`` when the probability is below 1e-14.
    """
    rho = check_density(rho)
    if rho.shape != (2, 2):
        raise ValueError("instrument acts on 2x2 density operators")
    unnorm = _apply(instr.kraus(outcome), rho)
    prob = float(np.real(np.trace(unnorm)))
    if prob < 1e-14:
        return max(prob, 0.0), None
    return prob, unnorm / prob


def apply_channel(instr, rho):
    """Outcome-averaged (trace-preserving) channel applied to ``rho``."""
    return sum(_apply(ops, rho) for _, ops in instr.outcomes)


def _choi(ops):
    # C = sum_ij |i><j| (x) E(|i><j|), input factor first
    c = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            eij = np.zeros((2, 2), dtype=complex)
            eij[i, j] = 1.0
            c[2 * i:2 * i + 2, 2 * j:2 * j + 2] = _apply(ops, eij)
    return c


def outcome_choi(instr, outcome):
    """Choi matrix of the single-outcome map E_i."""
    return _choi(instr.kraus(outcome))


def average_channel(instr):
    """Choi matrix (trace 2) of the outcome-summed channel."""
    choi = _choi([k for _, ops in instr.outcomes for k in ops])
    out_traced = np.einsum("iaja->ij", choi.reshape(2, 2, 2, 2))
    if np.abs(out_traced - I2).max() > ATOL_ALGEBRA:
        raise ValueError("channel is not trace preserving")
    return choi


def channel_distance(a, b):
    """Max-entry absolute difference between two Choi matrices."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"Choi dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).max())


def success_probability(instr, pair):
    """Average probability that outcome i is obtained on psi_i."""
    labels = set(instr.labels)
    if labels != {1, 2}:
        raise ValueError(f"discrimination needs outcomes labelled 1 and 2, got {sorted(labels)}")
    total = 0.0
    for i in (1, 2):
        rho = projector(pair.state(i))
        total += 0.5 * np.real(np.trace(_effect(instr.kraus(i)) @ rho))
    return float(total)


def disturbance(instr, pair):
    """One minus the average fidelity of the output of the averaged channel."""
    fid = 0.0
    for i in (1, 2):
        psi = pair.state(i)
        out = apply_channel(instr, projector(psi))
        fid += 0.5 * np.real(psi.conj() @ out @ psi)
    return float(1.0 - fid)


def is_valid_posterior(rho):
    return rho is not None and is_density(rho, ATOL_POSITIVE)
