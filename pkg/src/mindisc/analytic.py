"""Closed-form success probability, tilt and disturbance for the symmetric pair.

The ensemble is two real qubit states placed symmetrically around the
computational basis,

    psi_1 = cos(alpha)|1> + sin(alpha)|2>,   psi_2 = sin(alpha)|1> + cos(alpha)|2>,

with equal priors. ``t`` in [0, 1] interpolates between doing nothing (t=0)
and the minimum-error measurement (t=1).
"""

from dataclasses import dataclass
import math

import numpy as np

QUARTER_PI = math.pi / 4
SNAP_TO_HELSTROM = 1e-15


@dataclass(frozen=True)
class StatePair:
    """Two equiprobable pure states at half-angle ``alpha`` from the basis axes."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not math.isfinite(a):
            raise ValueError("alpha must be finite")
        # tolerate round-off from pi-fraction parsing at the endpoints
        if a < 0.0 and a > -1e-15:
            a = 0.0
        if a > QUARTER_PI and a - QUARTER_PI < 1e-15:
            a = QUARTER_PI
        if not 0.0 <= a <= QUARTER_PI:
            raise ValueError(f"alpha must lie in [0, pi/4], got {self.alpha}")
        object.__setattr__(self, "alpha", a)

    @property
    def overlap(self):
        """|<psi_1|psi_2>| = sin(2 alpha)."""
        return math.sin(2 * self.alpha)

    @property
    def degenerate(self):
        """True for the identical pair (alpha = pi/4), where no information exists."""
        return self.alpha == QUARTER_PI

    @property
    def priors(self):
        return (0.5, 0.5)

    def state(self, i):
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        if i == 1:
            return np.array([c, s], dtype=complex)
        if i == 2:
            return np.array([s, c], dtype=complex)
        raise ValueError(f"hypothesis label must be 1 or 2, got {i}")

    def states(self):
        return self.state(1), self.state(2)


@dataclass(frozen=True)
class TradeoffPoint:
    t: float
    gamma: float
    P: float
    D: float
    beta_t: float


def _check_t(t):
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return t


def gamma_of_t(t):
    t = _check_t(t)
    return math.sqrt(1.0 - t * t)


def helstrom_probability(pair):
    return math.cos(pair.alpha) ** 2


def helstrom_tilt(pair):
    """Tilt of the prepared states for the minimum-error instrument.

    Solves tan(2 beta) = tan(2 alpha) / cos(2 alpha) on the branch
    2 beta in [0, pi/2]; the identical pair is reached by continuity (pi/4).
    """
    s2, c2 = math.sin(2 * pair.alpha), math.cos(2 * pair.alpha)
    return 0.5 * math.atan2(s2, c2 * c2)


def helstrom_disturbance(pair):
    return (4.0 - math.sqrt(14.0 + 2.0 * math.cos(8 * pair.alpha))) / 8.0


def probability_of_t(pair, t):
    t = _check_t(t)
    return t * math.cos(pair.alpha) ** 2 + (1.0 - t) / 2.0


def tilt_of_t(pair, t):
    gamma = gamma_of_t(t)
    s2, c2 = math.sin(2 * pair.alpha), math.cos(2 * pair.alpha)
    return 0.5 * math.atan2(t * s2, c2 * c2 + gamma * s2 * s2)


def disturbance_of_t(pair, t):
    """Minimal average disturbance compatible with success probability P_t."""
    t = _check_t(t)
    gamma = gamma_of_t(t)
    beta = tilt_of_t(pair, t)
    a = pair.alpha
    c4 = math.cos(4 * a)
    return (0.5 * (1.0 - t * math.sin(2 * a) * math.sin(2 * beta))
            + math.cos(2 * beta) / 4.0 * (gamma * (c4 - 1.0) - c4 - 1.0))


def t_of_probability(pair, P, atol=1e-9):
    """Invert P_t = 1/2 + t cos(2 alpha)/2 for t.

    Values slightly outside the feasible window (within ``atol``) are clamped.
    For the identical pair only P = 1/2 is feasible and t = 0 is returned.
    """
    P = float(P)
    c2 = math.cos(2 * pair.alpha)
    p_max = helstrom_probability(pair)
    if P < 0.5 - atol or P > p_max + atol:
        raise ValueError(f"success probability {P} outside [1/2, {p_max}]")
    if c2 <= 0.0 or pair.degenerate:
        return 0.0
    # D has a sqrt(1 - t) singularity at t = 1: absorb round-off in P there
    if P >= p_max - SNAP_TO_HELSTROM:
        return 1.0
    return min(1.0, max(0.0, (2.0 * P - 1.0) / c2))


def optimal_disturbance_at(pair, P, atol=1e-9):
    """Minimal disturbance on the optimal curve at success probability ``P``."""
    return disturbance_of_t(pair, t_of_probability(pair, P, atol))


def tradeoff_point(pair, t):
    t = _check_t(t)
    return TradeoffPoint(t=t, gamma=gamma_of_t(t), P=probability_of_t(pair, t),
                         D=disturbance_of_t(pair, t), beta_t=tilt_of_t(pair, t))


def tradeoff_curve(pair, n_points):
    """Optimal (P, D) curve sampled on a uniform t-grid including both endpoints."""
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    ts = np.linspace(0.0, 1.0, int(n_points))
    return [tradeoff_point(pair, float(t)) for t in ts]
