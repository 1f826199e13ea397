"""Minimum-disturbing discrimination of two pure qubit states.

Closed-form tradeoff, executable instruments, a numerical optimality oracle,
simulators of two probe-based measurement schemes and Monte Carlo sampling.
"""

from .analytic import StatePair, TradeoffPoint, tradeoff_curve
from .instrument import Instrument, helstrom_instrument, optimal_instrument

__all__ = ["StatePair", "TradeoffPoint", "tradeoff_curve", "Instrument",
           "helstrom_instrument", "optimal_instrument"]
__version__ = "0.1.0"
