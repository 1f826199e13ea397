import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mindisc import analytic, oracle
from mindisc.analytic import StatePair
from mindisc.instrument import disturbance, success_probability
from mindisc.oracle import InstrumentParams, build_instrument, minimize_disturbance


def test_params_validation():
    with pytest.raises(ValueError):
        InstrumentParams((0.5, 0.0, 0.0, 0.6), (0, 0, 0), (0, 0, 0))
    with pytest.raises(ValueError):
        InstrumentParams((0.5, 0, 0, 0), (4.0, 0, 0), (0, 0, 0))


def test_build_instrument_identity_params():
    instr = build_instrument(InstrumentParams((0.5, 0, 0, 0), (0, 0, 0), (0, 0, 0)))
    pair = StatePair(math.pi / 8)
    assert success_probability(instr, pair) == pytest.approx(0.5, abs=1e-15)
    assert disturbance(instr, pair) == pytest.approx(0, abs=1e-15)


def _check_fast_eval(x, alpha, tol):
    pair = StatePair(alpha)
    problem = oracle._Problem(pair)
    lam1, lam2, n, v1, v2 = decoded = oracle._decode_full(np.array(x))
    P, D = problem.evaluate(lam1, lam2, n, oracle._su2(v1), oracle._su2(v2))
    instr = build_instrument(oracle._to_params(*decoded))
    assert abs(P - success_probability(instr, pair)) < 1e-12
    assert abs(D - disturbance(instr, pair)) < tol


# effect eigenvalues bounded away from 0 and 1
interior = st.floats(0.05, math.pi / 2 - 0.05)


@settings(max_examples=60, deadline=None)
@given(interior, interior, st.lists(st.floats(-3, 3), min_size=8, max_size=8),
       st.floats(0, math.pi / 4))
def test_fast_evaluation_matches_first_principles(u1, u2, rest, alpha):
    _check_fast_eval([u1, u2, *rest], alpha, 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=10, max_size=10), st.floats(0, math.pi / 4))
def test_fast_evaluation_at_rank_deficient_effects(x, alpha):
    # (q, a, b, c) resolves a zero eigenvalue only to ~1 ulp; sqrt amplifies it
    _check_fast_eval(x, alpha, 1e-7)


def test_infeasible_target(pair8):
    with pytest.raises(ValueError):
        minimize_disturbance(pair8, 0.9)
    with pytest.raises(ValueError):
        minimize_disturbance(pair8, 0.4)


@pytest.mark.parametrize("alpha", [math.pi / 16, math.pi / 8, 3 * math.pi / 16])
@pytest.mark.parametrize("t", [0.0, 0.3, 0.7, 1.0])
def test_restricted_search_reaches_curve(alpha, t):
    pair = StatePair(alpha)
    target = analytic.probability_of_t(pair, t)
    res = minimize_disturbance(pair, target, budget=oracle.RESTRICTED_BUDGET, seed=1, restricted=True)
    assert res.converged
    assert res.constraint_residual <= oracle.RESIDUAL_TOL
    gap = res.achieved_D - analytic.optimal_disturbance_at(pair, res.achieved_P, atol=1e-6)
    assert -1e-6 <= gap <= 1e-4


def test_result_is_deterministic(pair8):
    a = minimize_disturbance(pair8, 0.7, budget=2000, seed=5, restricted=True)
    b = minimize_disturbance(pair8, 0.7, budget=2000, seed=5, restricted=True)
    assert a == b


def test_budget_exhaustion_reported(pair8):
    res = minimize_disturbance(pair8, 0.7, budget=10)
    assert not res.converged
    assert "budget exhausted" in res.message
    assert res.evaluations <= 10


def test_identical_states():
    pair = StatePair(math.pi / 4)
    res = minimize_disturbance(pair, 0.5, budget=2000, restricted=True)
    assert res.achieved_D == pytest.approx(0, abs=1e-6)


def test_verify_curve_small_budget_flags_failure(pair8):
    rows = oracle.verify_curve(pair8, 3, budget=10)
    assert len(rows) == 3
    assert not any(oracle.curve_ok(r) for r in rows)
    with pytest.raises(ValueError):
        oracle.verify_curve(pair8, 2)


def test_optimize_feedback_never_worse(pair8):
    from mindisc.schemes import kerr_raw_kraus
    raw = kerr_raw_kraus(math.pi / 2)
    from mindisc.instrument import Instrument
    _, _, d = oracle.optimize_feedback(raw, pair8, budget=2000)
    assert d <= disturbance(Instrument.pure(*raw), pair8) + 1e-15


@pytest.mark.slow
def test_full_search_at_helstrom_endpoint(pair8):
    res = minimize_disturbance(pair8, analytic.helstrom_probability(pair8))
    assert res.converged
    assert res.achieved_D == pytest.approx(analytic.helstrom_disturbance(pair8), abs=1e-4)


@pytest.mark.slow
def test_verify_orthogonal_states():
    rows = oracle.verify_curve(StatePair(0.0), 3)
    assert all(oracle.curve_ok(r) for r in rows)
    assert all(abs(r.D_oracle) < 1e-6 for r in rows)
