import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mindisc import analytic
from mindisc.analytic import StatePair
from mindisc.instrument import (Instrument, apply_channel, apply_outcome,
                                average_channel, channel_distance, disturbance,
                                helstrom_instrument, identity_instrument,
                                is_valid_posterior, optimal_instrument,
                                optimal_kraus_pair, outcome_choi, povm_of,
                                success_probability)
from mindisc.qmath import I2, SZ, projector, rotation

from conftest import ALPHA_GRID

alphas = st.floats(0.0, math.pi / 4)
ts = st.floats(0.0, 1.0)


def test_instrument_rejects_incomplete():
    with pytest.raises(ValueError, match="completeness"):
        Instrument.pure(np.diag([1, 0]), np.diag([0, 0.5]))
    with pytest.raises(ValueError, match="duplicate"):
        Instrument(((1, (I2,)), (1, (I2,))))
    with pytest.raises(ValueError):
        Instrument(((1, ()),))
    with pytest.raises(KeyError):
        identity_instrument().kraus(3)


def test_multi_kraus_outcome():
    half = I2 / math.sqrt(2)
    instr = Instrument(((1, (half, half)),))
    assert np.abs(povm_of(instr)[0] - I2).max() < 1e-15


def test_helstrom_instrument_povm(pair8):
    instr = helstrom_instrument(pair8)
    e1, e2 = povm_of(instr)
    assert np.abs(e1 - np.diag([1, 0])).max() < 1e-15
    assert np.abs(e2 - np.diag([0, 1])).max() < 1e-15
    assert success_probability(instr, pair8) == pytest.approx(0.8535534, abs=1e-7)


def test_identity_outcome_returns_input(pair8):
    rho = projector(pair8.state(1))
    p, post = apply_outcome(identity_instrument(), 1, rho)
    assert p == pytest.approx(1, abs=1e-15)
    assert np.abs(post - rho).max() < 1e-15


def test_apply_outcome_zero_probability():
    instr = Instrument.pure(np.diag([1, 0]), np.diag([0, 1]))
    p, post = apply_outcome(instr, 2, np.diag([1, 0]))
    assert p == 0 and post is None
    assert not is_valid_posterior(post)


def test_apply_outcome_rejects_bad_state():
    with pytest.raises(ValueError):
        apply_outcome(identity_instrument(), 1, np.diag([1, 1]))


def test_success_probability_needs_two_labels(pair8):
    with pytest.raises(ValueError):
        success_probability(identity_instrument(), pair8)


def test_disturbance_examples(pair8):
    assert disturbance(identity_instrument(), pair8) == 0
    assert disturbance(helstrom_instrument(pair8), pair8) == pytest.approx(0.0669873, abs=1e-7)
    assert disturbance(optimal_instrument(pair8, 0.5), pair8) == pytest.approx(0.0011230858487689677, abs=1e-12)


def test_identity_channel_choi():
    choi = average_channel(identity_instrument())
    phi = np.array([1, 0, 0, 1])
    assert np.abs(choi - np.outer(phi, phi)).max() == 0
    assert np.trace(choi) == pytest.approx(2)


def test_channel_distance():
    a = average_channel(identity_instrument())
    assert channel_distance(a, a) == 0
    with pytest.raises(ValueError):
        channel_distance(a, I2)


def test_choi_blind_to_kraus_phase(pair8):
    e1, e2 = optimal_kraus_pair(pair8, 0.4)
    a = optimal_instrument(pair8, 0.4)
    b = Instrument.pure(1j * e1, -e2)
    assert channel_distance(average_channel(a), average_channel(b)) < 1e-15
    for o in (1, 2):
        assert channel_distance(outcome_choi(a, o), outcome_choi(b, o)) < 1e-15


def test_optimal_instrument_limits(pair8):
    # t = 0 is exactly the identity channel split in two halves
    choi = average_channel(optimal_instrument(pair8, 0.0))
    assert channel_distance(choi, average_channel(identity_instrument())) < 1e-15
    # t = 1 coincides with the minimum-error instrument
    for o in (1, 2):
        assert channel_distance(outcome_choi(optimal_instrument(pair8, 1.0), o),
                                outcome_choi(helstrom_instrument(pair8), o)) < 1e-15


def test_optimal_povm_form(pair8):
    t = 0.6
    e1, e2 = povm_of(optimal_instrument(pair8, t))
    assert np.abs(e1 - (I2 + t * SZ) / 2).max() < 1e-15
    assert np.abs(e2 - (I2 - t * SZ) / 2).max() < 1e-15


@settings(max_examples=60, deadline=None)
@given(alphas, ts)
def test_optimal_instrument_matches_closed_form(alpha, t):
    pair = StatePair(alpha)
    instr = optimal_instrument(pair, t)
    assert abs(success_probability(instr, pair) - analytic.probability_of_t(pair, t)) < 1e-12
    assert abs(disturbance(instr, pair) - analytic.disturbance_of_t(pair, t)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(alphas, ts, st.integers(0, 2 ** 32 - 1))
def test_completeness_and_valid_posteriors(alpha, t, seed):
    pair = StatePair(alpha)
    instr = optimal_instrument(pair, t)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    rho = projector(v / np.linalg.norm(v))
    total = 0.0
    for o in instr.labels:
        p, post = apply_outcome(instr, o, rho)
        assert -1e-14 <= p <= 1 + 1e-12
        total += p
        if post is not None:
            assert is_valid_posterior(post)
    assert total == pytest.approx(1, abs=1e-12)
    assert abs(np.trace(apply_channel(instr, rho)) - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(alphas, ts)
def test_relabeling_symmetry(alpha, t):
    # swapping |1> <-> |2> exchanges the hypotheses and the outcomes
    pair = StatePair(alpha)
    e1, e2 = optimal_kraus_pair(pair, t)
    x = np.array([[0, 1], [1, 0]])
    swapped = Instrument.pure(x @ e2 @ x, x @ e1 @ x)
    assert abs(success_probability(swapped, pair) - success_probability(optimal_instrument(pair, t), pair)) < 1e-12
    assert abs(disturbance(swapped, pair) - disturbance(optimal_instrument(pair, t), pair)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(alphas, st.floats(-0.4, 0.4))
def test_helstrom_tilt_is_locally_optimal(alpha, delta):
    pair = StatePair(alpha)
    beta = analytic.helstrom_tilt(pair)
    u = rotation(beta + delta)
    instr = Instrument.pure(u @ np.diag([1, 0]), u.T @ np.diag([0, 1]))
    assert disturbance(instr, pair) >= analytic.helstrom_disturbance(pair) - 1e-12


@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_no_sampled_instrument_beats_curve(alpha):
    # random instruments never fall below the optimal curve
    pair = StatePair(alpha)
    rng = np.random.default_rng(17)
    p_max = analytic.helstrom_probability(pair)
    for _ in range(300):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = a.conj().T @ a
        w, v = np.linalg.eigh(h)
        e1 = (v * (w / w.max())) @ v.conj().T
        root = lambda m: (lambda ww, vv: (vv * np.sqrt(np.clip(ww, 0, None))) @ vv.conj().T)(*np.linalg.eigh(m))
        q1, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        q2, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        instr = Instrument.pure(q1 @ root(e1), q2 @ root(I2 - e1))
        P = success_probability(instr, pair)
        if not 0.5 <= P <= p_max:
            continue
        assert disturbance(instr, pair) >= analytic.optimal_disturbance_at(pair, P) - 1e-12


@pytest.mark.parametrize("t", [1e-10, 1e-6, 1e-3])
def test_small_t_keeps_its_measurement(t):
    pair = StatePair(math.pi / 8)
    e1, _ = povm_of(optimal_instrument(pair, t))
    assert np.abs(e1 - (I2 + t * SZ) / 2).max() < 1e-15
    assert np.real(e1[0, 0] - e1[1, 1]) == pytest.approx(t, rel=1e-5)
