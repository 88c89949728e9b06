import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from orderedl2.exceptions import DimensionMismatch, NonMonotone, TooLarge
from orderedl2.penalty import (
    RegularizationSequence,
    order_statistics,
    ordered_l2_penalty,
    prox_objective,
    prox_oracle_small,
    shrink_ordered_elastic_net,
    shrink_ordered_l2,
    soft_threshold,
    sqrt_ordered_l2,
)

from conftest import random_weights

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def vec_and_weights(draw, max_p=8):
    p = draw(st.integers(1, max_p))
    x = draw(arrays(float, p, elements=finite))
    w = draw(arrays(float, p, elements=st.floats(0.0, 10.0)))
    w = np.sort(w)[::-1]
    w[0] = max(w[0], 1e-3)
    return x, RegularizationSequence(w)


def test_sequence_validation():
    RegularizationSequence([3.0, 2.0, 2.0, 0.0])
    with pytest.raises(NonMonotone) as info:
        RegularizationSequence([1.0, 2.0])
    assert info.value.index == 0
    with pytest.raises(ValueError):
        RegularizationSequence([0.0, 0.0])
    with pytest.raises(ValueError):
        RegularizationSequence([1.0, -0.5])
    with pytest.raises(ValueError):
        RegularizationSequence([np.inf])


def test_order_statistics_worked_sample():
    view = order_statistics([-2.1, -0.5, 3.2, 7.2])
    np.testing.assert_array_equal(view.magnitudes, [7.2, 3.2, 2.1, 0.5])
    np.testing.assert_array_equal(view.permutation, [3, 2, 0, 1])


def test_order_statistics_ties_stable():
    view = order_statistics([1.0, -2.0, 2.0, -1.0])
    np.testing.assert_array_equal(view.permutation, [1, 2, 0, 3])


def test_penalty_worked_sample():
    x = [-2.1, -0.5, 3.2, 7.2]
    assert ordered_l2_penalty(x, [1, 1, 1, 1]) == pytest.approx(66.74, rel=1e-14)
    # distinct weights pick up the rank order
    assert ordered_l2_penalty(x, [4, 3, 2, 1]) == pytest.approx(
        4 * 7.2**2 + 3 * 3.2**2 + 2 * 2.1**2 + 0.5**2, rel=1e-14)


def test_penalty_trivial_cases():
    assert ordered_l2_penalty(np.zeros(4), [1, 1, 1, 1]) == 0.0
    x = np.array([0.3, -5.0, 2.0, 1.0])
    assert ordered_l2_penalty(x, [2.5, 0, 0, 0]) == 2.5 * 25.0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        ordered_l2_penalty([1.0, 2.0], [1.0])
    with pytest.raises(DimensionMismatch):
        shrink_ordered_l2([1.0, 2.0], [1.0, 1.0, 1.0], 1.0)


@settings(max_examples=200)
@given(vec_and_weights())
def test_positivity(xw):
    x, lam = xw
    v = sqrt_ordered_l2(x, lam)
    assert v >= 0
    assert (v == 0) == (not np.any(x))


@settings(max_examples=200)
@given(vec_and_weights(), st.floats(-100, 100))
def test_homogeneity(xw, c):
    x, lam = xw
    f = sqrt_ordered_l2(x, lam)
    assert abs(sqrt_ordered_l2(c * x, lam) - abs(c) * f) <= 1e-12 * max(abs(c) * f, 1e-300)


@settings(max_examples=200)
@given(vec_and_weights(), st.data())
def test_triangle_inequality(xw, data):
    x, lam = xw
    y = data.draw(arrays(float, x.shape[0], elements=finite))
    fx, fy = sqrt_ordered_l2(x, lam), sqrt_ordered_l2(y, lam)
    assert sqrt_ordered_l2(x + y, lam) <= fx + fy + 1e-12 * (fx + fy)


@settings(max_examples=100)
@given(vec_and_weights(), st.randoms(use_true_random=False))
def test_permutation_invariance(xw, r):
    x, lam = xw
    perm = list(range(x.shape[0]))
    r.shuffle(perm)
    assert ordered_l2_penalty(x[perm], lam) == ordered_l2_penalty(x, lam)


@settings(max_examples=100)
@given(vec_and_weights(), st.data())
def test_monotone_in_weights(xw, data):
    x, lam = xw
    i = data.draw(st.integers(0, len(lam) - 1))
    w = lam.values.copy()
    room = w[i - 1] - w[i] if i > 0 else 5.0
    w[i] += data.draw(st.floats(0.0, 1.0)) * room
    assert ordered_l2_penalty(x, w) >= ordered_l2_penalty(x, lam)


def test_corollary_equal_weights(rng):
    for _ in range(50):
        x = rng.standard_normal(rng.integers(1, 40))
        c = rng.uniform(0.1, 5)
        J = ordered_l2_penalty(x, np.full(x.shape[0], c))
        assert abs(J - c * x @ x) <= 1e-12 * J


def test_corollary_linf(rng):
    for _ in range(50):
        x = rng.standard_normal(rng.integers(1, 40))
        c = rng.uniform(0.1, 5)
        w = np.zeros(x.shape[0])
        w[0] = c
        got = sqrt_ordered_l2(x, w)
        assert abs(got - np.sqrt(c) * np.max(np.abs(x))) <= 1e-12 * got


def test_shrink_scalar_ridge(rng):
    v = rng.standard_normal(7)
    np.testing.assert_allclose(shrink_ordered_l2(v, np.ones(7), 1.0), v / 2, rtol=1e-15)


def test_shrink_vanishing_penalty(rng):
    v = rng.standard_normal(5)
    np.testing.assert_allclose(shrink_ordered_l2(v, np.full(5, 1e-12), 1.0), v, rtol=1e-11)


def test_shrink_rank_matching():
    v = np.array([1.0, -4.0, 2.0])
    z = shrink_ordered_l2(v, [3.0, 1.0, 0.0], 1.0)
    # |-4| gets 3, |2| gets 1, |1| gets 0
    np.testing.assert_allclose(z, [1.0, -1.0, 1.0])


@settings(max_examples=200)
@given(vec_and_weights(), st.floats(0.01, 100))
def test_shrink_non_expansive(xw, rho):
    v, lam = xw
    z = shrink_ordered_l2(v, lam, rho)
    assert np.linalg.norm(z) <= np.linalg.norm(v) * (1 + 1e-15)
    assert np.all(np.sign(z) * np.sign(v) >= 0)


def test_oracle_exhaustive_matches_hand_enumeration(rng):
    """Recompute the oracle's candidate set independently for p=3."""
    for _ in range(30):
        v = rng.standard_normal(3)
        lam = random_weights(rng, 3)
        rho = rng.uniform(0.2, 3)
        cands = []
        for perm in itertools.permutations(lam):
            z = np.array([rho * v[j] / (perm[j] + rho) for j in range(3)])
            sq = np.sort(z**2)[::-1]
            obj = 0.5 * sum(lam[i] * sq[i] for i in range(3)) + 0.5 * rho * sum((v - z) ** 2)
            cands.append(obj)
        o = prox_oracle_small(v, lam, rho)
        assert prox_objective(o, v, lam, rho) == pytest.approx(min(cands), rel=1e-12)
        z = shrink_ordered_l2(v, lam, rho)
        assert prox_objective(o, v, lam, rho) <= prox_objective(z, v, lam, rho) + 1e-15


def test_oracle_equal_weights(rng):
    v = rng.standard_normal(4)
    np.testing.assert_allclose(prox_oracle_small(v, np.full(4, 0.5), 2.0), v * 2 / 2.5)


def test_oracle_keeps_zero():
    o = prox_oracle_small([1.0, 0.0], [2.0, 1.0], 1.0)
    assert o[1] == 0.0


def test_oracle_dominance(rng):
    for _ in range(500):
        v = rng.standard_normal(4)
        lam = random_weights(rng, 4)
        o = prox_oracle_small(v, lam, 1.0)
        z = shrink_ordered_l2(v, lam, 1.0)
        assert prox_objective(o, v, lam, 1.0) <= prox_objective(z, v, lam, 1.0)


def test_oracle_agrees_when_order_preserved(rng):
    n_checked = 0
    for _ in range(300):
        p = int(rng.integers(1, 6))
        v = rng.standard_normal(p)
        lam = random_weights(rng, p)
        z = shrink_ordered_l2(v, lam, 1.0)
        if np.array_equal(order_statistics(z).permutation, order_statistics(v).permutation):
            n_checked += 1
            np.testing.assert_allclose(prox_oracle_small(v, lam, 1.0), z, rtol=0, atol=1e-8)
    assert n_checked > 50


def test_oracle_too_large():
    with pytest.raises(TooLarge):
        prox_oracle_small(np.ones(7), np.ones(7), 1.0)


def test_soft_threshold():
    np.testing.assert_allclose(soft_threshold([3.0, -1.0, 0.2], 0.5), [2.5, -0.5, 0.0])
    v = np.array([1.5, -2.0, 0.0])
    np.testing.assert_array_equal(soft_threshold(v, 0.0), v)
    with pytest.raises(ValueError):
        soft_threshold(v, -1.0)


def test_enet_full_threshold(rng):
    v = rng.standard_normal(6)
    big = np.full(6, 10.0)
    np.testing.assert_array_equal(shrink_ordered_elastic_net(v, big, np.ones(6), 1.0), 0.0)


def test_enet_reduces_to_soft_threshold(rng):
    v = rng.standard_normal(10)
    z = shrink_ordered_elastic_net(v, np.full(10, 0.3), np.zeros(10), 1.0)
    np.testing.assert_allclose(z, soft_threshold(v, 0.3), rtol=1e-15, atol=0)


def test_enet_reduces_to_ordered_l2(rng):
    v = rng.standard_normal(10)
    lam = random_weights(rng, 10)
    np.testing.assert_allclose(
        shrink_ordered_elastic_net(v, np.zeros(10), lam, 1.7),
        shrink_ordered_l2(v, lam, 1.7), rtol=1e-14)


def test_enet_closed_form_matches_sign_form(rng):
    v = rng.standard_normal(12) * 3
    l1 = random_weights(rng, 12)
    l2 = random_weights(rng, 12)
    rho = 1.4
    z = shrink_ordered_elastic_net(v, l1, l2, rho)
    perm = order_statistics(v).permutation
    w1, w2 = np.empty(12), np.empty(12)
    w1[perm], w2[perm] = l1, l2
    np.testing.assert_allclose(
        z, np.sign(v) * np.maximum(0, rho * np.abs(v) - w1) / (w2 + rho), rtol=1e-14)
