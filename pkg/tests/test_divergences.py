import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alphadiv import (
    alpha_divergence,
    binary_alpha_divergence,
    binary_renyi_divergence,
    f_divergence,
    kl_divergence,
    make_measure,
    make_pair,
    point_mass,
    renyi_divergence,
)
from alphadiv.divergences import (
    alpha_generator,
    hellinger_sq,
    neyman_chi2,
    pearson_chi2,
    renyi_from_alpha,
)
from alphadiv.errors import InvalidOrder
from alphadiv.measures import pair_from_weights

from helpers import (
    close,
    mp_alpha,
    mp_binary,
    random_full_pairs,
    random_sparse_pairs,
    rel_err,
    standard_pair,
)

ALPHAS = [-3.0, -2.0, -1.0, -0.5, -1e-9, 0.0, 0.25, 0.5, 0.999, 1.0, 1.5, 2.0, 3.0, 4.0]


def test_f_divergence_examples():
    pair = standard_pair()
    f = lambda t: (t - 1) ** 2 / 2
    assert f_divergence(pair, f, 0.5, math.inf) == pytest.approx(0.08, rel=1e-14)
    kl = make_pair(point_mass(0.0), make_measure([0, 1], [0.5, 0.5]))
    assert f_divergence(kl, lambda t: t * math.log(t), 0.0, math.inf) == pytest.approx(math.log(2), rel=1e-15)
    assert f_divergence(make_pair(pair.p, pair.p), f, 0.5, math.inf) == 0.0


def test_f_divergence_matches_alpha_generator():
    for pair in random_sparse_pairs(30, seed=3):
        for a in (-1.5, 0.0, 0.5, 1.0, 2.5):
            got = f_divergence(pair, *alpha_generator(a))
            want = mp_alpha(pair.p.weights, pair.q.weights, a)
            if math.isinf(want):
                assert got == math.inf
            else:
                assert close(got, want, 1e-12)


def test_alpha_divergence_examples():
    pair = standard_pair()
    assert alpha_divergence(pair, 2) == pytest.approx(0.08, rel=1e-14)
    same = make_pair(pair.p, pair.p)
    for a in ALPHAS:
        assert alpha_divergence(same, a) == 0.0


def test_infinite_cases():
    disjoint = make_pair(point_mass(0.0), point_mass(1.0))
    assert alpha_divergence(disjoint, 2) == math.inf
    assert alpha_divergence(disjoint, -1) == math.inf
    assert alpha_divergence(disjoint, 1) == math.inf
    # alpha in (0, 1) stays finite on disjoint supports
    assert alpha_divergence(disjoint, 0.5) == pytest.approx(4.0, rel=1e-15)
    p_in_q = make_pair(point_mass(0.0), make_measure([0, 1], [0.5, 0.5]))
    assert alpha_divergence(p_in_q, 1) == pytest.approx(math.log(2), rel=1e-15)
    assert alpha_divergence(p_in_q, 0) == math.inf
    assert alpha_divergence(p_in_q, 3) < math.inf
    assert alpha_divergence(p_in_q, -0.5) == math.inf


@pytest.mark.parametrize("alpha", ALPHAS)
def test_against_mpmath_oracle(alpha):
    worst = 0.0
    for pair in random_full_pairs(40, k=4, seed=11) + random_sparse_pairs(40, seed=12):
        got = alpha_divergence(pair, alpha)
        want = mp_alpha(pair.p.weights, pair.q.weights, alpha)
        if math.isinf(want) or math.isinf(got):
            assert got == want
            continue
        worst = max(worst, rel_err(got, want))
    assert worst <= 1e-12


def test_near_equal_pair_keeps_relative_accuracy():
    # D ~ 1e-16: a naive (sum p^a q^(1-a) - 1) form would return pure noise
    p = np.array([0.3, 0.3, 0.4])
    q = p + np.array([1e-8, -3e-8, 2e-8])
    pair = pair_from_weights([0, 1, 2], p, q)
    for a in (-1.0, 0.0, 0.3, 1.0, 2.0):
        want = mp_alpha(pair.p.weights, pair.q.weights, a)
        assert rel_err(alpha_divergence(pair, a), want) < 1e-6


def test_duality():
    for pair in random_sparse_pairs(100, seed=5):
        for a in np.linspace(-3, 4, 15):
            x = alpha_divergence(pair, a)
            y = alpha_divergence(pair.swapped(), 1 - a)
            if math.isinf(x) or math.isinf(y):
                assert x == y
            else:
                assert close(x, y, 1e-12)


def test_special_alpha_identities():
    for pair in random_full_pairs(50, k=4, seed=7):
        p, q = pair.p.weights, pair.q.weights
        pear = math.fsum((p - q) ** 2 / q)
        ney = math.fsum((p - q) ** 2 / p)
        hel = 2 * math.fsum((np.sqrt(p) - np.sqrt(q)) ** 2)
        assert close(alpha_divergence(pair, 2), 0.5 * pear, 1e-12)
        assert close(alpha_divergence(pair, -1), 0.5 * ney, 1e-12)
        assert close(alpha_divergence(pair, 0.5), hel, 1e-12)
        assert close(alpha_divergence(pair, 0.5), 4 * hellinger_sq(pair), 1e-12)
        assert close(pearson_chi2(pair), pear, 1e-14)
        assert close(neyman_chi2(pair), ney, 1e-14)


def test_kl_helper():
    pair = standard_pair()
    want = 0.7 * math.log(1.4) + 0.3 * math.log(0.6)
    assert kl_divergence(pair) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("branch", [0.0, 1.0])
def test_continuity_at_branch_points(branch):
    for pair in random_full_pairs(20, k=3, seed=8):
        base = alpha_divergence(pair, branch)
        for eps in (1e-8, -1e-8):
            assert abs(alpha_divergence(pair, branch + eps) - base) <= 1e-6


def test_nonnegative_and_zero_iff_equal():
    for pair in random_sparse_pairs(50, seed=9):
        for a in ALPHAS:
            v = alpha_divergence(pair, a)
            assert v >= 0
            if not np.array_equal(pair.p.weights, pair.q.weights):
                assert v > 0


def test_nan_or_inf_alpha_rejected():
    with pytest.raises(InvalidOrder):
        alpha_divergence(standard_pair(), math.nan)
    with pytest.raises(InvalidOrder):
        alpha_divergence(standard_pair(), math.inf)


# --- Renyi ---------------------------------------------------------------

def test_renyi_examples():
    pair = standard_pair()
    assert renyi_divergence(make_pair(pair.p, pair.p), 1) == 0.0
    assert renyi_divergence(pair, 0) == 0.0
    assert renyi_divergence(pair, 2) == pytest.approx(math.log(1.16), rel=1e-14)


def test_renyi_order_zero_and_infinity():
    pair = make_pair(point_mass(0.0), make_measure([0, 1], [0.25, 0.75]))
    assert renyi_divergence(pair, 0) == pytest.approx(math.log(4), rel=1e-15)
    assert renyi_divergence(pair, math.inf) == pytest.approx(math.log(4), rel=1e-15)
    assert renyi_divergence(pair.swapped(), 0) == 0.0
    assert renyi_divergence(pair.swapped(), math.inf) == math.inf
    assert renyi_divergence(make_pair(point_mass(0.0), point_mass(1.0)), 0) == math.inf


@pytest.mark.parametrize("order", [-0.5, -2.0, math.nan])
def test_negative_renyi_rejected(order):
    with pytest.raises(InvalidOrder):
        renyi_divergence(standard_pair(), order)
    with pytest.raises(InvalidOrder):
        binary_renyi_divergence(0.3, 0.4, order)


def test_renyi_consistent_with_alpha_divergence():
    for pair in random_sparse_pairs(60, seed=10):
        for a in (0.25, 0.5, 0.75, 1.5, 2.0, 3.0):
            direct = renyi_divergence(pair, a)
            via = renyi_from_alpha(alpha_divergence(pair, a), a)
            if math.isinf(direct) or math.isinf(via):
                assert direct == via
            else:
                assert close(direct, via, 1e-10)
            p, q = pair.p.weights, pair.q.weights
            m = (p > 0) | (q > 0)
            if a > 1 and np.any((q == 0) & (p > 0)):
                continue
            s = math.fsum(p[m & (p > 0) & (q > 0)] ** a * q[m & (p > 0) & (q > 0)] ** (1 - a))
            if s > 0:
                assert close(direct, math.log(s) / (a - 1), 1e-10)


def test_renyi_monotone_in_order():
    for pair in random_full_pairs(20, seed=13):
        vals = [renyi_divergence(pair, a) for a in (0, 0.25, 0.5, 1, 2, 4, math.inf)]
        assert all(x <= y + 1e-14 for x, y in zip(vals, vals[1:]))


# --- binary forms --------------------------------------------------------

def test_binary_examples():
    for a in ALPHAS:
        assert binary_alpha_divergence(0.3, 0.3, a) == 0.0
        assert binary_renyi_divergence(0.3, 0.3, max(a, 0.0)) == 0.0
    r, s = 0.5 + 0.5 / math.sqrt(5), 0.5 - 0.5 / math.sqrt(5)
    assert binary_alpha_divergence(r, s, 2) == pytest.approx(0.5, rel=1e-14)
    assert binary_renyi_divergence(0.4, 0.9, 0) == 0.0
    assert binary_renyi_divergence(1.0, 0.5, 0) == pytest.approx(math.log(2), rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.001, 0.999), st.floats(0.001, 0.999))
def test_binary_chi2_identity(r, s):
    want = (r - s) ** 2 / (2 * s * (1 - s))
    assert close(binary_alpha_divergence(r, s, 2), want, 1e-12)


def test_binary_matches_two_point_pair_and_oracle():
    grid = [0.0, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0]
    for r in grid:
        for s in grid:
            pair = pair_from_weights([0, 1], [r, 1 - r], [s, 1 - s])
            for a in ALPHAS:
                got = binary_alpha_divergence(r, s, a)
                assert got == alpha_divergence(pair, a) or close(got, alpha_divergence(pair, a), 1e-12)
                want = mp_binary(r, s, a)
                if math.isinf(want):
                    assert got == math.inf
                else:
                    assert close(got, want, 1e-12)


def test_binary_rejects_out_of_range():
    with pytest.raises(ValueError):
        binary_alpha_divergence(1.2, 0.5, 0.5)
    with pytest.raises(ValueError):
        binary_renyi_divergence(0.5, -0.1, 0.5)
