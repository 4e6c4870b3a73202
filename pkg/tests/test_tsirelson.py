from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistlab.coeff import EXACT, CoeffVector
from twistlab.tsirelson import (
    CapExceeded,
    IntervalPartition,
    NormingFunctional,
    dual_Tp_certificate,
    dual_norm_T,
    dual_norm_Tp,
    enumerate_norming_set,
    is_admissible,
    norm_T,
    norm_T2_squared_exact,
    norm_Tp,
    norming_functional_for,
    norming_matrix,
    restricted_facets,
)


def _compositions(lo, hi):
    """All ways to cut ``lo..hi`` into successive nonempty intervals."""
    if lo > hi:
        yield []
        return
    for b in range(lo, hi + 1):
        for rest in _compositions(b + 1, hi):
            yield [(lo, b)] + rest


def implicit_norm(values):
    """Brute force of ``||x|| = max(||x||_inf, 1/2 sup sum ||E_i x||)`` over intervals."""
    vals = tuple(abs(Fraction(v)) for v in values)

    @lru_cache(maxsize=None)
    def rec(lo, hi):
        best = max(vals[lo - 1:hi], default=Fraction(0))
        for s in range(lo, hi + 1):
            for parts in _compositions(s, hi):
                if 2 <= len(parts) <= s:
                    best = max(best, sum(rec(a, b) for a, b in parts) / 2)
        return best

    return rec(1, len(vals))


def matrix_norm(values):
    """Max over the nonnegative norming rows of ``row . |x|``, in integers."""
    x = [Fraction(v) for v in values]
    den = 1
    for v in x:
        den = den * v.denominator // np.gcd(den, v.denominator)
    nums = [abs(int(v * den)) for v in x]
    rows, scale = norming_matrix(len(x))
    best = max(sum(int(r) * a for r, a in zip(row, nums)) for row in rows.tolist())
    return Fraction(best, scale * den)


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def test_admissibility():
    assert is_admissible({3, 5, 9})
    assert not is_admissible({2, 5, 9})
    assert is_admissible({1})
    with pytest.raises(ValueError):
        is_admissible(set())


def test_interval_partition():
    assert IntervalPartition(((2, 3), (4, 7))).admissible
    assert not IntervalPartition(((1, 1), (2, 3))).admissible
    with pytest.raises(ValueError):
        IntervalPartition(((2, 4), (4, 5)))


def test_known_values():
    assert norm_T(CoeffVector.unit(1)) == 1
    # e3 + e4 + e5 is admissible: half of three ones
    assert norm_T(CoeffVector.indicator([3, 4, 5])) == Fraction(3, 2)
    # e1 + e2 cannot be split admissibly at 1
    assert norm_T(CoeffVector.indicator([1, 2])) == 1
    assert norm_T(CoeffVector({})) == 0


@settings(max_examples=60, deadline=None)
@given(st.lists(rationals, min_size=1, max_size=6))
def test_dp_matches_implicit_equation(values):
    x = CoeffVector({j + 1: v for j, v in enumerate(values)}, EXACT)
    assert norm_T(x) == implicit_norm(values)


@settings(max_examples=60, deadline=None)
@given(st.lists(rationals, min_size=1, max_size=8))
def test_dp_matches_norming_matrix(values):
    x = CoeffVector({j + 1: v for j, v in enumerate(values)}, EXACT)
    assert norm_T(x) == matrix_norm(values)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=12))
def test_float_agrees_with_exact(values):
    exact = norm_T(CoeffVector({j + 1: Fraction(v) for j, v in enumerate(values)}, EXACT))
    assert norm_T(np.array(values)) == pytest.approx(float(exact), rel=1e-12, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=16).filter(lambda v: any(v)))
def test_backtracked_functional_attains_norm(values):
    x = np.array(values)
    f = norming_functional_for(x)
    assert f(x) == pytest.approx(norm_T(x), rel=1e-12)
    if f.kind == "half":
        # rebuilding through the validating constructor checks admissibility
        NormingFunctional.half(f.children)


def test_lattice_and_sign_invariance():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.normal(size=10)
        y = np.abs(x) * rng.uniform(0, 1, size=10)
        assert norm_T(y) <= norm_T(x) + 1e-12
        assert norm_T(x * rng.choice([-1, 1], size=10)) == pytest.approx(norm_T(x), rel=1e-14)
        assert norm_T(np.abs(x)) <= np.sum(np.abs(x)) + 1e-12
        assert norm_T(x) >= np.max(np.abs(x)) - 1e-15


def test_norming_set_closed_under_signs():
    fs = enumerate_norming_set(4)
    coeffs = {tuple(sorted(f.coefficients.items())) for f in fs}
    for c in coeffs:
        flipped = tuple((j, -v) for j, v in c)
        assert flipped in coeffs


def test_norming_matrix_shape():
    rows, scale = norming_matrix(8)
    assert scale == 256
    assert rows.shape == (1905, 8)
    assert norming_matrix(8, maximal=True)[0].shape[0] == 203
    with pytest.raises(CapExceeded):
        norming_matrix(9)


def test_restricted_facets_give_norm():
    rng = np.random.default_rng(5)
    for _ in range(20):
        supp = tuple(sorted(rng.choice(np.arange(1, 9), size=rng.integers(1, 6), replace=False)))
        c = rng.uniform(0.1, 2, size=len(supp))
        x = np.zeros(8)
        x[[j - 1 for j in supp]] = c
        F = restricted_facets(8, tuple(int(j) for j in supp))
        assert np.max(F @ c) == pytest.approx(norm_T(x), rel=1e-12)


def test_exact_T2():
    x = CoeffVector({3: Fraction(1, 2), 4: 1, 5: -1})
    assert norm_T2_squared_exact(x) == Fraction(9, 8)
    assert norm_Tp(x, 2) == pytest.approx((9 / 8) ** 0.5)
    with pytest.raises(ValueError):
        norm_Tp(x, 0.5)


def test_dual_norm_duality():
    rng = np.random.default_rng(7)
    for _ in range(10):
        y = rng.normal(size=6)
        d = dual_norm_T(y)
        # |<x, y>| <= ||x||_T ||y||_*
        for _ in range(20):
            x = rng.normal(size=6)
            assert abs(x @ y) <= norm_T(x) * d + 1e-9
        # the p = 1 convex program agrees with the LP
        assert dual_norm_Tp(y, 1) == pytest.approx(d, rel=1e-8)


def test_dual_T2_certificate():
    rng = np.random.default_rng(11)
    for _ in range(5):
        y = rng.normal(size=7)
        cert = dual_Tp_certificate(y, 2)
        assert cert.residual <= 1e-8 * max(1, cert.upper)
        # the primal point is feasible and attains the lower bound
        assert norm_T(cert.t) <= 1 + 1e-7
        assert np.abs(y) @ np.sqrt(cert.t) == pytest.approx(cert.lower, rel=1e-7)
        # Hoelder in T^2 against random vectors
        for _ in range(10):
            x = rng.normal(size=7)
            assert abs(x @ y) <= norm_Tp(x, 2) * cert.upper * (1 + 1e-8)


def test_cap():
    with pytest.raises(CapExceeded):
        dual_norm_T(np.ones(9))


def test_admissible_subsets_small():
    # every admissible subset of 1..8 of size k has T-norm k / 2 when k >= 2
    for k in range(2, 5):
        for A in combinations(range(k, 9), k):
            assert norm_T(CoeffVector.indicator(A)) == Fraction(k, 2)
