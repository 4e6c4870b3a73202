"""Tsirelson norm ``T``, its convexifications ``T^p`` and their duals.

The norm is the fixed point of

    ||x|| = max(||x||_inf, 1/2 sup sum_i ||E_i x||)

over admissible families ``E_1 < ... < E_k`` with ``k <= min E_1``.  Because
the norm is 1-unconditional and lattice monotone, the ``E_i`` may be taken to
be intervals of the support, so the sup is a dynamic program over support
intervals evaluated by increasing length.  Only the positions of the nonzero
coordinates matter, which keeps sparse evaluations cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .coeff import EXACT, FLOAT, CoeffVector, as_dense
from . import _polytope

DEFAULT_CAP = 8
HALF = Fraction(1, 2)


class CapExceeded(ValueError):
    """Raised when a dimension exceeds the norming-set enumeration cap."""


class SolverError(RuntimeError):
    """A numerical solver failed to certify its answer."""

    def __init__(self, message, iterate=None, residual=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual


def is_admissible(A) -> bool:
    """``|A| <= min A`` for a finite nonempty set of positive integers."""
    A = set(A)
    if not A:
        raise ValueError("empty set has no admissibility status")
    if min(A) < 1:
        raise ValueError("admissibility is defined for positive integers")
    return len(A) <= min(A)


@dataclass(frozen=True)
class IntervalPartition:
    """Successive integer intervals ``[a_i, b_i]``."""

    intervals: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prev = 0
        for a, b in self.intervals:
            if a > b or a <= prev:
                raise ValueError(f"intervals must be successive and nonempty: {self.intervals}")
            prev = b

    @property
    def k(self) -> int:
        return len(self.intervals)

    @property
    def admissible(self) -> bool:
        return bool(self.intervals) and self.k <= self.intervals[0][0]


@dataclass(frozen=True)
class NormingFunctional:
    """Element of the Tsirelson norming set.

    ``kind == "unit"`` is ``sign * e_index^*``; ``kind == "half"`` is one half
    of the sum of ``children``, whose supports are successive and whose count
    is at most the least index of the first child's support.
    """

    kind: str
    index: int = 0
    sign: int = 1
    children: tuple["NormingFunctional", ...] = ()

    @classmethod
    def unit(cls, index: int, sign: int = 1) -> "NormingFunctional":
        return cls("unit", index=index, sign=1 if sign >= 0 else -1)

    @classmethod
    def half(cls, children: Sequence["NormingFunctional"]) -> "NormingFunctional":
        children = tuple(children)
        if len(children) < 2:
            raise ValueError("a half-sum needs at least two children")
        for left, right in zip(children, children[1:]):
            if max(left.support) >= min(right.support):
                raise ValueError("children supports must be successive")
        if len(children) > min(children[0].support):
            raise ValueError("half-sum is not admissible")
        return cls("half", children=children)

    @property
    def coefficients(self) -> dict[int, Fraction]:
        if self.kind == "unit":
            return {self.index: Fraction(self.sign)}
        out = {}
        for child in self.children:
            for j, v in child.coefficients.items():
                out[j] = v / 2
        return out

    @property
    def support(self) -> list[int]:
        if self.kind == "unit":
            return [self.index]
        return [j for c in self.children for j in c.support]

    def coeff_vector(self) -> CoeffVector:
        return CoeffVector(self.coefficients, EXACT)

    def __call__(self, x):
        """Evaluate recursively: ``sign * x_j`` or half the children's sum."""
        if self.kind == "unit":
            if isinstance(x, CoeffVector):
                return self.sign * x.entries.get(self.index, 0)
            arr = np.asarray(x)
            return self.sign * (arr[self.index - 1] if self.index <= arr.size else 0.0)
        total = sum(child(x) for child in self.children)
        return total / 2 if isinstance(total, float) or isinstance(x, np.ndarray) else HALF * total

    def with_signs(self, signs: dict[int, int]) -> "NormingFunctional":
        if self.kind == "unit":
            return NormingFunctional.unit(self.index, signs.get(self.index, 1) * self.sign)
        return NormingFunctional("half", children=tuple(c.with_signs(signs) for c in self.children))


# ---------------------------------------------------------------------------
# dynamic program


def _exact_dp(pos: Sequence[int], vals: Sequence[Fraction]):
    """Interval DP on the compressed support, generic scalar arithmetic.

    ``N[i][j]`` is the norm of the restriction to support entries ``i..j``.
    ``Q[i][j][k-1]`` is the best sum of norms over partitions of ``i..j``
    into at most ``k`` intervals; ``R[i][j][k-2]`` the same with at least two.
    """
    m = len(pos)
    N = [[None] * m for _ in range(m)]
    Q = [[None] * m for _ in range(m)]
    R = [[None] * m for _ in range(m)]
    for length in range(1, m + 1):
        for i in range(m - length + 1):
            j = i + length - 1
            rij = []
            for k in range(2, length + 1):
                best = None
                for t in range(i, j):
                    tail = Q[t + 1][j]
                    cand = N[i][t] + tail[min(k - 1, len(tail)) - 1]
                    if best is None or cand > best:
                        best = cand
                rij.append(best)
            R[i][j] = rij
            value = max(vals[i:j + 1])
            for s in range(i, j + 1):
                kmax = min(pos[s], j - s + 1)
                if kmax >= 2:
                    half = R[s][j][kmax - 2] * HALF if isinstance(vals[0], Fraction) else R[s][j][kmax - 2] / 2
                    if half > value:
                        value = half
            N[i][j] = value
            Q[i][j] = [value] + [r if r > value else value for r in rij]
    return N


def _float_dp(pos: np.ndarray, vals: np.ndarray):
    """Vectorized float version of :func:`_exact_dp`; returns ``(N, Q, R)``."""
    m = len(pos)
    N = np.zeros((m, m))
    Q = np.zeros((m, m, m + 1))   # Q[i, j, k], k = 1..m
    R = np.full((m, m, m + 1), -np.inf)   # R[i, j, k], k = 2..m
    for length in range(1, m + 1):
        for i in range(m - length + 1):
            j = i + length - 1
            if length >= 2:
                cand = N[i, i:j][:, None] + Q[i + 1:j + 1, j, 1:m]
                R[i, j, 2:] = cand.max(axis=0)
            s = np.arange(i, j + 1)
            kmax = np.minimum(pos[s], j - s + 1)
            ok = kmax >= 2
            value = vals[i:j + 1].max()
            if ok.any():
                half = 0.5 * R[s[ok], j, kmax[ok]].max()
                value = max(value, half)
            N[i, j] = value
            Q[i, j, 1] = value
            Q[i, j, 2:] = np.maximum(value, R[i, j, 2:])
    return N, Q, R


def _backtrack(pos, vals, N, Q, R, i, j, signs) -> NormingFunctional:
    """Recover a norming functional attaining ``N[i, j]`` (float DP tables)."""
    target = N[i, j]
    best = int(np.argmax(vals[i:j + 1])) + i
    if vals[best] >= target:
        return NormingFunctional.unit(int(pos[best]), signs[best])
    for s in range(i, j + 1):
        kmax = min(int(pos[s]), j - s + 1)
        if kmax >= 2 and 0.5 * R[s, j, kmax] >= target:
            pieces = _pieces_R(N, Q, R, s, j, kmax)
            return NormingFunctional(
                "half", children=tuple(_backtrack(pos, vals, N, Q, R, a, b, signs) for a, b in pieces))
    raise AssertionError("backtrack failed to reproduce the DP value")


def _pieces_R(N, Q, R, i, j, k):
    target = R[i, j, k]
    for t in range(i, j):
        if N[i, t] + Q[t + 1, j, k - 1] >= target:
            return [(i, t)] + _pieces_Q(N, Q, R, t + 1, j, k - 1)
    raise AssertionError("backtrack failed")


def _pieces_Q(N, Q, R, i, j, k):
    if k == 1 or N[i, j] >= Q[i, j, k]:
        return [(i, j)]
    return _pieces_R(N, Q, R, i, j, k)


def _compress(x):
    """Return ``(positions, |values|, signs, exact)`` of the support of ``x``."""
    if isinstance(x, CoeffVector):
        items = list(x.entries.items())
        pos = [j for j, _ in items]
        if x.mode == EXACT:
            return pos, [abs(v) for _, v in items], [1 if v > 0 else -1 for _, v in items], True
        return (np.array(pos, dtype=int), np.array([abs(float(v)) for _, v in items]),
                [1 if v > 0 else -1 for _, v in items], False)
    arr = as_dense(x)
    idx = np.nonzero(arr)[0]
    return idx + 1, np.abs(arr[idx]), [1 if v > 0 else -1 for v in arr[idx]], False


def norm_T(x):
    """Tsirelson norm of a finitely supported vector.

    Exact-mode ``CoeffVector`` input gives a ``Fraction``; anything else is
    evaluated in float64.
    """
    pos, vals, _, exact = _compress(x)
    if len(pos) == 0:
        return Fraction(0) if exact else 0.0
    if exact:
        return _exact_dp(pos, vals)[0][-1]
    N, _, _ = _float_dp(np.asarray(pos), np.asarray(vals, dtype=float))
    return float(N[0, -1])


def norming_functional_for(x) -> NormingFunctional | None:
    """A norming functional ``f`` with ``f(x) = ||x||_T`` (float DP)."""
    pos, vals, signs, _ = _compress(x)
    if len(pos) == 0:
        return None
    pos = np.asarray(pos)
    vals = np.asarray(vals, dtype=float)
    N, Q, R = _float_dp(pos, vals)
    return _backtrack(pos, vals, N, Q, R, 0, len(pos) - 1, signs)


def norm_T_with_functional(t: np.ndarray) -> tuple[float, np.ndarray]:
    """Float norm of a dense vector plus the dense coefficients of a norming functional."""
    t = np.asarray(t, dtype=float)
    f = norming_functional_for(t)
    row = np.zeros(t.size)
    if f is None:
        return 0.0, row
    for j, v in f.coefficients.items():
        row[j - 1] = abs(float(v))
    return float(row @ np.abs(t)), row


def _check_p(p):
    if p < 1:
        raise ValueError(f"p-convexification needs p >= 1, got {p}")


def norm_Tp(x, p=2):
    """Norm of the ``p``-convexification: ``||x||_{T^p} = || |x|^p ||_T^{1/p}``.

    Exact input with ``p = 2`` squares exactly and takes one float root at the
    end; ``p = 1`` stays exact.
    """
    _check_p(p)
    if isinstance(x, CoeffVector) and x.mode == EXACT and p in (1, 2):
        if p == 1:
            return norm_T(x.abs())
        sq = CoeffVector({j: v * v for j, v in x.entries.items()}, EXACT)
        return float(norm_T(sq)) ** 0.5
    arr = np.abs(as_dense(x))
    return norm_T(arr ** p) ** (1.0 / p)


def norm_T2_squared_exact(x: CoeffVector) -> Fraction:
    """``||x||_{T^2}^2`` as an exact rational (``x`` in exact mode)."""
    return norm_T(CoeffVector({j: v * v for j, v in x.entries.items()}, EXACT))


# ---------------------------------------------------------------------------
# norming set


@lru_cache(maxsize=None)
def _nonneg_norming(n: int):
    """Nonnegative norming functionals on ``1..n`` keyed by integer numerators.

    Numerators are scaled by ``2**n``; the value is one representative tree.
    Half-sums with a single child are omitted: they are dominated and would
    make the set infinite.
    """
    scale = 2 ** n

    def unit(a):
        row = [0] * n
        row[a - 1] = scale
        return tuple(row)

    def maxsupp(row):
        return max(i for i, v in enumerate(row) if v) + 1

    by_min: dict[int, dict[tuple, NormingFunctional]] = {}
    chain_memo: dict[tuple[int, int], dict[tuple, tuple]] = {}

    def chains(p, r):
        # sums of 1..r functionals with successive supports, all after p
        key = (p, r)
        if key in chain_memo:
            return chain_memo[key]
        out: dict[tuple, tuple] = {}
        for b in range(p + 1, n + 1):
            for row, tree in by_min[b].items():
                out.setdefault(row, (tree,))
                if r > 1:
                    for crow, ctrees in chains(maxsupp(row), r - 1).items():
                        s = tuple(u + v for u, v in zip(row, crow))
                        out.setdefault(s, (tree,) + ctrees)
        chain_memo[key] = out
        return out

    for a in range(n, 0, -1):
        level = {unit(a): NormingFunctional.unit(a)}
        frontier = dict(level)
        while a >= 2 and frontier:
            fresh = {}
            for row, tree in frontier.items():
                for crow, ctrees in chains(maxsupp(row), a - 1).items():
                    s = tuple(u + v for u, v in zip(row, crow))
                    if any(v % 2 for v in s):
                        raise AssertionError("numerator scale too small")
                    g = tuple(v // 2 for v in s)
                    if g not in level and g not in fresh:
                        fresh[g] = NormingFunctional("half", children=(tree,) + ctrees)
            level.update(fresh)
            frontier = fresh
        by_min[a] = level
    out = {}
    for a in range(1, n + 1):
        out.update(by_min[a])
    return out, scale


def enumerate_norming_set(n: int, cap: int = DEFAULT_CAP, signed: bool = True) -> list[NormingFunctional]:
    """All norming functionals supported in ``1..n``, deduplicated by coefficients.

    With ``signed=False`` only the nonnegative ones are returned; the full set
    is their orbit under coordinate sign changes.
    """
    if n > cap:
        raise CapExceeded(f"n={n} exceeds the norming-set cap {cap}")
    if n < 1:
        return []
    table, _ = _nonneg_norming(n)
    trees = list(table.values())
    if not signed:
        return trees
    out = []
    for tree in trees:
        supp = tree.support
        for signs in product((1, -1), repeat=len(supp)):
            out.append(tree.with_signs(dict(zip(supp, signs))))
    return out


def norming_matrix(n: int, cap: int = DEFAULT_CAP, signed: bool = False, maximal: bool = False):
    """Integer numerator matrix of the norming set and its common denominator."""
    if n > cap:
        raise CapExceeded(f"n={n} exceeds the norming-set cap {cap}")
    table, scale = _nonneg_norming(n)
    rows = np.array(sorted(table), dtype=np.int64).reshape(-1, n)
    if maximal:
        rows = _maximal_rows(rows)
    if signed:
        expanded = []
        for row in rows:
            nz = np.nonzero(row)[0]
            for signs in product((1, -1), repeat=len(nz)):
                r = row.copy()
                r[nz] *= np.array(signs, dtype=np.int64)
                expanded.append(r)
        rows = np.array(expanded, dtype=np.int64)
    return rows, scale


def _maximal_rows(rows: np.ndarray) -> np.ndarray:
    """Drop rows dominated coordinatewise by another row."""
    rows = np.unique(rows, axis=0)
    keep = np.ones(len(rows), dtype=bool)
    for start in range(0, len(rows), 256):
        block = rows[start:start + 256]
        ge = np.all(rows[None, :, :] >= block[:, None, :], axis=2)
        # after np.unique, >= with a different row means strict domination
        ge[np.arange(len(block)), np.arange(start, start + len(block))] = False
        keep[start:start + 256] = ~ge.any(axis=1)
    return rows[keep]


@lru_cache(maxsize=None)
def _maximal_matrix(n: int):
    rows, scale = norming_matrix(n, cap=n)
    return _maximal_rows(rows), scale


@lru_cache(maxsize=4096)
def restricted_facets(n: int, support: tuple[int, ...], cap: int = DEFAULT_CAP) -> np.ndarray:
    """Float rows ``f|_support`` of the maximal nonnegative functionals.

    These describe the positive part of the ``T`` unit ball for vectors
    supported on ``support`` (1-based indices within ``1..n``).
    """
    if n > cap:
        raise CapExceeded(f"n={n} exceeds the norming-set cap {cap}")
    rows, scale = _maximal_matrix(n)
    sub = rows[:, [j - 1 for j in support]]
    sub = sub[sub.any(axis=1)]
    return _maximal_rows(sub).astype(float) / scale


# ---------------------------------------------------------------------------
# dual norms


def dual_norm_T(y, cap: int = DEFAULT_CAP) -> float:
    """Dual Tsirelson norm by linear programming over the norming set.

    ``min sum(lam)`` subject to ``sum(lam_i f_i) >= |y|``, ``lam >= 0`` with
    ``f_i`` the nonnegative norming functionals; this equals the minimal
    ``l_1`` representation cost over the signed set because the dual norm is
    a lattice norm.
    """
    c = np.abs(as_dense(y))
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return 0.0
    n = int(nz[-1]) + 1
    if n > cap:
        raise CapExceeded(f"support reaches {n}, beyond the norming-set cap {cap}")
    F = restricted_facets(n, tuple(int(j) + 1 for j in nz), cap)
    res = linprog(np.ones(F.shape[0]), A_ub=-F.T, b_ub=-c[nz], bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError(f"LP failed: {res.message}")
    return float(res.fun)


@dataclass
class DualCertificate:
    """Two-sided certificate for ``sup { sum c_j t_j^{1/p} : ||t||_T <= 1 }``."""

    value: float
    lower: float
    upper: float
    t: np.ndarray
    rounds: int

    @property
    def residual(self) -> float:
        return self.upper - self.lower


def dual_Tp_certificate(y, p=2, cap: int | None = DEFAULT_CAP, tol: float = 1e-9) -> DualCertificate:
    """Solve the concave program behind ``||y||_{(T^p)^*}`` with bounds.

    Within the enumeration cap the full facet list is used; above it (when
    ``cap`` is ``None`` or large) facets are generated on demand from the
    DP's norming functionals.
    """
    _check_p(p)
    c = np.abs(as_dense(y))
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return DualCertificate(0.0, 0.0, 0.0, np.zeros_like(c), 0)
    n = int(nz[-1]) + 1
    support = tuple(int(j) + 1 for j in nz)
    if cap is not None and n > cap:
        raise CapExceeded(f"support reaches {n}, beyond the cap {cap}")
    facets = restricted_facets(n, support) if n <= DEFAULT_CAP else None
    if p == 1:
        sol = _polytope.linear_over_T_ball(c[nz], support, facets=facets)
    else:
        sol = _polytope.maximize_over_T_ball(c[nz], support, "power", p=p, facets=facets, tol=tol)
    t = np.zeros(c.size)
    t[nz] = sol.t
    if sol.upper - sol.lower > max(tol, tol * abs(sol.upper)):
        raise SolverError("dual norm not certified", iterate=t, residual=sol.upper - sol.lower)
    return DualCertificate(0.5 * (sol.lower + sol.upper), sol.lower, sol.upper, t, sol.rounds)


def dual_norm_Tp(y, p=2, cap: int | None = DEFAULT_CAP, tol: float = 1e-9) -> float:
    """``||y||_{(T^p)^*} = max sum |y_j| t_j^{1/p}`` over the positive ``T`` ball."""
    return dual_Tp_certificate(y, p, cap=cap, tol=tol).value
