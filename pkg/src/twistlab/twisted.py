"""Twisted sums ``Z`` built from a centralizer: vectors, quasi-norm, duality.

An element is a pair ``(x, y)`` with quasi-norm

    ||(x, y)|| = ||x - Omega(y)||_2 + ||y||_2.

The basis is ``v_{2j-1} = (e_j, 0)`` and ``v_{2j} = (0, e_j)``; a coefficient
vector ``a`` over this basis (``a[k-1]`` multiplies ``v_k``) therefore has
``x = a[0::2]`` and ``y = a[1::2]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coeff import FLOAT, CoeffVector, as_dense
from .centralizer import CentralizerSpec, ZERO

SVD_TOL = 1e-10


@dataclass(frozen=True)
class TwistedVector:
    """The pair ``(x, y)``; both parts are float ``CoeffVector``."""

    x: CoeffVector = field(default_factory=lambda: CoeffVector({}, FLOAT))
    y: CoeffVector = field(default_factory=lambda: CoeffVector({}, FLOAT))

    @classmethod
    def from_arrays(cls, x, y) -> "TwistedVector":
        return cls(CoeffVector.from_dense(as_dense(x), FLOAT), CoeffVector.from_dense(as_dense(y), FLOAT))

    @classmethod
    def basis(cls, k: int) -> "TwistedVector":
        """``v_k``: ``(e_j, 0)`` for ``k = 2j - 1`` and ``(0, e_j)`` for ``k = 2j``."""
        if k < 1:
            raise ValueError("basis vectors are indexed from 1")
        j = (k + 1) // 2
        e = CoeffVector.unit(j, FLOAT)
        return cls(e, CoeffVector({}, FLOAT)) if k % 2 else cls(CoeffVector({}, FLOAT), e)

    @classmethod
    def from_coefficients(cls, a) -> "TwistedVector":
        """``sum_k a[k-1] v_k``."""
        a = as_dense(a)
        return cls.from_arrays(a[0::2], a[1::2])

    @property
    def length(self) -> int:
        """Number of ``e``-coordinates needed to hold both parts."""
        return max(self.x.max_index, self.y.max_index)

    def arrays(self, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        n = self.length if n is None else n
        return self.x.dense(n), self.y.dense(n)

    def coefficients(self, N: int | None = None) -> np.ndarray:
        """Coordinates over ``v_1, ..., v_N`` (default ``N = 2 * length``)."""
        n = self.length if N is None else (N + 1) // 2
        x, y = self.arrays(n)
        a = np.zeros(2 * n)
        a[0::2], a[1::2] = x, y
        return a if N is None else a[:N]

    @property
    def basis_support(self) -> list[int]:
        """Indices ``k`` with nonzero coefficient on ``v_k``."""
        return sorted([2 * j - 1 for j in self.x.support] + [2 * j for j in self.y.support])

    def __add__(self, other: "TwistedVector") -> "TwistedVector":
        return TwistedVector(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "TwistedVector") -> "TwistedVector":
        return TwistedVector(self.x - other.x, self.y - other.y)

    def scale(self, c: float) -> "TwistedVector":
        return TwistedVector(self.x.scale(c), self.y.scale(c))

    def to_json(self) -> dict:
        return {"x": self.x.to_json(), "y": self.y.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "TwistedVector":
        return cls(CoeffVector.from_json(data.get("x", {}), FLOAT), CoeffVector.from_json(data.get("y", {}), FLOAT))


@dataclass(frozen=True)
class SectionSpec:
    """The span of ``v_1, ..., v_N`` under a centralizer."""

    N: int
    omega: CentralizerSpec = ZERO

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("a section needs N >= 0")

    def contains(self, v: TwistedVector) -> bool:
        return all(k <= self.N for k in v.basis_support)


def _parts(v) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(v, TwistedVector):
        return v.arrays()
    x, y = v
    x, y = as_dense(x), as_dense(y)
    n = max(x.size, y.size)
    return as_dense(x, n), as_dense(y, n)


def quasi_norm_arrays(x: np.ndarray, y: np.ndarray, omega: CentralizerSpec) -> float:
    """``||x - Omega(y)||_2 + ||y||_2`` on dense arrays of equal length."""
    return float(np.linalg.norm(x - omega(y)) + np.linalg.norm(y))


def quasi_norm(v, omega: CentralizerSpec = ZERO) -> float:
    """``||x - Omega(y)||_2 + ||y||_2`` for a ``TwistedVector`` or an ``(x, y)`` pair."""
    x, y = _parts(v)
    return quasi_norm_arrays(x, y, omega)


def duality_pairing(v, w) -> float:
    """``<v.x, w.y> + <v.y, w.x>``."""
    x, y = _parts(v)
    u, vv = _parts(w)
    n = max(x.size, u.size)
    x, y, u, vv = (as_dense(a, n) for a in (x, y, u, vv))
    return float(x @ vv + y @ u)


# ---------------------------------------------------------------------------
# duality bounds


@dataclass
class DualityReport:
    """Outcome of the sampled upper check.

    ``max_ratio`` is the largest ``|<v, w>| / (||v||_Omega ||w||_{-Omega})``;
    ``bound`` is ``max(1, 8 Delta_hat) (1 + slack)``.  ``max_skew`` is the
    largest ``|<Omega y, v> - <y, Omega v>| / (||y|| ||v||)``, the quantity the
    bound controls by ``8 Delta``.
    """

    max_ratio: float
    bound: float
    max_skew: float
    samples: int
    delta_hat: float
    slack: float
    worst: tuple | None = None

    @property
    def violated(self) -> bool:
        return self.max_ratio > self.bound

    @property
    def message(self) -> str:
        if self.violated:
            return (f"ratio {self.max_ratio:.6g} exceeds {self.bound:.6g}: "
                    "the Delta estimate is too small for this centralizer")
        return f"ratio {self.max_ratio:.6g} within {self.bound:.6g}"

    def to_json(self) -> dict:
        return {"maxRatio": self.max_ratio, "bound": self.bound, "maxSkew": self.max_skew,
                "samples": self.samples, "deltaHat": self.delta_hat, "slack": self.slack,
                "violated": self.violated, "message": self.message}


def _sample_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    kind = rng.integers(3)
    if kind == 0:
        return rng.normal(size=dim)
    if kind == 1:
        return rng.uniform(0.05, 1.0) ** np.arange(dim) * rng.choice([-1.0, 1.0], size=dim)
    z = rng.normal(size=dim) * (rng.random(dim) < 0.5)
    if not z.any():
        z[rng.integers(dim)] = 1.0
    return z


def duality_upper_check(omega: CentralizerSpec, dim: int, samples: int, delta_hat: float,
                        seed: int = 0, slack: float = 0.05) -> DualityReport:
    """Sample pairs ``v = (x, y)`` in ``Z_Omega``, ``w = (u, v')`` in ``Z_{-Omega}``.

    A third of the pairs are witness-shaped (``u = -Omega(v') + c y``), and
    a third of the ``v`` have ``x = Omega(y) + r``; these are the pairs that
    make the pairing large.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    neg = omega.negated()
    best_ratio, best_skew, worst = 0.0, 0.0, None
    for _ in range(samples):
        x, y = _sample_vector(rng, dim), _sample_vector(rng, dim)
        if rng.random() < 1 / 3:
            x = omega(y) + rng.uniform(0.0, 1.0) * x * np.linalg.norm(y) / np.linalg.norm(x)
        vv = _sample_vector(rng, dim)
        if rng.random() < 1 / 3:
            u = -omega(vv) + rng.uniform(0.5, 3.0) * y / np.linalg.norm(y)
        else:
            u = _sample_vector(rng, dim)
        pair = abs(float(x @ vv + y @ u))
        denom = quasi_norm_arrays(x, y, omega) * quasi_norm_arrays(u, vv, neg)
        ratio = pair / denom
        skew = abs(float(omega(y) @ vv - y @ omega(vv))) / (np.linalg.norm(y) * np.linalg.norm(vv))
        best_skew = max(best_skew, skew)
        if ratio > best_ratio:
            best_ratio, worst = ratio, (x, y, u, vv)
    bound = max(1.0, 8.0 * delta_hat) * (1.0 + slack)
    return DualityReport(best_ratio, bound, best_skew, samples, delta_hat, slack, worst)


@dataclass
class Witness:
    w: TwistedVector
    pairing: float
    norm_v: float
    norm_w: float

    @property
    def certified(self) -> bool:
        """``<v, w> >= ||v||`` (up to rounding)."""
        return self.pairing >= self.norm_v - 1e-9


def duality_witness(v, omega: CentralizerSpec, delta_hat: float) -> tuple[TwistedVector, float, Witness]:
    """Build ``w = (-Omega(v') + (8 Delta_hat + 1) y / ||y||, v')`` in ``Z_{-Omega}``.

    ``v'`` is the unit vector along ``x - Omega(y)`` (along ``y`` when that
    difference vanishes).  Returns ``(w, pairing, details)``; ``||w||`` in the
    ``-Omega`` quasi-norm equals ``8 Delta_hat + 2``.
    """
    x, y = _parts(v)
    ny = np.linalg.norm(y)
    if ny == 0:
        raise ValueError("witness construction needs y != 0")
    r = x - omega(y)
    nr = np.linalg.norm(r)
    vt = r / nr if nr > 0 else y / ny
    u = -omega(vt) + (8.0 * delta_hat + 1.0) * y / ny
    w = TwistedVector.from_arrays(u, vt)
    pairing = float(x @ vt + y @ u)
    details = Witness(w, pairing, quasi_norm_arrays(x, y, omega),
                      quasi_norm_arrays(u, vt, omega.negated()))
    return w, pairing, details


# ---------------------------------------------------------------------------
# subspaces of finite sections


def iterated_log(n: float, m: int) -> float:
    """``log_m(n)``: the natural log applied ``m`` times (``-inf`` once undefined)."""
    v = float(n)
    for _ in range(m):
        if v <= 0:
            return -math.inf
        v = math.log(v)
    return v


def int_log(n: float, m: int) -> int:
    """``[log_m(n)]``, the integer part (``-1`` when ``log_m(n) < 0`` or undefined)."""
    v = iterated_log(n, m)
    return int(math.floor(v)) if v >= 0 else -1


def threshold_n0(m: int) -> int:
    """Least ``n`` with ``[log_m(n)] - 1 >= 1``; below it the trivial regime applies."""
    # exp iterated m times on 2 is the exact threshold of log_m(n) >= 2
    v = 2.0
    for _ in range(m):
        v = math.exp(v)
    n = max(1, int(math.floor(v)) - 1)
    while int_log(n, m) < 2:
        n += 1
    return n


def subspace_matrix(vectors, N: int | None = None) -> np.ndarray:
    """Columns are the ``v``-basis coordinates of ``vectors``."""
    vectors = list(vectors)
    if N is None:
        N = 2 * max((v.length for v in vectors), default=0)
    return np.column_stack([v.coefficients(N) for v in vectors]) if vectors else np.zeros((N, 0))


def orth(B: np.ndarray, tol: float = SVD_TOL) -> np.ndarray:
    """Orthonormal basis of the column space (rank by relative singular values)."""
    if B.size == 0:
        return np.zeros((B.shape[0], 0))
    U, s, _ = np.linalg.svd(B, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return U[:, :rank]


def null_space(A: np.ndarray, tol: float = SVD_TOL) -> np.ndarray:
    n = A.shape[1]
    if A.shape[0] == 0 or n == 0:
        return np.eye(n)
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return Vt[rank:].T


def rank(B: np.ndarray, tol: float = SVD_TOL) -> int:
    return orth(B, tol).shape[1]


def intersect_tail(B: np.ndarray, head: int) -> np.ndarray:
    """Orthonormal basis of ``span(B) ∩ [v_k : k > head]``."""
    Q = orth(B)
    if Q.shape[1] == 0:
        return Q
    K = null_space(Q[:head])
    return orth(Q @ K)


@dataclass
class FmResult:
    """The enlargement ``F = [v_1..v_head] + P_tail(E)`` of a subspace ``E``.

    ``basis`` holds orthonormal columns over ``v_1..v_N``.  ``E2`` is
    ``E ∩ [v_k : k > head]``.  In the small-``n`` regime ``F = E``.
    """

    n: int
    m: int
    log_m: float
    head: int
    john_regime: bool
    basis: np.ndarray
    E2: np.ndarray
    section: SectionSpec

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def dim_E2(self) -> int:
        return self.E2.shape[1]

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "logM": self.log_m, "head": self.head,
                "johnRegime": self.john_regime, "dimF": self.dim, "dimE2": self.dim_E2}


def build_F_m(E_basis, m: int, omega: CentralizerSpec = ZERO, N: int | None = None) -> FmResult:
    """Enlarge ``E`` to a subspace ``F`` with ``dim F <= n + log_m(n)``.

    With ``L = [log_m(n)]`` the head is ``L`` when ``L`` is even and ``L - 1``
    otherwise, so it holds whole pairs ``(v_{2j-1}, v_{2j})``.  ``F`` is the
    head section plus the tail projection of ``E``, which contains ``E`` and
    has dimension at most ``head + n``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    B = subspace_matrix(E_basis, N)
    Nrows = B.shape[0]
    Q = orth(B)
    n = Q.shape[1]
    if n == 0:
        raise ValueError("E must be nonzero")
    lm = iterated_log(n, m)
    if n < threshold_n0(m):
        return FmResult(n, m, lm, 0, True, Q, Q.copy(), SectionSpec(0, omega))
    L = int_log(n, m)
    head = L if L % 2 == 0 else L - 1
    head = min(head, Nrows)
    tail = Q.copy()
    tail[:head] = 0.0
    tail_part = orth(tail)
    H = np.eye(Nrows)[:, :head]
    F = orth(np.hstack([H, tail_part]))
    return FmResult(n, m, lm, head, False, F, intersect_tail(Q, head), SectionSpec(head, omega))


def contains(F: np.ndarray, B: np.ndarray, tol: float = 1e-9) -> bool:
    """Whether the column space of ``B`` lies in that of the orthonormal ``F``."""
    if B.size == 0:
        return True
    resid = B - F @ (F.T @ B)
    return bool(np.linalg.norm(resid) <= tol * max(1.0, np.linalg.norm(B)))
