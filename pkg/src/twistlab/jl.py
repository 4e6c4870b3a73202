"""Head/tail splitting of point clouds in twisted sums and random compression.

For points ``x_1, ..., x_n`` in the section ``[v_1..v_M]`` let ``E`` be the
span of the differences.  With ``h = [ln n]`` the split is

    E2 = E ∩ [v_k : k > h],     E1 = the orthogonal complement of E2 in E,

so ``dim E1 <= h``.  The compression keeps ``E1`` coordinates as they are and
sends ``E2`` through a seeded Gaussian matrix with variance ``1 / k``.
Distances in the source are quasi-norms, in the target Euclidean norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .centralizer import ZERO, CentralizerSpec
from .twisted import TwistedVector, intersect_tail, orth, quasi_norm_arrays

DEFAULT_C = 4.0


def _gaussian(seed: int, k: int, M: int) -> np.ndarray:
    # own stream: a cloud drawn with the same seed must not reappear in G
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    return rng.normal(size=(k, M)) / math.sqrt(k)


@dataclass
class PointCloud:
    """Points of ``[v_1..v_M]`` stored as rows of ``v``-coefficients."""

    coords: np.ndarray
    M: int

    def __post_init__(self):
        self.coords = np.atleast_2d(np.asarray(self.coords, dtype=float))
        if self.coords.shape[0] < 2:
            raise ValueError("a point cloud needs at least two points")
        if self.coords.shape[1] > self.M and np.any(self.coords[:, self.M:]):
            raise ValueError(f"points leave the section [v_1..v_{self.M}]")
        self.coords = self.coords[:, :self.M]
        if self.coords.shape[1] < self.M:
            self.coords = np.pad(self.coords, ((0, 0), (0, self.M - self.coords.shape[1])))

    @classmethod
    def from_vectors(cls, points, M: int | None = None) -> "PointCloud":
        points = list(points)
        if M is None:
            M = 2 * max(p.length for p in points)
        return cls(np.array([p.coefficients(M) for p in points]), M)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def points(self) -> list[TwistedVector]:
        return [TwistedVector.from_coefficients(c) for c in self.coords]

    def differences(self) -> np.ndarray:
        """Rows ``x_i - x_j`` for ``i < j``."""
        i, j = np.triu_indices(self.n, 1)
        return self.coords[i] - self.coords[j]


def random_cloud(n: int, M: int, seed: int = 0, y_part: bool = True) -> PointCloud:
    """``n`` Gaussian points of ``[v_1..v_M]``; ``y_part=False`` keeps ``y = 0``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    c = rng.normal(size=(n, M))
    if not y_part:
        c[:, 1::2] = 0.0
    return PointCloud(c, M)


def qn_coeffs(a: np.ndarray, omega: CentralizerSpec) -> float:
    """Quasi-norm of ``sum a_k v_k``."""
    x, y = a[0::2], a[1::2]
    y = np.concatenate([y, np.zeros(x.size - y.size)])
    return quasi_norm_arrays(x, y, omega)


@dataclass
class SplitResult:
    head_dim: int
    E1: np.ndarray          # orthonormal columns over v_1..v_M
    E2: np.ndarray
    distortion_E2: float
    rank_E: int

    @property
    def E1_basis(self) -> list[TwistedVector]:
        return [TwistedVector.from_coefficients(c) for c in self.E1.T]

    @property
    def E2_basis(self) -> list[TwistedVector]:
        return [TwistedVector.from_coefficients(c) for c in self.E2.T]

    def to_json(self) -> dict:
        return {"headDim": self.head_dim, "dimE1": self.E1.shape[1], "dimE2": self.E2.shape[1],
                "rankE": self.rank_E, "distortionE2": self.distortion_E2, "logBase": "e"}


def coordinate_distortion(basis: np.ndarray, omega: CentralizerSpec, samples: int = 200,
                          seed: int = 0) -> float:
    """Empirical ``max / min`` of ``||z|| / ||z||_2`` over ``z`` in the column span.

    Samples random unit combinations plus the basis vectors themselves; 1 on
    the zero subspace.
    """
    d = basis.shape[1]
    if d == 0:
        return 1.0
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    coeffs = np.vstack([np.eye(d), rng.normal(size=(samples, d))])
    ratios = []
    for c in coeffs:
        z = basis @ c
        ratios.append(qn_coeffs(z, omega) / np.linalg.norm(z))
    return float(max(ratios) / min(ratios))


def log_split(cloud: PointCloud, omega: CentralizerSpec = ZERO, samples: int = 200,
              seed: int = 0) -> SplitResult:
    """Split ``E = span(x_i - x_j)`` along the head ``[v_1..v_h]``, ``h = [ln n]``."""
    D = cloud.differences().T
    Q = orth(D)
    if Q.shape[1] == 0:
        raise ValueError("degenerate cloud: all points coincide")
    head = min(int(math.floor(math.log(cloud.n))), cloud.M)
    E2 = intersect_tail(Q, head)
    # complement of E2 inside E
    E1 = orth(Q - E2 @ (E2.T @ Q)) if E2.shape[1] else Q
    if E1.shape[1] + E2.shape[1] != Q.shape[1]:
        raise RuntimeError("E1 + E2 does not recover E within tolerance")
    return SplitResult(head, E1, E2, coordinate_distortion(E2, omega, samples, seed), Q.shape[1])


def floor_dim(n: int, head_dim: int, c: float = DEFAULT_C) -> int:
    """Least admissible target dimension ``head_dim + ceil(c ln n)``."""
    return head_dim + int(math.ceil(c * math.log(n)))


@dataclass
class Compression:
    """The linear map ``z -> (E1^T z, G P_E2 z)`` and its measured distortion.

    ``G`` is ``k x M``; on ``E2`` it acts as a ``k x dim E2`` Gaussian by
    rotation invariance.
    """

    target_dim: int
    E1: np.ndarray
    E2: np.ndarray
    G: np.ndarray
    distortion: float
    expansion: float
    contraction: float
    seed: int = field(default=0)

    def apply(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.concatenate([self.E1.T @ z, self.G @ (self.E2 @ (self.E2.T @ z))])

    def to_json(self) -> dict:
        return {"targetDim": self.target_dim, "dimE1": self.E1.shape[1], "k": self.G.shape[0],
                "distortion": self.distortion, "seed": self.seed}


def _pair_distortion(images: np.ndarray, sources: np.ndarray) -> tuple[float, float, float]:
    r = np.linalg.norm(images, axis=1) / sources
    return float(r.max() / r.min()), float(r.max()), float(r.min())


def jl_compress(cloud: PointCloud, split: SplitResult, target_dim: int, seed: int = 0,
                omega: CentralizerSpec = ZERO, c: float = DEFAULT_C) -> Compression:
    """Compress to ``target_dim`` coordinates; distortion is ``max / min`` over pairs.

    The ratio for a pair is ``||L(x_i) - L(x_j)||_2 / ||x_i - x_j||`` with the
    quasi-norm of ``omega`` in the source.
    """
    floor = floor_dim(cloud.n, split.head_dim, c)
    if target_dim < floor:
        raise ValueError(f"targetDim {target_dim} is below the floor {floor} "
                         f"(headDim {split.head_dim} + ceil({c:g} ln {cloud.n}))")
    k = target_dim - split.E1.shape[1]
    # drawn in full coordinates so the coordinate oracle can reuse it
    G = _gaussian(seed, k, cloud.M)
    D = cloud.differences()
    P2 = split.E2 @ split.E2.T
    images = np.hstack([D @ split.E1, D @ P2 @ G.T])
    src = np.array([qn_coeffs(d, omega) for d in D])
    dist, hi, lo = _pair_distortion(images, src)
    return Compression(target_dim, split.E1, split.E2, G, dist, hi, lo, seed)


def gaussian_oracle(cloud: PointCloud, target_dim: int, seed: int = 0) -> float:
    """The same compression written directly on coordinates, for ``Omega = 0``.

    Keeps the used head coordinates and projects the used tail coordinates
    with the Gaussian rows :func:`jl_compress` draws for ``seed``.  Valid when
    the differences span every coordinate they use, so that ``E1`` and
    ``E2`` are coordinate subspaces; source distances are Euclidean.
    """
    D = cloud.differences()
    cols = np.nonzero(np.any(D != 0, axis=0))[0]
    if np.linalg.matrix_rank(D[:, cols]) != cols.size:
        raise ValueError("the oracle needs differences spanning all used coordinates")
    h = int(math.floor(math.log(cloud.n)))
    head, tail = cols[cols < h], cols[cols >= h]
    k = target_dim - head.size
    G = _gaussian(seed, k, cloud.M)
    images = np.hstack([D[:, head], D[:, tail] @ G[:, tail].T])
    return _pair_distortion(images, np.linalg.norm(D, axis=1))[0]


def plain_projection(cloud: PointCloud, target_dim: int, seed: int = 0) -> float:
    """Distortion of classical JL: one Gaussian map on all coordinates."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    G = rng.normal(size=(target_dim, cloud.M)) / math.sqrt(target_dim)
    D = cloud.differences()
    return _pair_distortion(D @ G.T, np.linalg.norm(D, axis=1))[0]


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    return float(stats.ks_2samp(a, b, method="asymp").statistic)
