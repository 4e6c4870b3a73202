"""Centralizers on sequence spaces and the estimator for their constant.

A centralizer is a homogeneous map ``Omega`` with

    ||Omega(a x) - a Omega(x)||_2 <= C ||a||_inf ||x||_2,

and ``Delta(Omega)`` is the least such ``C``.  Three families are provided:

* Kalton-Peck maps ``y_j phi(log(||y||_2 / |y_j|))`` for Lipschitz ``phi``;
* the explicit selection for the ``T^p`` couple, ``(2/q - 2/p) x log|x|``;
* maps derived from a Lozanovskii factorization ``|x| = sqrt(w0 w1)`` of a
  couple of lattice norms, ``Omega(x) = x log(w1 / w0)``.

All maps act on the support of ``x`` only, and work on dense float arrays
(coordinate ``j`` at position ``j - 1``) or on ``CoeffVector`` input.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .coeff import FLOAT, CoeffVector, as_dense
from . import _polytope
from .tsirelson import (
    DEFAULT_CAP,
    SolverError,
    dual_Tp_certificate,
    norm_T,
    norm_T_with_functional,
    norm_Tp,
    restricted_facets,
)


# ---------------------------------------------------------------------------
# phi descriptors


@dataclass(frozen=True)
class PhiSpec:
    """A Lipschitz ``phi`` on ``[0, inf)`` with ``phi(0) = 0``.

    ``kind`` is one of ``identity``, ``min`` (``min(t, c)``), ``power``
    (``t**alpha``, ``0 < alpha <= 1``) or ``table`` (piecewise linear through
    ``knots``, starting at ``(0, 0)``, extended with the last slope).  The
    result is multiplied by ``scale``.
    """

    kind: str = "identity"
    param: float | None = None
    knots: tuple[tuple[float, float], ...] = ()
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("identity", "min", "power", "table"):
            raise ValueError(f"unknown phi kind {self.kind!r}")
        if self.kind == "min" and (self.param is None or self.param < 0):
            raise ValueError("min(t, c) needs c >= 0")
        if self.kind == "power" and (self.param is None or not 0 < self.param <= 1):
            raise ValueError("t**alpha needs 0 < alpha <= 1")
        if self.kind == "table":
            ts = [k[0] for k in self.knots]
            if len(ts) < 2 or ts[0] != 0 or self.knots[0][1] != 0:
                raise ValueError("table needs at least two knots starting at (0, 0)")
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("table knots must be strictly increasing")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "identity":
            out = t
        elif self.kind == "min":
            out = np.minimum(t, self.param)
        elif self.kind == "power":
            out = t ** self.param
        else:
            xs = np.array([k[0] for k in self.knots])
            ys = np.array([k[1] for k in self.knots])
            out = np.interp(t, xs, ys)
            slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            out = np.where(t > xs[-1], ys[-1] + slope * (t - xs[-1]), out)
        return self.scale * out

    @property
    def lipschitz(self) -> float:
        if self.kind in ("identity", "min"):
            return abs(self.scale)
        if self.kind == "power":
            return np.inf if self.param < 1 else abs(self.scale)
        xs = np.array([k[0] for k in self.knots])
        ys = np.array([k[1] for k in self.knots])
        return float(np.max(np.abs(np.diff(ys) / np.diff(xs)))) * abs(self.scale)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "scale": self.scale}
        if self.param is not None:
            out["param"] = self.param
        if self.knots:
            out["knots"] = [list(k) for k in self.knots]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PhiSpec":
        return cls(data.get("kind", "identity"), data.get("param"),
                   tuple(tuple(k) for k in data.get("knots", ())), data.get("scale", 1.0))


IDENTITY = PhiSpec()


# ---------------------------------------------------------------------------
# explicit formulas


def _dense_in(x):
    return as_dense(x), isinstance(x, CoeffVector)


def _dense_out(values, as_coeff):
    return CoeffVector.from_dense(values, FLOAT) if as_coeff else values


def _log_ratio(arr: np.ndarray, nz: np.ndarray) -> np.ndarray:
    """``log(||arr||_2 / |arr_j|)`` on ``nz``, rescaled so tiny inputs do not underflow."""
    s = arr / np.max(np.abs(arr))
    return np.log(np.linalg.norm(s)) - np.log(np.abs(s[nz]))


def kalton_peck_omega(y, phi: PhiSpec = IDENTITY):
    """``sum_j y_j phi(log(||y||_2 / |y_j|)) e_j``; zero coordinates stay zero."""
    arr, as_coeff = _dense_in(y)
    out = np.zeros_like(arr)
    nz = arr != 0
    if nz.any():
        out[nz] = arr[nz] * phi(_log_ratio(arr, nz))
    return _dense_out(out, as_coeff)


def omega_tp_explicit(x, p: float):
    """``(2/q - 2/p) x log(|x| / ||x||_2)``, extended from the sphere by homogeneity."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    arr, as_coeff = _dense_in(x)
    coef = (2.0 - 2.0 / p) - 2.0 / p     # 2/q = 2 - 2/p
    out = np.zeros_like(arr)
    nz = arr != 0
    if coef != 0 and nz.any():
        out[nz] = -coef * arr[nz] * _log_ratio(arr, nz)
    return _dense_out(out, as_coeff)


# ---------------------------------------------------------------------------
# norm oracles for factorization


@dataclass(frozen=True)
class NormOracle:
    """A 1-unconditional lattice norm on nonnegative dense vectors.

    ``grad(w)`` returns a subgradient with respect to ``w``; when absent a
    forward difference is used.
    """

    name: str
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, w) -> float:
        return float(self.value(np.abs(as_dense(w))))

    def subgradient(self, w: np.ndarray) -> np.ndarray:
        if self.grad is not None:
            return np.asarray(self.grad(w), dtype=float)
        base = self.value(w)
        g = np.zeros_like(w)
        for j in range(w.size):
            h = 1e-7 * max(abs(w[j]), 1e-12)
            e = w.copy()
            e[j] += h
            g[j] = (self.value(e) - base) / h
        return g


def lp_oracle(p: float) -> NormOracle:
    """``l_p`` norm, ``1 <= p <= inf``."""
    if p == np.inf:
        def grad(w):
            g = np.zeros_like(w)
            g[int(np.argmax(w))] = 1.0
            return g
        return NormOracle("linf", lambda w: float(np.max(w, initial=0.0)), grad)
    if p == 1:
        return NormOracle("l1", lambda w: float(w.sum()), lambda w: np.ones_like(w))

    def grad(w):
        n = np.linalg.norm(w, p)
        return (w / n) ** (p - 1) if n > 0 else np.zeros_like(w)
    return NormOracle(f"l{p:g}", lambda w: float(np.linalg.norm(w, p)), grad)


def tp_oracle(p: float = 2.0) -> NormOracle:
    """``T^p`` norm via the Tsirelson DP."""
    def value(w):
        return norm_T(w ** p) ** (1.0 / p)

    def grad(w):
        n, row = norm_T_with_functional(w ** p)
        if n <= 0:
            return np.zeros_like(w)
        return n ** (1.0 / p - 1.0) * row * w ** (p - 1)
    return NormOracle(f"T^{p:g}", value, grad)


def tp_dual_oracle(p: float = 2.0, cap: int | None = None) -> NormOracle:
    """``(T^p)^*`` norm; the maximizing ``t^{1/p}`` is a subgradient."""
    @lru_cache(maxsize=8)
    def cert(key):
        return dual_Tp_certificate(np.frombuffer(key, dtype=float), p, cap=cap)

    def value(w):
        return cert(np.ascontiguousarray(w, dtype=float).tobytes()).value

    def grad(w):
        return cert(np.ascontiguousarray(w, dtype=float).tobytes()).t ** (1.0 / p)
    return NormOracle(f"(T^{p:g})*", value, grad)


# ---------------------------------------------------------------------------
# factorization


@dataclass
class FactorizationResult:
    """``|x| = sqrt(w0 w1)`` on the support, with the couple objective.

    ``objective`` bounds ``max(||w0||_0, ||w1||_1)`` from above (it is exact
    for the generic solver); ``lower`` bounds the optimal objective from
    below; ``kkt_residual = objective - lower`` certifies optimality.
    """

    w0: np.ndarray
    w1: np.ndarray
    objective: float
    lower: float
    iterations: int = 0

    @property
    def kkt_residual(self) -> float:
        return self.objective - self.lower

    @property
    def support(self) -> np.ndarray:
        return np.nonzero(self.w0)[0]

    def to_json(self) -> dict:
        return {"w0": CoeffVector.from_dense(self.w0).to_json(),
                "w1": CoeffVector.from_dense(self.w1).to_json(),
                "objective": self.objective, "lower": self.lower,
                "kktResidual": self.kkt_residual}


def lozanovskii_factorize(x, norm0: NormOracle, norm1: NormOracle, max_iter: int = 100_000,
                          tol: float = 1e-10, step0: float = 0.5) -> FactorizationResult:
    """Minimize ``max(||w0||_0, ||x^2 / w0||_1)`` over ``w0 > 0`` on ``supp x``.

    Works in ``u = log w0``.  For lattice norms ``log N(e^u)`` is convex, so

        f(u) = log N0(e^u) + log N1(x^2 e^{-u})

    is convex and invariant under ``u -> u + c``; its minimum is the squared
    optimal objective after balancing ``w0 -> lambda w0``.  Subgradient steps
    of length ``step0 / sqrt(k)``, or Polyak steps when the optimal value is
    known; stops when the best value improves by less than ``tol`` over 100
    iterations.  The lower bound is the best dual
    estimate available: ``||x||_2`` when ``norm1`` is declared the dual of
    ``norm0`` (``sum x^2 = <w0, w1> <= ||w0|| ||w1||_*``), else 0.
    """
    arr = np.abs(as_dense(x))
    nz = np.nonzero(arr)[0]
    if nz.size == 0:
        raise ValueError("cannot factorize the zero vector")
    xs = arr[nz]
    x2 = xs ** 2
    n = arr.size

    def embed(v):
        out = np.zeros(n)
        out[nz] = v
        return out

    def f_and_grad(u):
        w0 = np.exp(u)
        w1 = x2 / w0
        a, b = norm0.value(embed(w0)), norm1.value(embed(w1))
        ga = norm0.subgradient(embed(w0))[nz] * w0 / a
        gb = -norm1.subgradient(embed(w1))[nz] * w1 / b
        return np.log(a) + np.log(b), ga + gb, a, b

    dual = _is_dual_pair(norm0, norm1)
    # for a dual pair the optimum is known: sum x^2 = <w0, w1> <= ||w0|| ||w1||_*
    # with equality attainable, so f_min = log sum x^2
    target = float(np.log(x2.sum())) if dual else None
    u = np.log(xs)
    best = None
    history = []
    converged = False
    k = 0
    for k in range(1, max_iter + 1):
        val, g, a, b = f_and_grad(u)
        if best is None or val < best[0]:
            best = (val, u.copy(), a, b)
        history.append(best[0])
        if k > 100 and history[-101] - best[0] < tol:
            converged = True
            break
        g = g - g.mean()            # the objective is flat along the ones vector
        gn = np.linalg.norm(g)
        if gn < 1e-15 or (target is not None and val - target < tol):
            converged = True
            break
        if target is not None:
            u = u - (val - target) / gn ** 2 * g     # Polyak step
        else:
            u = u - step0 / np.sqrt(k) * g / gn
    if not converged:
        raise SolverError("factorization did not converge", iterate=embed(np.exp(best[1])),
                          residual=history[-101] - best[0])
    _, u, a, b = best
    lam = np.sqrt(b / a)
    w0 = embed(lam * np.exp(u))
    w1 = np.zeros(n)
    w1[nz] = x2 / w0[nz]
    objective = max(norm0.value(w0), norm1.value(w1))
    lower = float(np.linalg.norm(xs)) if dual else 0.0
    return FactorizationResult(w0, w1, objective, lower, k)


def _lp_exponent(name: str) -> float | None:
    if name == "linf":
        return np.inf
    if name.startswith("l"):
        try:
            return float(name[1:])
        except ValueError:
            return None
    return None


def _is_dual_pair(norm0: NormOracle, norm1: NormOracle) -> bool:
    """True when ``norm1`` is known to be the dual norm of ``norm0``."""
    if norm1.name == f"({norm0.name})*":
        return True
    p, q = _lp_exponent(norm0.name), _lp_exponent(norm1.name)
    if p is None or q is None:
        return False
    return bool(np.isclose(1.0 / p + 1.0 / q, 1.0))


def _log_solve(x2: np.ndarray, support: tuple[int, ...]):
    """Maximize ``sum x2_j log t_j`` over the positive ``T`` ball on ``support``.

    Returns the solution and a norm for nonnegative vectors on ``support``.
    """
    dim = support[-1]
    if dim <= DEFAULT_CAP:
        facets = restricted_facets(dim, support)
        sol = _polytope.maximize_over_T_ball(x2, np.array(support), "log", facets=facets)
        return sol, lambda v: float(np.max(facets @ v))
    sol = _polytope.maximize_over_T_ball(x2, np.array(support), "log")

    def norm(v):
        dense = np.zeros(dim)
        dense[np.array(support) - 1] = v
        return float(norm_T(dense))
    return sol, norm


def factorize_tp_couple(x, p: float = 2.0) -> FactorizationResult:
    """Optimal factorization for the couple ``(T^p, (T^p)^*)``.

    Maximizing ``sum c_j log t_j`` (``c = x^2 / ||x||^2``) over ``||t||_T <= 1``
    yields dual weights ``W``, a convex combination of nonnegative norming
    functionals, with ``t = c / W`` at the optimum.  Put
    ``N = ||c / W||_T``, ``t = c / (N W)``, ``w0 = ||x||_2 t^{1/p}`` and
    ``w1 = x^2 / w0``.  Then ``||w0||_{T^p} = ||x||_2`` exactly, and Hoelder
    against ``W`` gives ``||w1||_{(T^p)^*} <= ||x||_2 N^{1/p}``.  As
    ``sum x^2 <= ||w0|| ||w1||_*`` no factorization beats ``||x||_2``, so
    ``rho = N^{1/p}`` is a certified selection constant (1 at the optimum).
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    arr = np.abs(as_dense(x))
    nz = np.nonzero(arr)[0]
    if nz.size == 0:
        raise ValueError("cannot factorize the zero vector")
    r = float(np.linalg.norm(arr))
    c = (arr[nz] / r) ** 2
    sol, norm = _log_solve(c, tuple(int(j) + 1 for j in nz))
    best = None
    for W in sol.candidates:
        if np.all(W > 0):
            N = norm(c / W)
            if best is None or N < best[0]:
                best = (N, W)
    N, W = best
    ratio = np.zeros_like(arr)
    ratio[nz] = c / W
    w0 = np.zeros_like(arr)
    w1 = np.zeros_like(arr)
    w0[nz] = r * (ratio[nz] / N) ** (1.0 / p)
    w1[nz] = arr[nz] ** 2 / w0[nz]
    return FactorizationResult(w0, w1, r * N ** (1.0 / p), r, sol.rounds)


def explicit_tp_candidate(x, p: float = 2.0, cap: int | None = None) -> FactorizationResult:
    """The closed-form selection ``w0 = |x|^{2/p}``, ``w1 = |x|^{2/q}`` (on the unit sphere)."""
    arr = np.abs(as_dense(x))
    r = float(np.linalg.norm(arr))
    if r == 0:
        raise ValueError("cannot factorize the zero vector")
    u = arr / r
    w0 = r * u ** (2.0 / p)
    w1 = np.where(u > 0, r * u ** (2.0 - 2.0 / p), 0.0)
    objective = max(norm_Tp(w0, p), dual_Tp_certificate(w1, p, cap=cap).upper)
    return FactorizationResult(w0, w1, objective, r, 0)


def omega_from_factorization(x, fr: FactorizationResult):
    """``x_j log(w1_j / w0_j)`` on ``supp x``; zero elsewhere."""
    arr, as_coeff = _dense_in(x)
    nz = arr != 0
    w0 = np.zeros_like(arr)
    w1 = np.zeros_like(arr)
    w0[:fr.w0.size] = fr.w0[:arr.size]
    w1[:fr.w1.size] = fr.w1[:arr.size]
    if np.any(w0[nz] <= 0) or np.any(w1[nz] <= 0):
        raise ValueError("degenerate factorization: a weight vanishes on the support")
    out = np.zeros_like(arr)
    out[nz] = arr[nz] * np.log(w1[nz] / w0[nz])
    return _dense_out(out, as_coeff)


# ---------------------------------------------------------------------------
# centralizer specs


@lru_cache(maxsize=65536)
def _tp_factor_omega(key: bytes, p: float):
    # key is the normalized |x| profile; the map depends on nothing else
    arr = np.frombuffer(key, dtype=float)
    fr = factorize_tp_couple(arr, p)
    return omega_from_factorization(arr, fr), fr.objective / fr.lower


@dataclass(frozen=True)
class CentralizerSpec:
    """A computable centralizer with its metadata.

    ``kind``: ``zero``, ``kalton-peck`` (uses ``phi``), ``tp-couple`` (the
    explicit formula with exponent ``p``), ``factorization`` or ``custom``.
    A factorization either targets the ``(T^p, (T^p)^*)`` couple (``couple``
    is ``None``; certified fast path) or a custom pair of ``NormOracle``.
    ``custom`` wraps a user callable on dense arrays; ``preserves_support``
    records whether it maps into the support of its argument.
    ``sign = -1`` gives ``-Omega``.
    """

    kind: str = "zero"
    phi: PhiSpec = IDENTITY
    p: float = 2.0
    couple: tuple[NormOracle, NormOracle] | None = None
    sign: int = 1
    label: str = field(default="", compare=False)
    func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    preserves_support: bool = True

    def __post_init__(self):
        if self.kind == "custom" and self.func is None:
            raise ValueError("a custom centralizer needs a callable")
        if self.kind not in ("zero", "kalton-peck", "tp-couple", "factorization", "custom"):
            raise ValueError(f"unknown centralizer kind {self.kind!r}")
        if self.kind in ("tp-couple", "factorization") and self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")

    @property
    def support_preserving(self) -> bool:
        return self.kind != "custom" or self.preserves_support

    @property
    def homogeneous(self) -> bool:
        return True

    def negated(self) -> "CentralizerSpec":
        return replace(self, sign=-self.sign)

    def evaluate(self, x) -> tuple[np.ndarray, float]:
        """``(Omega(x), rho)`` on a dense array; ``rho`` is the selection constant (1 for formulas)."""
        arr = as_dense(x)
        if self.kind == "zero" or not arr.any():
            return np.zeros_like(arr), 1.0
        if self.kind == "kalton-peck":
            return self.sign * kalton_peck_omega(arr, self.phi), 1.0
        if self.kind == "tp-couple":
            return self.sign * omega_tp_explicit(arr, self.p), 1.0
        if self.kind == "custom":
            out = np.asarray(self.func(arr), dtype=float)
            if out.shape != arr.shape:
                raise ValueError(f"custom centralizer returned shape {out.shape}, expected {arr.shape}")
            return self.sign * out, 1.0
        if self.couple is None:
            r = float(np.linalg.norm(arr))
            prof = np.abs(arr) / r
            last = int(np.nonzero(prof)[0][-1]) + 1
            om, rho = _tp_factor_omega(prof[:last].tobytes(), float(self.p))
            out = np.zeros_like(arr)
            out[:last] = r * om * np.sign(arr[:last])
            return self.sign * out, rho
        fr = lozanovskii_factorize(arr, *self.couple)
        rho = fr.objective / float(np.linalg.norm(arr))
        return self.sign * omega_from_factorization(arr, fr), rho

    def __call__(self, x):
        out, _ = self.evaluate(x)
        return CoeffVector.from_dense(out, FLOAT) if isinstance(x, CoeffVector) else out

    def to_json(self) -> dict:
        out = {"kind": self.kind, "sign": self.sign}
        if self.kind == "custom":
            out["label"] = self.label
            out["support_preserving"] = self.support_preserving
        if self.kind == "kalton-peck":
            out["phi"] = self.phi.to_json()
        if self.kind in ("tp-couple", "factorization"):
            out["p"] = self.p
        if self.couple is not None:
            out["couple"] = [self.couple[0].name, self.couple[1].name]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "CentralizerSpec":
        if data.get("couple") or data.get("kind") == "custom":
            raise ValueError("custom centralizers cannot be rebuilt from JSON")
        return cls(data.get("kind", "zero"), PhiSpec.from_json(data.get("phi", {})),
                   float(data.get("p", 2.0)), None, int(data.get("sign", 1)))


ZERO = CentralizerSpec("zero")


def kalton_peck(phi: PhiSpec = IDENTITY) -> CentralizerSpec:
    return CentralizerSpec("kalton-peck", phi=phi)


def tp_factorization(p: float = 2.0) -> CentralizerSpec:
    """Factorization centralizer of the ``(T^p, (T^p)^*)`` couple."""
    return CentralizerSpec("factorization", p=p)


def custom(func: Callable[[np.ndarray], np.ndarray], support_preserving: bool = True,
           label: str = "custom") -> CentralizerSpec:
    """Wrap a callable on dense arrays as a centralizer."""
    return CentralizerSpec("custom", label=label, func=func, preserves_support=support_preserving)


# ---------------------------------------------------------------------------
# Delta estimation

_BATCH = 256


def _batch_rng(seed: int, b: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))


def _sample_pair(rng: np.random.Generator, dim: int):
    mode = rng.integers(3)
    if mode == 0:
        a = rng.choice([-1.0, 1.0], size=dim)
    elif mode == 1:
        a = (rng.random(dim) < rng.uniform(0.2, 0.8)).astype(float)
        if rng.random() < 0.5:
            a = np.zeros(dim)
            a[: rng.integers(1, dim + 1)] = 1.0
        if not a.any():
            a[rng.integers(dim)] = 1.0
    else:
        a = rng.uniform(-1.0, 1.0, size=dim)
    shape = rng.integers(3)
    if shape == 0:
        x = rng.normal(size=dim)
    elif shape == 1:
        x = rng.uniform(0.05, 1.0) ** np.arange(dim) * rng.choice([-1.0, 1.0], size=dim)
    else:
        x = rng.normal(size=dim) * (rng.random(dim) < 0.5)
        if not x.any():
            x[rng.integers(dim)] = 1.0
    return a, x


@dataclass
class DeltaEstimate:
    """Empirical lower bound of ``Delta(Omega)`` with its worst pair."""

    value: float
    a: np.ndarray
    x: np.ndarray
    rho: float
    samples: int


def estimate_delta_report(omega: CentralizerSpec, dim: int, samples: int, seed: int = 0) -> DeltaEstimate:
    """Max of ``||Omega(ax) - a Omega(x)|| / (||a||_inf ||x||)`` over seeded samples.

    Samples come in batches of 256 drawn from independent child streams, so
    a prefix of the sample set is the same for every ``samples`` and any
    batching.  ``rho`` is the largest selection constant met on the way.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    best = DeltaEstimate(0.0, np.zeros(dim), np.zeros(dim), 1.0, samples)
    rho = 1.0
    done = 0
    b = 0
    while done < samples:
        rng = _batch_rng(seed, b)
        for _ in range(min(_BATCH, samples - done)):
            a, x = _sample_pair(rng, dim)
            ox, r1 = omega.evaluate(x)
            oax, r2 = omega.evaluate(a * x)
            rho = max(rho, r1, r2)
            denom = np.max(np.abs(a)) * np.linalg.norm(x)
            val = float(np.linalg.norm(oax - a * ox) / denom)
            if val > best.value:
                best = DeltaEstimate(val, a, x, rho, samples)
        done += min(_BATCH, samples - done)
        b += 1
    best.rho = rho
    return best


def estimate_delta(omega: CentralizerSpec, dim: int, samples: int, seed: int = 0) -> float:
    """Empirical lower bound of ``Delta(Omega)``; see :func:`estimate_delta_report`."""
    return estimate_delta_report(omega, dim, samples, seed).value
