"""Estimators for block and growth parameters of sequence and twisted spaces.

* ``estimate_Dn``: lower bounds for ``D_n(X) = sup ||u_1 + ... + u_n||`` over
  successive blocks of norm at most one, with a re-verified witness;
* ``check_separation_lemma``: support order of ``a - Omega(b)`` for
  gap-separated blocks of a twisted sum;
* ``basis_equivalence_constants``: extremes of ``||sum a_j v_j|| / ||a||_2``;
* ``omega_growth_probe`` and ``commutator_gap``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .centralizer import ZERO, CentralizerSpec
from .coeff import FLOAT, CoeffVector, as_dense
from .tsirelson import dual_norm_Tp, norm_Tp
from .twisted import TwistedVector, quasi_norm_arrays

STRICT = "strict"
GAP = "gap"


def _index_support(block) -> list[int]:
    if isinstance(block, TwistedVector):
        return block.basis_support
    return block.support


@dataclass(frozen=True)
class BlockSequence:
    """Successive blocks, ``CoeffVector`` or ``TwistedVector`` (supports over ``v_k``).

    ``separation="strict"`` asks ``max supp u_i < min supp u_{i+1}``;
    ``"gap"`` asks ``1 + max supp u_i < min supp u_{i+1}``.  Zero blocks are
    not allowed since they have no position.
    """

    blocks: tuple
    separation: str = STRICT

    def __post_init__(self):
        if self.separation not in (STRICT, GAP):
            raise ValueError(f"separation must be 'strict' or 'gap', got {self.separation!r}")
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ValueError("a block sequence needs at least one block")
        kinds = {isinstance(b, TwistedVector) for b in self.blocks}
        if len(kinds) > 1:
            raise ValueError("blocks must all be CoeffVector or all TwistedVector")
        gap = 1 if self.separation == GAP else 0
        prev = None
        for i, b in enumerate(self.blocks):
            supp = _index_support(b)
            if not supp:
                raise ValueError(f"block {i + 1} is zero")
            if prev is not None and not prev + gap < supp[0]:
                rel = "<<" if gap else "<"
                raise ValueError(f"blocks {i} and {i + 1} are not separated ({rel}): "
                                 f"max {prev}, min {supp[0]}")
            prev = supp[-1]

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def twisted(self) -> bool:
        return isinstance(self.blocks[0], TwistedVector)

    @property
    def length(self) -> int:
        """Largest basis index used."""
        return _index_support(self.blocks[-1])[-1]

    def block_arrays(self, M: int | None = None) -> list[np.ndarray]:
        """Blocks as dense coordinate arrays (``v``-coefficients when twisted)."""
        M = self.length if M is None else M
        if self.twisted:
            return [b.coefficients(M) for b in self.blocks]
        return [b.dense(M) for b in self.blocks]

    def total(self, M: int | None = None) -> np.ndarray:
        return np.sum(self.block_arrays(M), axis=0)

    def to_json(self) -> dict:
        return {"separation": self.separation, "twisted": self.twisted,
                "blocks": [b.to_json() for b in self.blocks]}

    @classmethod
    def from_json(cls, data: dict) -> "BlockSequence":
        make = TwistedVector.from_json if data.get("twisted") else (lambda d: CoeffVector.from_json(d, FLOAT))
        return cls(tuple(make(b) for b in data["blocks"]), data.get("separation", STRICT))

    def witness_id(self) -> str:
        text = json.dumps(self.to_json(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# spaces


@dataclass(frozen=True)
class Space:
    """A norm oracle on dense coordinate arrays plus how to read its coordinates.

    For a twisted space the coordinates are coefficients over ``v_1, v_2, ...``
    and ``norm`` is the quasi-norm.  ``unconditional`` lets the block search
    restrict to nonnegative coefficients.
    """

    name: str
    norm: Callable[[np.ndarray], float] = field(compare=False)
    unconditional: bool = True
    omega: CentralizerSpec | None = None

    @property
    def twisted(self) -> bool:
        return self.omega is not None

    def __call__(self, a) -> float:
        return float(self.norm(np.asarray(a, dtype=float)))

    def block(self, a: np.ndarray):
        """The block object with coordinates ``a``."""
        if self.twisted:
            return TwistedVector.from_coefficients(a)
        return CoeffVector.from_dense(a, FLOAT)


def l2_space() -> Space:
    return Space("l2", lambda a: float(np.linalg.norm(a)))


def tp_space(p: float = 2.0) -> Space:
    return Space(f"T^{p:g}", lambda a: float(norm_Tp(a, p)))


def tp_dual_space(p: float = 2.0, cap: int | None = None) -> Space:
    """``(T^p)^*``; ``cap=None`` lifts the norming-set cap (column generation beyond it)."""
    return Space(f"(T^{p:g})*", lambda a: float(dual_norm_Tp(a, p, cap=cap)))


def _twisted_norm(omega: CentralizerSpec):
    def norm(a):
        a = np.asarray(a, dtype=float)
        x, y = a[0::2], a[1::2]
        y = np.concatenate([y, np.zeros(x.size - y.size)])
        return quasi_norm_arrays(x, y, omega)
    return norm


def twisted_space(omega: CentralizerSpec = ZERO) -> Space:
    return Space(f"Z[{omega.to_json()['kind']}]", _twisted_norm(omega), unconditional=False, omega=omega)


# ---------------------------------------------------------------------------
# D_n


@dataclass(frozen=True)
class DnBudget:
    """Search parameters; ``M=None`` means the first ``3 n`` coordinates."""

    M: int | None = None
    placements: int = 12
    restarts: int = 2
    sweeps: int = 6
    max_evals: int = 4000

    def to_json(self) -> dict:
        return {"M": self.M, "placements": self.placements, "restarts": self.restarts,
                "sweeps": self.sweeps, "maxEvals": self.max_evals}


@dataclass
class DnResult:
    """A lower bound for ``D_n`` and the blocks achieving it.

    The value is always only a lower bound; ``saturated`` records that the
    search stopped on its evaluation budget rather than on convergence.
    """

    lower: float
    witness: BlockSequence
    evaluations: int
    saturated: bool
    n: int
    space: str
    status: str = "lower bound only"

    def to_json(self) -> dict:
        return {"n": self.n, "space": self.space, "lower": self.lower, "status": self.status,
                "saturated": self.saturated, "evaluations": self.evaluations,
                "witnessId": self.witness.witness_id(), "witness": self.witness.to_json()}


class _Budget(Exception):
    pass


class _Search:
    """Coordinate ascent on block coefficients for a fixed boundary placement."""

    def __init__(self, space: Space, M: int, max_evals: int):
        self.space, self.M, self.max_evals = space, M, max_evals
        self.evals = 0
        self.best_value, self.best_blocks = -np.inf, None

    def norm(self, a) -> float:
        if self.evals >= self.max_evals:
            raise _Budget
        self.evals += 1
        return self.space(a)

    def value(self, blocks: list[np.ndarray], norms: list[float]) -> float:
        total = sum(b / nb for b, nb in zip(blocks, norms))
        v = self.norm(total)
        if v > self.best_value:
            self.best_value = v
            self.best_blocks = [b / nb for b, nb in zip(blocks, norms)]
        return v

    def ascend(self, blocks: list[np.ndarray], sweeps: int, rng: np.random.Generator, signed: bool):
        norms = [self.norm(b) for b in blocks]
        cur = self.value(blocks, norms)
        factors = [0.0, 0.5, 2.0] + ([-1.0] if signed else [])
        for _ in range(sweeps):
            improved = False
            for i in rng.permutation(len(blocks)):
                for k in np.nonzero(blocks[i] != 0)[0] if not signed else _support_range(blocks[i]):
                    for f in factors:
                        trial = blocks[i].copy()
                        trial[k] = trial[k] * f if trial[k] != 0 else f * np.max(np.abs(trial))
                        if not trial.any():
                            continue
                        nt = self.norm(trial)
                        if nt <= 0:
                            continue
                        old_b, old_n = blocks[i], norms[i]
                        blocks[i], norms[i] = trial, nt
                        v = self.value(blocks, norms)
                        if v > cur * (1 + 1e-12):
                            cur, improved = v, True
                        else:
                            blocks[i], norms[i] = old_b, old_n
            if not improved:
                break
        return cur


def _support_range(b: np.ndarray):
    nz = np.nonzero(b)[0]
    return range(nz[0], nz[-1] + 1) if nz.size else range(0)


def _interval_blocks(intervals, M: int, coeffs) -> list[np.ndarray]:
    out = []
    for (lo, hi), c in zip(intervals, coeffs):
        b = np.zeros(M)
        b[lo - 1:hi] = c
        out.append(b)
    return out


def _random_intervals(rng: np.random.Generator, n: int, M: int) -> list[tuple[int, int]]:
    # n successive intervals inside 1..M, possibly leaving gaps
    cuts = np.sort(rng.choice(np.arange(1, M + 2), size=2 * n, replace=False))
    return [(int(cuts[2 * i]), int(cuts[2 * i + 1]) - 1) for i in range(n)]


def _seed_placements(space: Space, n: int, M: int) -> list[list[tuple[int, int]]]:
    """Structured starting placements: heads, tails and equal splits."""
    seeds = [[(M - n + 1 + i, M - n + 1 + i) for i in range(n)],
             [(i + 1, i + 1) for i in range(n)]]
    w = M // n
    if w >= 1:
        seeds.append([(i * w + 1, (i + 1) * w) for i in range(n)])
    if space.twisted and 2 * n - 1 <= M:
        # v_1 << v_3 << ... << v_{2n-1}
        seeds.insert(0, [(2 * i + 1, 2 * i + 1) for i in range(n)])
    return seeds


def _extend(seed: BlockSequence, n: int, M: int, space: Space) -> list[np.ndarray]:
    """Blocks of ``seed`` followed by far-out unit blocks up to ``n`` blocks."""
    blocks = seed.block_arrays(M)[:n]
    last = seed.length
    while len(blocks) < n:
        last += 2
        b = np.zeros(M)
        b[last - 1] = 1.0
        blocks.append(b)
    return blocks


def estimate_Dn(space: Space, n: int, budget: DnBudget | None = None, seed: int = 0,
                seeds: Sequence[BlockSequence] = ()) -> DnResult:
    """Lower bound for ``D_n`` of ``space`` from a seeded search over interval blocks.

    Block boundaries are drawn inside the first ``M`` coordinates (structured
    placements first, then random ones); coefficients are improved by
    coordinate ascent, nonnegative for unconditional spaces and signed
    otherwise.  ``seeds`` are earlier witnesses, extended by far-out unit
    blocks, so that nested calls can only grow.  The reported value is
    recomputed from the returned witness.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    budget = budget or DnBudget()
    M = budget.M or 3 * n
    if space.twisted:
        M += M % 2
    M = max([M, n] + [s.length + 2 * max(0, n - s.n) for s in seeds])
    if space.twisted:
        M += M % 2
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    search = _Search(space, M, budget.max_evals)
    signed = not space.unconditional
    starts: list[list[np.ndarray]] = [_extend(s, n, M, space) for s in seeds]
    placements = _seed_placements(space, n, M)
    placements += [_random_intervals(rng, n, M) for _ in range(max(0, budget.placements - len(placements)))]
    saturated = False
    try:
        for blocks in starts:
            search.ascend([b.copy() for b in blocks], budget.sweeps, rng, signed)
        for intervals in placements:
            for r in range(budget.restarts):
                if r == 0:
                    coeffs = [np.ones(hi - lo + 1) for lo, hi in intervals]
                elif signed:
                    coeffs = [rng.normal(size=hi - lo + 1) for lo, hi in intervals]
                else:
                    coeffs = [rng.uniform(0.1, 1.0, size=hi - lo + 1) for lo, hi in intervals]
                search.ascend(_interval_blocks(intervals, M, coeffs), budget.sweeps, rng, signed)
    except _Budget:
        saturated = True
    witness = BlockSequence(tuple(space.block(b) for b in search.best_blocks))
    value = space(witness.total(M))
    if abs(value - search.best_value) > 1e-9 * max(1.0, value):
        raise RuntimeError(f"witness re-evaluation {value} differs from search value {search.best_value}")
    return DnResult(value, witness, search.evals, saturated, n, space.name)


# ---------------------------------------------------------------------------
# separation lemma


def _e_support(v: np.ndarray) -> list[int]:
    return [int(j) + 1 for j in np.nonzero(v)[0]]


def _ordered(s1: list[int], s2: list[int]) -> bool:
    return not s1 or not s2 or s1[-1] < s2[0]


def check_separation_lemma(u1: TwistedVector, u2: TwistedVector, omega: CentralizerSpec) -> bool:
    """For ``u1 << u2`` over the ``v`` basis: ``a1 - Omega(b1) < a2 - Omega(b2)`` and ``b1 < b2``.

    Supports are exact (nonzero entries).  Refuses when the blocks are only
    ``<``-separated (``v_{2j-1} < v_{2j}`` share the coordinate ``e_j``) or
    when ``Omega`` may leave the support of its argument.
    """
    if not omega.support_preserving:
        raise ValueError("the separation lemma needs a support-preserving centralizer")
    BlockSequence((u1, u2), GAP)
    n = max(u1.length, u2.length)
    (a1, b1), (a2, b2) = u1.arrays(n), u2.arrays(n)
    r1 = a1 - omega(b1)
    r2 = a2 - omega(b2)
    return _ordered(_e_support(r1), _e_support(r2)) and _ordered(_e_support(b1), _e_support(b2))


def random_separated_pair(rng: np.random.Generator, max_len: int = 6, max_start: int = 8,
                          gap: int = 1) -> tuple[TwistedVector, TwistedVector]:
    """Two random blocks over the ``v`` basis with ``1 + max u1 + (gap - 1) < min u2``."""

    def block(lo):
        length = int(rng.integers(1, max_len + 1))
        a = np.zeros(lo + length)
        a[lo:lo + length] = rng.normal(size=length) * (rng.random(length) < 0.8)
        if not a.any():
            a[lo] = 1.0
        return TwistedVector.from_coefficients(a)

    u1 = block(int(rng.integers(0, max_start)))
    start = max(u1.basis_support) + gap + int(rng.integers(0, 3))
    return u1, block(start)


# ---------------------------------------------------------------------------
# basis equivalence


@dataclass
class EquivalenceResult:
    """Extremes of ``||sum a_k v_k|| / ||a||_2`` over ``a`` in ``R^N``.

    Both extremes are attained by the stored coefficient vectors and were
    recomputed by direct quasi-norm evaluation.  ``L`` is the largest
    ``||Omega(y)|| / ||y||`` found with ``y`` in the span of the ``v_{2j}``.
    """

    N: int
    c_low: float
    c_high: float
    L: float
    a_low: np.ndarray
    a_high: np.ndarray
    samples: int

    @property
    def ratio(self) -> float:
        return self.c_high / self.c_low

    def to_json(self) -> dict:
        return {"N": self.N, "cLow": self.c_low, "cHigh": self.c_high, "ratio": self.ratio,
                "L": self.L, "samples": self.samples}


def _omega_ratio(omega: CentralizerSpec, y: np.ndarray) -> float:
    ny = np.linalg.norm(y)
    return float(np.linalg.norm(omega(y)) / ny) if ny > 0 else 0.0


def _max_omega_ratio(omega: CentralizerSpec, d: int, samples: int, rng: np.random.Generator,
                     sweeps: int = 4) -> tuple[float, np.ndarray]:
    """Sampled and locally improved ``sup ||Omega(y)|| / ||y||`` over ``R^d``."""
    cands = [np.ones(k).tolist() + [0.0] * (d - k) for k in range(1, d + 1)]
    for _ in range(samples):
        kind = rng.integers(3)
        if kind == 0:
            y = rng.normal(size=d)
        elif kind == 1:
            y = rng.uniform(0.05, 1.0) ** np.arange(d)
        else:
            y = rng.exponential(size=d) * (rng.random(d) < 0.7)
        cands.append(y)
    scored = sorted(((_omega_ratio(omega, np.asarray(y, float)), i) for i, y in enumerate(cands)), reverse=True)
    best_val, best_y = scored[0][0], np.asarray(cands[scored[0][1]], float)
    for _, i in scored[:3]:
        y = np.asarray(cands[i], float)
        val = _omega_ratio(omega, y)
        for _ in range(sweeps):
            improved = False
            for k in range(d):
                for f in (0.0, 0.7, 1.4, -1.0):
                    t = y.copy()
                    t[k] = t[k] * f if t[k] != 0 else 0.1 * np.max(np.abs(y))
                    if not t.any():
                        continue
                    v = _omega_ratio(omega, t)
                    if v > val * (1 + 1e-12):
                        y, val, improved = t, v, True
            if not improved:
                break
        if val > best_val:
            best_val, best_y = val, y
    return best_val, best_y


def basis_equivalence_constants(N: int, omega: CentralizerSpec = ZERO, samples: int = 200,
                                seed: int = 0) -> EquivalenceResult:
    """Empirical ``cLow <= ||sum a_k v_k|| / ||a||_2 <= cHigh`` over ``v_1..v_N``.

    For a homogeneous ``Omega`` mapping ``span(e_1..e_d)`` into itself the
    extremes over the ``x`` part are explicit: with ``L`` the sup of
    ``||Omega(y)|| / ||y||``, the upper one is ``sqrt(1 + (L + 1)^2)`` and the
    lower one ``1 / sqrt(1 + L^2)``.  ``L`` is estimated by sampling and
    local search; the two extremal ``a`` are then built and evaluated
    directly, along with ``samples`` random ``a``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    norm = _twisted_norm(omega)
    d = N // 2
    candidates = [np.eye(N)[0]]
    L = 0.0
    if d > 0:
        L, y = _max_omega_ratio(omega, d, samples, rng)
        y = y / np.linalg.norm(y)
        oy = omega(y)
        noy = np.linalg.norm(oy)
        u = np.zeros((N + 1) // 2)
        if noy > 0:
            u[:d] = oy / noy
        else:
            u[0] = 1.0
        s_hi = (L + 1) / math.sqrt(1 + (L + 1) ** 2)
        c_hi = 1 / math.sqrt(1 + (L + 1) ** 2)
        s_lo = 1 / math.sqrt(1 + L ** 2)
        # x opposite to Omega(y) for the top, equal to it for the bottom
        for xs, ys in ((-c_hi * u, s_hi * y), (s_lo * np.pad(oy, (0, u.size - d)), s_lo * y)):
            a = np.zeros(N)
            a[0::2], a[1::2] = xs, ys
            candidates.append(a)
    for _ in range(samples):
        candidates.append(rng.normal(size=N))
    ratios = [norm(a) / np.linalg.norm(a) for a in candidates]
    lo, hi = int(np.argmin(ratios)), int(np.argmax(ratios))
    return EquivalenceResult(N, ratios[lo], ratios[hi], L, candidates[lo], candidates[hi], samples)


# ---------------------------------------------------------------------------
# growth and commutator


def omega_growth_probe(omega: CentralizerSpec, ns: Sequence[int]) -> list[dict]:
    """``||Omega(1_n)||_2 / sqrt(n)`` for each ``n`` in the increasing list ``ns``."""
    ns = [int(n) for n in ns]
    if any(n < 1 for n in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError(f"ns must be positive and increasing, got {ns}")
    rows = []
    for n in ns:
        value, rho = omega.evaluate(np.ones(n))
        rows.append({"n": n, "value": float(np.linalg.norm(value) / math.sqrt(n)), "rho": rho})
    return rows


@dataclass
class CommutatorGap:
    gap: float
    bound: float
    D: float
    D_dual: float
    sum_norm: float
    n: int

    def within(self, slack: float = 2.0) -> bool:
        return self.gap <= self.bound * slack

    def to_json(self) -> dict:
        return {"n": self.n, "gap": self.gap, "bound": self.bound, "D": self.D,
                "Ddual": self.D_dual, "sumNorm": self.sum_norm}


def commutator_gap(blocks: BlockSequence, omega: CentralizerSpec, budget: DnBudget | None = None,
                   seed: int = 0, p: float = 2.0) -> CommutatorGap:
    """``||Omega(sum b_j) - sum Omega(b_j)||`` against ``6 sqrt(D D*) + |log(D / D*)| ||sum b_j||``.

    ``D`` and ``D*`` are the estimated ``D_n`` of ``T^p`` and its dual.
    """
    if blocks.twisted:
        raise ValueError("commutator_gap takes blocks of scalar sequences")
    if not omega.support_preserving:
        raise ValueError("commutator_gap needs a support-preserving centralizer")
    n = blocks.n
    arrays = blocks.block_arrays()
    total = np.sum(arrays, axis=0)
    gap = float(np.linalg.norm(omega(total) - np.sum([omega(b) for b in arrays], axis=0)))
    D = estimate_Dn(tp_space(p), n, budget, seed).lower
    Dd = estimate_Dn(tp_dual_space(p), n, budget, seed).lower
    s = float(np.linalg.norm(total))
    bound = 6 * math.sqrt(D * Dd) + abs(math.log(D / Dd)) * s
    return CommutatorGap(gap, bound, D, Dd, s, n)


def report_row(parameter: str, n: int, estimate: float, witness: BlockSequence | None,
               budget: DnBudget | None, seed: int) -> dict:
    """A row ``{parameter, n, estimate, witnessId, budget, seed}``."""
    return {"parameter": parameter, "n": n, "estimate": estimate,
            "witnessId": witness.witness_id() if witness is not None else None,
            "budget": budget.to_json() if budget is not None else None, "seed": seed}
