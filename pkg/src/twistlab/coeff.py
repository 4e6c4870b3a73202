"""Finitely supported coefficient vectors.

Coordinates are 1-based, matching the basis ``e_1, e_2, ...``.  Dense numpy
arrays used internally put coordinate ``j`` at position ``j - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

import numpy as np

EXACT = "exact"
FLOAT = "float"


def _to_scalar(value, mode: str):
    if mode == EXACT:
        if isinstance(value, Rational):
            return Fraction(value)
        if isinstance(value, float):
            return Fraction(value)
        if isinstance(value, (np.integer,)):
            return Fraction(int(value))
        if isinstance(value, np.floating):
            return Fraction(float(value))
        if isinstance(value, str):
            return Fraction(value)
        raise TypeError(f"cannot use {type(value).__name__} in exact mode")
    return float(value)


@dataclass(frozen=True)
class CoeffVector:
    """Sparse scalar sequence ``sum entries[j] * e_j``.

    ``mode`` is ``"exact"`` (``Fraction`` payload) or ``"float"``.  Zero
    entries are dropped on construction.
    """

    entries: Mapping[int, object] = field(default_factory=dict)
    mode: str = EXACT

    def __post_init__(self):
        if self.mode not in (EXACT, FLOAT):
            raise ValueError(f"unknown mode {self.mode!r}")
        clean = {}
        for j, v in self.entries.items():
            j = int(j)
            if j < 1:
                raise ValueError(f"coordinate indices start at 1, got {j}")
            v = _to_scalar(v, self.mode)
            if v != 0:
                clean[j] = v
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    # -- constructors -----------------------------------------------------
    @classmethod
    def unit(cls, j: int, mode: str = EXACT) -> "CoeffVector":
        return cls({j: 1}, mode)

    @classmethod
    def indicator(cls, indices: Iterable[int], mode: str = EXACT) -> "CoeffVector":
        return cls({j: 1 for j in indices}, mode)

    @classmethod
    def from_dense(cls, values, mode: str = FLOAT, offset: int = 1) -> "CoeffVector":
        """Build from a dense sequence whose first item is coordinate ``offset``."""
        return cls({offset + i: v for i, v in enumerate(values) if v != 0}, mode)

    # -- views ------------------------------------------------------------
    @property
    def support(self) -> list[int]:
        return list(self.entries)

    @property
    def max_index(self) -> int:
        return max(self.entries, default=0)

    def is_zero(self) -> bool:
        return not self.entries

    def dense(self, n: int | None = None) -> np.ndarray:
        """Float array of length ``n`` (default: ``max_index``)."""
        n = self.max_index if n is None else n
        if self.max_index > n:
            raise ValueError(f"support reaches {self.max_index} > {n}")
        out = np.zeros(n)
        for j, v in self.entries.items():
            out[j - 1] = float(v)
        return out

    def to_float(self) -> "CoeffVector":
        return CoeffVector(self.entries, FLOAT)

    def abs(self) -> "CoeffVector":
        return CoeffVector({j: abs(v) for j, v in self.entries.items()}, self.mode)

    def scale(self, c) -> "CoeffVector":
        c = _to_scalar(c, self.mode)
        return CoeffVector({j: c * v for j, v in self.entries.items()}, self.mode)

    def __add__(self, other: "CoeffVector") -> "CoeffVector":
        mode = EXACT if self.mode == other.mode == EXACT else FLOAT
        out = {j: _to_scalar(v, mode) for j, v in self.entries.items()}
        for j, v in other.entries.items():
            out[j] = out.get(j, 0) + _to_scalar(v, mode)
        return CoeffVector(out, mode)

    def __neg__(self) -> "CoeffVector":
        return self.scale(-1)

    def __sub__(self, other: "CoeffVector") -> "CoeffVector":
        return self + (-other)

    def dot(self, other: "CoeffVector"):
        return sum((v * other.entries[j] for j, v in self.entries.items()
                    if j in other.entries), 0)

    def to_json(self) -> dict[str, object]:
        """``{"index": value}`` map; exact values serialize as ``"p/q"`` strings."""
        if self.mode == EXACT:
            return {str(j): str(v) for j, v in self.entries.items()}
        return {str(j): float(v) for j, v in self.entries.items()}

    @classmethod
    def from_json(cls, data: Mapping[str, object], mode: str | None = None) -> "CoeffVector":
        if mode is None:
            mode = EXACT if all(isinstance(v, (str, int)) for v in data.values()) else FLOAT
        return cls({int(k): v for k, v in data.items()}, mode)


def as_dense(x, n: int | None = None) -> np.ndarray:
    """Coerce a ``CoeffVector`` or array-like into a float array."""
    if isinstance(x, CoeffVector):
        return x.dense(n)
    arr = np.asarray(x, dtype=float)
    if n is not None and arr.size < n:
        arr = np.concatenate([arr, np.zeros(n - arr.size)])
    return arr
