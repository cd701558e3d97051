"""Multi-indices p in N^d and the monomials they index."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, ValidationError


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(e < 0 for e in entries):
            raise ValidationError(f"multi-index entries must be >= 0, got {entries}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def zeros(cls, d: int) -> "MultiIndex":
        return cls((0,) * d)

    @classmethod
    def unit(cls, d: int, i: int) -> "MultiIndex":
        e = [0] * d
        e[i] = 1
        return cls(tuple(e))

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def order(self) -> int:
        return sum(self.entries)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        if other.d != self.d:
            raise DimensionMismatch(f"cannot add multi-indices of length {self.d} and {other.d}")
        return MultiIndex(tuple(a + b for a, b in zip(self.entries, other.entries)))

    def scaled(self, k: int) -> "MultiIndex":
        return MultiIndex(tuple(k * e for e in self.entries))

    def is_zero(self) -> bool:
        return self.order == 0

    def monomial(self, omegas: np.ndarray) -> np.ndarray:
        """omega^p for each row of an (m, d) array, with 0**0 = 1."""
        omegas = np.atleast_2d(np.asarray(omegas, dtype=float))
        if omegas.shape[1] != self.d:
            raise DimensionMismatch(f"points have dimension {omegas.shape[1]}, multi-index has {self.d}")
        out = np.ones(omegas.shape[0])
        for i, e in enumerate(self.entries):
            if e:
                out = out * omegas[:, i] ** e
        return out

    def __str__(self):
        return "(" + ",".join(str(e) for e in self.entries) + ")"


IndexLike = Union[MultiIndex, int, Sequence[int]]


def as_multi_index(p: IndexLike, d: int | None = None) -> MultiIndex:
    if isinstance(p, MultiIndex):
        mi = p
    elif isinstance(p, (int, np.integer)):
        mi = MultiIndex((int(p),) * (d or 1)) if (d or 1) == 1 else None
        if mi is None:
            raise ValidationError("a bare integer multi-index is only allowed for d=1")
    else:
        mi = MultiIndex(tuple(p))
    if d is not None and mi.d != d:
        raise DimensionMismatch(f"multi-index {mi} has length {mi.d}, expected {d}")
    return mi


def parse_multi_index(text: str) -> MultiIndex:
    """Parse '1,0' or '(1, 0)' into a MultiIndex."""
    text = text.strip().strip("()[]")
    parts: Iterable[str] = [t for t in text.replace(";", ",").split(",") if t.strip()]
    return MultiIndex(tuple(int(t) for t in parts))
