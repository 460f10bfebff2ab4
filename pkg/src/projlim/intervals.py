"""Finite unions of half-open intervals, partitions of the line, and the
coarsening maps between simplices attached to nested partitions.

Intervals are ``[a, b)`` with ``a`` possibly ``-inf`` (then the interval is
``(-inf, b)``) and ``b`` possibly ``+inf`` (never attained).
"""
from __future__ import annotations

import bisect
import json
import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from projlim import kernels
from projlim.errors import (
    DimensionError,
    InvalidIntervalError,
    InvalidPartitionError,
    NumericError,
)

INF = math.inf

Interval = tuple[float, float]


def _check_interval(a, b) -> Interval:
    a = float(a)
    b = float(b)
    if math.isnan(a) or math.isnan(b) or not a < b:
        raise InvalidIntervalError(f"invalid interval [{a}, {b})")
    if a == INF or b == -INF:
        raise InvalidIntervalError(f"invalid interval [{a}, {b})")
    return a, b


@dataclass(frozen=True)
class QSet:
    """A member of the interval algebra in canonical form.

    Use :func:`qset_normalize` (or :meth:`QSet.of`) to build one from raw
    intervals; the constructor assumes the input is already canonical.
    """

    intervals: tuple[Interval, ...] = ()

    @classmethod
    def of(cls, *intervals: Sequence[float]) -> "QSet":
        return qset_normalize(intervals)

    @classmethod
    def empty(cls) -> "QSet":
        return cls(())

    @classmethod
    def full(cls) -> "QSet":
        return cls(((-INF, INF),))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_full(self) -> bool:
        return self.intervals == ((-INF, INF),)

    @property
    def left(self) -> float:
        return self.intervals[0][0]

    def __contains__(self, x: float) -> bool:
        i = bisect.bisect_right(self.intervals, (x, INF)) - 1
        if i < 0:
            return False
        a, b = self.intervals[i]
        return a <= x < b

    def contains_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        out = np.zeros(xs.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (xs >= a) & (xs < b)
        return out

    def __or__(self, other: "QSet") -> "QSet":
        return qset_union(self, other)

    def __and__(self, other: "QSet") -> "QSet":
        return qset_intersect(self, other)

    def __invert__(self) -> "QSet":
        return qset_complement(self)

    def __sub__(self, other: "QSet") -> "QSet":
        return qset_intersect(self, qset_complement(other))

    def issubset(self, other: "QSet") -> bool:
        return (self - other).is_empty

    def __repr__(self) -> str:
        if not self.intervals:
            return "QSet(∅)"
        parts = []
        for a, b in self.intervals:
            lo = "(-inf" if a == -INF else f"[{a!r}"
            parts.append(f"{lo}, {'inf' if b == INF else repr(b)})")
        return "QSet(" + " ∪ ".join(parts) + ")"


def qset_normalize(raw: Iterable[Sequence[float]]) -> QSet:
    """Canonicalize a list of ``(a, b)`` pairs: sort, then merge overlapping
    or touching intervals."""
    ivs = sorted(_check_interval(a, b) for a, b in raw)
    merged: list[list[float]] = []
    for a, b in ivs:
        if merged and a <= merged[-1][1]:
            if b > merged[-1][1]:
                merged[-1][1] = b
        else:
            merged.append([a, b])
    return QSet(tuple((a, b) for a, b in merged))


def qset_complement(A: QSet) -> QSet:
    out = []
    cursor = -INF
    for a, b in A.intervals:
        if a > cursor:
            out.append((cursor, a))
        cursor = b
    if cursor < INF:
        out.append((cursor, INF))
    return QSet(tuple(out))


def qset_union(A: QSet, B: QSet) -> QSet:
    return qset_normalize(A.intervals + B.intervals)


def qset_intersect(A: QSet, B: QSet) -> QSet:
    out = []
    i = j = 0
    xs, ys = A.intervals, B.intervals
    while i < len(xs) and j < len(ys):
        a = max(xs[i][0], ys[j][0])
        b = min(xs[i][1], ys[j][1])
        if a < b:
            out.append((a, b))
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    # canonical inputs never produce touching pieces
    return QSet(tuple(out))


def is_partition(cells: Sequence[QSet]) -> bool:
    """True iff the cells are non-empty, pairwise disjoint and cover the line."""
    if not cells or any(c.is_empty for c in cells):
        return False
    ivs = sorted(iv for c in cells for iv in c.intervals)
    if ivs[0][0] != -INF or ivs[-1][1] != INF:
        return False
    return all(prev[1] == nxt[0] for prev, nxt in zip(ivs, ivs[1:]))


@dataclass(frozen=True)
class Partition:
    """A finite partition of the real line into QSets, sorted by left endpoint."""

    cells: tuple[QSet, ...]

    def __init__(self, cells: Iterable[QSet]):
        cells = tuple(sorted(cells, key=lambda c: c.left if c.intervals else INF))
        if not is_partition(cells):
            raise InvalidPartitionError(f"cells do not partition the real line: {cells!r}")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def trivial(cls) -> "Partition":
        return cls([QSet.full()])

    @classmethod
    def from_cuts(cls, cuts: Iterable[float]) -> "Partition":
        """Cells ``(-inf, c1), [c1, c2), ..., [ck, inf)`` for increasing cuts."""
        edges = [-INF, *map(float, cuts), INF]
        return cls(QSet(((a, b),)) for a, b in zip(edges, edges[1:]))

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def __getitem__(self, i):
        return self.cells[i]

    def breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted left endpoints of all intervals and the owning cell of each."""
        pairs = sorted((iv[0], k) for k, c in enumerate(self.cells) for iv in c.intervals)
        return (np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs], dtype=np.intp))

    def locate(self, xs) -> np.ndarray:
        """Index of the cell containing each point (vectorized)."""
        lefts, owners = self.breakpoints()
        idx = np.searchsorted(lefts, np.asarray(xs, dtype=np.float64), side="right") - 1
        return owners[idx]

    def to_text(self) -> str:
        return partition_to_text(self)

    def __repr__(self) -> str:
        return f"Partition({partition_to_text(self)})"


@dataclass(frozen=True)
class Grouping:
    """Blocks of fine-cell indices, one block per coarse cell (0-based)."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = sorted(j for blk in self.blocks for j in blk)
        if any(not blk for blk in self.blocks) or seen != list(range(len(seen))):
            raise InvalidPartitionError(f"blocks do not partition the index set: {self.blocks}")

    @property
    def n_fine(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def n_coarse(self) -> int:
        return len(self.blocks)

    @property
    def labels(self) -> np.ndarray:
        lab = np.empty(self.n_fine, dtype=np.intp)
        for i, blk in enumerate(self.blocks):
            lab[list(blk)] = i
        return lab

    @classmethod
    def identity(cls, n: int) -> "Grouping":
        return cls(tuple((j,) for j in range(n)))


SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """A probability vector over the cells of a partition."""

    masses: np.ndarray
    partition: Partition | None = None

    def __post_init__(self):
        m = np.array(self.masses, dtype=np.float64)
        if m.ndim != 1 or m.size == 0:
            raise DimensionError(f"simplex point must be a non-empty vector, got shape {m.shape}")
        if self.partition is not None and len(self.partition) != m.size:
            raise DimensionError(f"{m.size} masses for a partition of {len(self.partition)} cells")
        if np.any(np.isnan(m)):
            raise NumericError("simplex point contains NaN")
        if np.any(m < 0) or abs(m.sum() - 1.0) > SUM_TOL:
            raise NumericError(f"not a point of the simplex: {m}")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    def __len__(self) -> int:
        return self.masses.size

    def __array__(self, dtype=None, copy=None):
        return self.masses if dtype is None else self.masses.astype(dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimplexPoint):
            return NotImplemented
        return np.array_equal(self.masses, other.masses) and self.partition == other.partition

    def __repr__(self) -> str:
        return f"SimplexPoint({np.array2string(self.masses, precision=6)})"


def common_refinement(I: Partition, J: Partition) -> Partition:
    cells = []
    for A in I:
        for B in J:
            C = A & B
            if not C.is_empty:
                cells.append(C)
    return Partition(cells)


def _representative(cell: QSet) -> float:
    a, b = cell.intervals[0]
    if a > -INF:
        return a
    return b - 1.0 if b < INF else 0.0


def coarsening_of(I: Partition, J: Partition) -> Grouping | None:
    """Grouping witnessing that J refines I, or None when it does not."""
    owner = I.locate([_representative(B) for B in J])
    blocks: list[list[int]] = [[] for _ in I.cells]
    for j, (B, i) in enumerate(zip(J.cells, owner)):
        if not B.issubset(I.cells[i]):
            return None
        blocks[i].append(j)
    if any(not blk for blk in blocks):
        return None
    return Grouping(tuple(tuple(b) for b in blocks))


def apply_fJI(g: Grouping, x_J):
    """Push a fine simplex point (or an (N, n) batch) onto the coarse partition
    by summing masses block by block."""
    if isinstance(x_J, SimplexPoint):
        if len(x_J) != g.n_fine:
            raise DimensionError(f"point has {len(x_J)} cells, grouping expects {g.n_fine}")
        out = kernels.block_sum(x_J.masses[None, :], g.labels, g.n_coarse)[0]
        return SimplexPoint(out)
    x = np.asarray(x_J, dtype=np.float64)
    if x.shape[-1] != g.n_fine:
        raise DimensionError(f"point has {x.shape[-1]} cells, grouping expects {g.n_fine}")
    flat = x.reshape(-1, g.n_fine)
    out = kernels.block_sum(flat, g.labels, g.n_coarse)
    return out.reshape(x.shape[:-1] + (g.n_coarse,))


def _fmt(v: float) -> str:
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return repr(float(v))


def partition_to_text(I: Partition) -> str:
    """Serialize as ``[[[a, b], ...], ...]`` with ``-inf``/``inf`` tokens."""
    return "[" + ", ".join(
        "[" + ", ".join(f"[{_fmt(a)}, {_fmt(b)}]" for a, b in c.intervals) + "]" for c in I
    ) + "]"


_INF_TOKEN = re.compile(r"(?<![\w.])(-?)inf(?![\w.])", re.IGNORECASE)


def parse_intervals(text: str):
    try:
        return json.loads(_INF_TOKEN.sub(lambda m: m.group(1) + "Infinity", text))
    except json.JSONDecodeError as exc:
        raise InvalidPartitionError(f"cannot parse interval list {text!r}: {exc}") from None


def partition_from_text(text: str) -> Partition:
    raw = parse_intervals(text)
    try:
        cells = [qset_normalize((a, b) for a, b in cell) for cell in raw]
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidIntervalError):
            raise
        raise InvalidPartitionError(f"malformed partition {text!r}") from None
    return Partition(cells)
