"""Categorical chain segments and the count tables built from them.

Categories are stored as dense 0-based codes ``0..r-1`` into a shared
:class:`CategoryAlphabet`.  Every statistic in the package consumes either a
:class:`FrequencyTable` (category counts per segment) or a
:class:`TransitionTable` (first-order transition counts per segment).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from numbers import Integral
from typing import Hashable, Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "CategoryAlphabet",
    "SegmentSet",
    "FrequencyTable",
    "TransitionTable",
    "encode",
    "frequency_table",
    "transition_table",
    "split_within",
]


@dataclass(frozen=True)
class CategoryAlphabet:
    """Ordered, distinct category labels; code ``j`` means ``labels[j]``."""

    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise DataError("alphabet must contain at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise DataError("alphabet labels must be unique")

    @property
    def size(self) -> int:
        return len(self.labels)

    @classmethod
    def of_size(cls, r: int) -> "CategoryAlphabet":
        """Alphabet ``1..r`` used for simulated chains."""
        return cls(tuple(range(1, r + 1)))

    def index(self) -> dict:
        return {label: j for j, label in enumerate(self.labels)}

    def decode(self, codes) -> list:
        return [self.labels[int(c)] for c in codes]


@dataclass(frozen=True, eq=False)
class SegmentSet:
    """Independent categorical segments over one alphabet.

    ``segments`` holds one integer array of codes per segment.  ``names``
    optionally carries the chain identifiers the segments came from.
    """

    segments: tuple
    alphabet: CategoryAlphabet
    names: tuple | None = None

    def __post_init__(self):
        r = self.alphabet.size
        segs = []
        for i, seg in enumerate(self.segments):
            arr = np.asarray(seg)
            if arr.ndim != 1:
                raise DataError(f"segment {i} must be one-dimensional")
            if arr.size < 2:
                raise DataError(f"segment {i} too short")
            if not np.issubdtype(arr.dtype, np.integer):
                raise DataError(f"segment {i} must hold integer codes")
            if arr.min() < 0 or arr.max() >= r:
                raise DataError(f"segment {i} has codes outside 0..{r - 1}")
            arr = arr.astype(np.int64, copy=True)
            arr.setflags(write=False)
            segs.append(arr)
        if not segs:
            raise DataError("at least one segment is required")
        object.__setattr__(self, "segments", tuple(segs))
        if self.names is not None:
            names = tuple(str(n) for n in self.names)
            if len(names) != len(segs):
                raise DataError("names must match the number of segments")
            object.__setattr__(self, "names", names)

    @classmethod
    def from_codes(cls, segments, r: int, names=None) -> "SegmentSet":
        return cls(tuple(segments), CategoryAlphabet.of_size(r), names)

    @property
    def s(self) -> int:
        return len(self.segments)

    @property
    def r(self) -> int:
        return self.alphabet.size

    @property
    def lengths(self) -> tuple:
        return tuple(int(seg.size) for seg in self.segments)

    def unit_names(self) -> tuple:
        if self.names is not None:
            return self.names
        return tuple(str(i + 1) for i in range(self.s))

    def decode(self) -> list:
        return [self.alphabet.decode(seg) for seg in self.segments]

    def subset(self, indices) -> "SegmentSet":
        names = None if self.names is None else [self.names[i] for i in indices]
        return SegmentSet(tuple(self.segments[i] for i in indices), self.alphabet, names)

    def prefix(self, length: int) -> "SegmentSet":
        """Every segment truncated to its first ``length`` values."""
        return SegmentSet(tuple(seg[:length] for seg in self.segments), self.alphabet, self.names)

    def __eq__(self, other):
        if not isinstance(other, SegmentSet):
            return NotImplemented
        return (
            self.alphabet == other.alphabet
            and self.names == other.names
            and self.s == other.s
            and all(np.array_equal(a, b) for a, b in zip(self.segments, other.segments))
        )

    __hash__ = None


def _sorted_labels(labels: set) -> tuple:
    if all(isinstance(v, Integral) and not isinstance(v, bool) for v in labels):
        return tuple(sorted(labels))
    if all(isinstance(v, str) for v in labels):
        return tuple(sorted(labels))
    raise DataError("labels must be all integers or all text")


def encode(raw_segments: Sequence[Sequence[Hashable]], names=None) -> SegmentSet:
    """Encode raw label sequences over the sorted union of observed labels.

    >>> encode([["a", "b", "a"], ["b", "b", "a"]]).decode()
    [['a', 'b', 'a'], ['b', 'b', 'a']]
    """
    raw_segments = [list(seq) for seq in raw_segments]
    if not raw_segments or not any(raw_segments):
        raise DataError("no chain data supplied")
    for i, seq in enumerate(raw_segments):
        if len(seq) < 2:
            raise DataError(f"segment {i} too short")
    labels = set()
    for seq in raw_segments:
        labels.update(seq)
    alphabet = CategoryAlphabet(_sorted_labels(labels))
    lookup = alphabet.index()
    segments = tuple(np.fromiter((lookup[v] for v in seq), np.int64, len(seq)) for seq in raw_segments)
    return SegmentSet(segments, alphabet, names)


@dataclass(frozen=True, eq=False)
class FrequencyTable:
    """Category counts ``counts[i, j]`` for segment ``i`` and category ``j``."""

    counts: np.ndarray

    @property
    def s(self) -> int:
        return self.counts.shape[0]

    @property
    def r(self) -> int:
        return self.counts.shape[1]

    @property
    def segment_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def pooled_counts(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def proportions(self) -> np.ndarray:
        return self.counts / self.segment_totals[:, None]

    @property
    def pooled_proportions(self) -> np.ndarray:
        return self.pooled_counts / self.total

    @property
    def support(self) -> frozenset:
        """Categories with a positive pooled count."""
        return frozenset(int(j) for j in np.flatnonzero(self.pooled_counts))


def frequency_table(segments: SegmentSet) -> FrequencyTable:
    counts = np.stack([np.bincount(seg, minlength=segments.r) for seg in segments.segments])
    counts.setflags(write=False)
    return FrequencyTable(counts)


@dataclass(frozen=True, eq=False)
class TransitionTable:
    """Transition counts ``counts[i, j, k]``: moves ``j -> k`` inside segment ``i``.

    Per-segment probabilities are NaN on rows never left in that segment.
    """

    counts: np.ndarray

    @property
    def s(self) -> int:
        return self.counts.shape[0]

    @property
    def r(self) -> int:
        return self.counts.shape[1]

    @property
    def row_totals(self) -> np.ndarray:
        """``f_j`` per segment, shape ``(s, r)``."""
        return self.counts.sum(axis=2)

    @property
    def pooled_counts(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def probabilities(self) -> np.ndarray:
        tot = self.row_totals[:, :, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(tot > 0, self.counts / np.where(tot > 0, tot, 1), np.nan)

    @property
    def pooled_probabilities(self) -> np.ndarray:
        pooled = self.pooled_counts
        tot = pooled.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(tot > 0, pooled / np.where(tot > 0, tot, 1), np.nan)

    def source_segments(self, j: int) -> frozenset:
        """``A_j``: segments with at least one transition out of ``j``."""
        return frozenset(int(i) for i in np.flatnonzero(self.row_totals[:, j]))

    def targets(self, j: int) -> frozenset:
        """``B_j`` (equivalently ``R_j``): states reached from ``j`` in the pooled data."""
        return frozenset(int(k) for k in np.flatnonzero(self.pooled_counts[j]))

    @property
    def a(self) -> np.ndarray:
        return (self.row_totals > 0).sum(axis=0)

    @property
    def b(self) -> np.ndarray:
        return (self.pooled_counts > 0).sum(axis=1)


def transition_table(segments: SegmentSet) -> TransitionTable:
    r = segments.r
    counts = np.stack(
        [np.bincount(seg[:-1] * r + seg[1:], minlength=r * r).reshape(r, r) for seg in segments.segments]
    )
    counts.setflags(write=False)
    return TransitionTable(counts)


def split_within(chain, window_fraction: float = 0.3, alphabet: CategoryAlphabet | None = None) -> SegmentSet:
    """Head and tail windows of one chain, each ``floor(fraction * n)`` long.

    The middle of the chain is discarded so the two windows can be treated
    as independent.
    """
    if not 0 < window_fraction < 0.5:
        raise DataError(f"window fraction must lie in (0, 0.5), got {window_fraction}")
    arr = np.asarray(chain)
    n = arr.size
    # tolerance guards against 2/0.3 evaluating to 6.666...7
    if n < math.ceil(2 / window_fraction - 1e-9):
        raise DataError(f"chain of length {n} too short for window fraction {window_fraction}")
    w = int(math.floor(window_fraction * n + 1e-9))
    if w < 2:
        raise DataError(f"chain of length {n} too short for window fraction {window_fraction}")
    if alphabet is None:
        alphabet = CategoryAlphabet.of_size(int(arr.max()) + 1)
    return SegmentSet((arr[:w], arr[n - w:]), alphabet, ("head", "tail"))
