"""Shared domain types, errors, and deterministic randomness.

Every quantity in this package is a 64-bit float; seeds are plain integers
fed to numpy's seed-sequence machinery so that derived streams are
reproducible bit-for-bit across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform


class TopoprojError(Exception):
    """Base class for all errors raised by this package."""


class ParamOutOfRange(TopoprojError):
    pass


class DuplicatePoint(TopoprojError):
    pass


class DimensionMismatch(TopoprojError):
    pass


class NotPowerOfTwo(TopoprojError):
    pass


class SizeBlowup(TopoprojError):
    pass


class NonMonotoneFiltration(TopoprojError):
    pass


class DegenerateInput(TopoprojError):
    pass


class WeightsNotConvex(TopoprojError):
    pass


class EmptySet(TopoprojError):
    pass


class TooLarge(TopoprojError):
    pass


class ContractViolation(TopoprojError):
    """A mathematically guaranteed inequality failed beyond numerical slack."""


class ParseError(TopoprojError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


RngSeed = int


def substream(seed: RngSeed, *path: int) -> np.random.Generator:
    """Derive an independent, reproducible generator from a base seed.

    Identical ``(seed, path)`` always yields a bit-identical stream;
    distinct paths yield statistically independent streams.
    """
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(p) for p in path]])


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair; at least one must be positive."""

    abs: float = 0.0
    rel: float = 1e-9

    def __post_init__(self) -> None:
        if not (np.isfinite(self.abs) and np.isfinite(self.rel)):
            raise ParamOutOfRange("tolerances must be finite")
        if self.abs < 0 or self.rel < 0:
            raise ParamOutOfRange("tolerances must be nonnegative")
        if self.abs == 0 and self.rel == 0:
            raise ParamOutOfRange("at least one tolerance must be positive")

    def close(self, a: float, b: float) -> bool:
        return abs(a - b) <= self.abs + self.rel * max(abs(a), abs(b))


def _as_point_array(points) -> np.ndarray:
    try:
        arr = np.ascontiguousarray(points, dtype=np.float64)
    except (ValueError, TypeError) as exc:
        raise ParamOutOfRange(f"points are not a numeric rectangular array: {exc}") from exc
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ParamOutOfRange(f"points must be a 2-d array, got ndim={arr.ndim}")
    return arr


@dataclass(frozen=True)
class PointCloud:
    """An ordered set of n points in R^d.

    Immutable after construction: the coordinate array is write-protected,
    so clouds can be shared freely across threads.
    """

    points: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        arr = _as_point_array(self.points)
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ParamOutOfRange(f"need n >= 1 and d >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ParamOutOfRange("point coordinates must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != arr.shape[0]:
                raise ParamOutOfRange("labels must match the number of points")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric matrix of pairwise Euclidean distances with zero diagonal."""

    entries: np.ndarray
    _validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ParamOutOfRange("distance matrix must be square")
        if self._validate:
            if not np.all(np.isfinite(arr)):
                raise ParamOutOfRange("distances must be finite")
            if np.any(np.diagonal(arr) != 0.0):
                raise ParamOutOfRange("diagonal must be exactly zero")
            if np.any(arr < 0.0):
                raise ParamOutOfRange("distances must be nonnegative")
            if not np.array_equal(arr, arr.T):
                raise ParamOutOfRange("distance matrix must be symmetric")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def condensed(self) -> np.ndarray:
        """Upper-triangle entries in scipy's condensed (row-major) order."""
        iu = np.triu_indices(self.n, k=1)
        return self.entries[iu]


def pairwise_distances(cloud: PointCloud) -> DistanceMatrix:
    """All-pairs Euclidean distances; each of the n(n-1)/2 pairs is evaluated once.

    The per-entry summation order is fixed (coordinate order), so the result
    is bit-identical no matter how the computation is scheduled.
    """
    if cloud.n == 1:
        return DistanceMatrix(np.zeros((1, 1)), _validate=False)
    condensed = pdist(cloud.points)
    return DistanceMatrix(squareform(condensed), _validate=False)


def max_pairwise_distortion(x: PointCloud, y: PointCloud) -> float:
    """Worst multiplicative distance distortion between two configurations.

    Returns ``max over pairs i<j of |dist_y(i,j)/dist_x(i,j) - 1|``.
    Raises :class:`DuplicatePoint` when x contains coincident points, since
    the ratio is undefined there.
    """
    if x.n != y.n:
        raise DimensionMismatch(f"point counts differ: {x.n} vs {y.n}")
    if x.n < 2:
        return 0.0
    dx = pdist(x.points)
    if np.any(dx == 0.0):
        raise DuplicatePoint("x contains duplicate points; distortion is undefined")
    dy = pdist(y.points)
    return float(np.max(np.abs(dy / dx - 1.0)))
