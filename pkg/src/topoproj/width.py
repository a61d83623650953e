"""Gaussian width estimation, closed-form width bounds, spread, and doubling dimension.

The Gaussian width ``w(T) = E[sup_{x in T} <x, g>]`` of the normalized
difference set of a cloud is what sizes the random projection. It is only
available by Monte Carlo here, so every estimate carries a standard error
and every inequality test against it uses multi-standard-error guard bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DistanceMatrix,
    DuplicatePoint,
    EmptySet,
    ParamOutOfRange,
    PointCloud,
    RngSeed,
    TooLarge,
    pairwise_distances,
    substream,
)
from .geometry import miniball

_WIDTH_TAG = 0x5754
_DOUBLING_CAP = 512
DEFAULT_MC_SAMPLES = 4096


@dataclass(frozen=True)
class DirectionSet:
    """A multiset of unit vectors (duplicates allowed; sup is unaffected)."""

    directions: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.directions, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ParamOutOfRange("directions must be a nonempty 2-d array")
        norms = np.linalg.norm(arr, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise ParamOutOfRange("directions must be unit vectors (to 1e-10)")
        arr.setflags(write=False)
        object.__setattr__(self, "directions", arr)

    @property
    def size(self) -> int:
        return self.directions.shape[0]

    @property
    def d(self) -> int:
        return self.directions.shape[1]


@dataclass(frozen=True)
class WidthEstimate:
    mean: float
    std_error: float
    num_samples: int

    def squared(self) -> tuple[float, float]:
        """Width squared with its propagated standard error (2 |w| SE)."""
        return self.mean**2, 2.0 * abs(self.mean) * self.std_error


def normalized_differences(cloud: PointCloud) -> DirectionSet:
    """The n(n-1) unit directions (x_i - x_j)/|x_i - x_j| over ordered pairs.

    Closed under negation by construction; duplicates (e.g. from collinear
    points) are kept. Raises :class:`DuplicatePoint` on coincident points.
    """
    pts = cloud.points
    n = pts.shape[0]
    if n < 2:
        raise ParamOutOfRange("need at least two points")
    diffs = pts[:, None, :] - pts[None, :, :]
    mask = ~np.eye(n, dtype=bool)
    flat = diffs[mask]
    norms = np.linalg.norm(flat, axis=1)
    if np.any(norms == 0.0):
        raise DuplicatePoint("cloud contains duplicate points")
    return DirectionSet(flat / norms[:, None])


def gaussian_width_mc(
    t: DirectionSet, k: int = DEFAULT_MC_SAMPLES, seed: RngSeed = 0
) -> WidthEstimate:
    """Monte Carlo estimate of E[sup_{x in T} <x, g>] over k Gaussian draws.

    The Gaussian sample stream depends only on (k, d, seed), never on the
    contents of T, so estimates over nested direction sets evaluated with
    the same arguments are exactly monotone. Deterministic in the seed.
    """
    if t.size == 0:
        raise EmptySet("direction set is empty")
    if k < 2:
        raise ParamOutOfRange("need k >= 2 samples")
    rng = substream(seed, _WIDTH_TAG, k, t.d)
    g = rng.standard_normal((k, t.d))
    sups = np.empty(k)
    step = max(1, int(2**22 // max(t.size, 1)))  # keep the k x |T| product in cache-sized blocks
    for lo in range(0, k, step):
        hi = min(lo + step, k)
        sups[lo:hi] = (g[lo:hi] @ t.directions.T).max(axis=1)
    mean = float(sups.mean())
    se = float(sups.std(ddof=1) / math.sqrt(k))
    return WidthEstimate(mean, se, k)


def width_bound_discrete(n: int) -> float:
    """sqrt(2 ln n): width bound for any n unit vectors."""
    if n < 1:
        raise ParamOutOfRange(f"need n >= 1, got {n}")
    return math.sqrt(2.0 * math.log(n))


def width_bound_sparse(s: int, d: int, c: float) -> float:
    """sqrt(c s ln(d/s)): width bound for s-sparse unit vectors in R^d.

    Degenerates to 0 at s = d; callers should floor at the sphere bound.
    """
    if not 1 <= s <= d:
        raise ParamOutOfRange(f"need 1 <= s <= d, got s={s}, d={d}")
    if c <= 0:
        raise ParamOutOfRange("c must be positive")
    return math.sqrt(c * s * math.log(d / s))


def width_bound_sphere(m: int) -> float:
    """sqrt(m): the width of the unit sphere of an m-dimensional subspace."""
    if m < 1:
        raise ParamOutOfRange(f"need m >= 1, got {m}")
    return math.sqrt(m)


@dataclass(frozen=True)
class SpreadStats:
    diameter: float
    min_distance: float

    @property
    def spread(self) -> float:
        return self.diameter / self.min_distance


def spread(dist: DistanceMatrix) -> SpreadStats:
    """Diameter and smallest positive pairwise distance of a finite metric space."""
    if dist.n < 2:
        raise ParamOutOfRange("need at least two points")
    off = dist.condensed()
    mn = float(off.min())
    if mn == 0.0:
        raise DuplicatePoint("zero off-diagonal distance; spread undefined")
    return SpreadStats(diameter=float(off.max()), min_distance=mn)


@dataclass(frozen=True)
class DoublingEstimate:
    doubling_constant: int
    dimension: float


def _enclosing_radius_3(a: float, b: float, c: float) -> float:
    # smallest enclosing radius of a triangle from its edge lengths
    if b > a:
        a, b = b, a
    if c > a:
        a, c = c, a
    if c > b:
        b, c = c, b
    if a * a >= b * b + c * c:
        return a / 2.0
    area_sq = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return a * b * c / math.sqrt(max(area_sq, 1e-300))


def _greedy_half_cover(pts: np.ndarray, dsub: np.ndarray, half: float) -> int:
    """Greedy count of radius-`half` balls (centers unrestricted) covering pts.

    A subset fits in one ball iff its smallest enclosing ball has radius at
    most `half`. Each round seeds a cluster at the first uncovered point and
    grows it nearest-first; the enclosing radius only grows as points are
    added, so a rejected point can never fit later and one pass suffices.
    The count is an upper estimate of the minimum cover size.
    """
    uncovered = list(range(pts.shape[0]))
    balls = 0
    slack = half * (1.0 + 1e-9)
    two = 2.0 * slack
    while uncovered:
        q = uncovered[0]
        cluster = [q]
        cands = [z for z in uncovered[1:] if dsub[q, z] <= two]
        cands.sort(key=lambda z: dsub[q, z])
        for z in cands:
            if any(dsub[u, z] > two for u in cluster):
                continue  # some pair would exceed the ball's diameter
            k = len(cluster)
            if k == 1:
                r = dsub[q, z] / 2.0
            elif k == 2:
                r = _enclosing_radius_3(
                    dsub[cluster[0], cluster[1]], dsub[cluster[0], z], dsub[cluster[1], z]
                )
            else:
                r = miniball(pts[cluster + [z]]).radius
            if r <= slack:
                cluster.append(z)
        covered = set(cluster)
        uncovered = [z for z in uncovered if z not in covered]
        balls += 1
    return balls


def doubling_dimension(cloud: PointCloud, cap: int = _DOUBLING_CAP) -> DoublingEstimate:
    """Greedy upper estimate of the doubling constant of a finite point set.

    For every point p and every radius R among the pairwise distances, the
    points within R of p are covered greedily by balls of radius R/2 whose
    centers may sit anywhere in the ambient space (a candidate subset fits
    iff its smallest enclosing ball has radius <= R/2). The doubling
    constant is the largest cover size found; the dimension is its log2.
    Brute-force only: inputs above `cap` points are rejected.
    """
    n = cloud.n
    if n > cap:
        raise TooLarge(f"doubling estimate is brute-force; n={n} exceeds cap={cap}")
    if n == 1:
        return DoublingEstimate(1, 0.0)
    pts = cloud.points
    dmat = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    lam = 1
    # For a fixed center, only the radii where the ball gains a member matter:
    # a larger radius with the same members covers at least as easily.
    for p in range(n):
        order = np.argsort(dmat[p], kind="stable")
        dists = dmat[p][order]
        for k in range(1, n):
            r = float(dists[k])
            if r <= 0.0:
                continue
            if k + 1 < n and dists[k + 1] <= r * (1 + 1e-12):
                continue  # tie: evaluate once, with all equidistant members
            members = order[: k + 1]
            count = _greedy_half_cover(pts[members], dmat[np.ix_(members, members)], r / 2.0)
            lam = max(lam, count)
    return DoublingEstimate(lam, math.log2(lam))


@dataclass(frozen=True)
class WidthDoublingReport:
    """Two-sided check of width^2 against spread/doubling bounds.

    ``lhs = (36/25) spread^-2 dim`` and ``rhs = 227 spread^2 dim`` bracket
    the squared width of the normalized difference set; the comparison uses
    a 5-standard-error guard band on the Monte Carlo estimate of width^2.
    """

    lhs: float
    w2: float
    rhs: float
    passed: bool
    width: WidthEstimate = field(repr=False)
    se_w2: float = 0.0
    spread: float = 0.0
    doubling_dimension: float = 0.0

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "w2": self.w2,
            "rhs": self.rhs,
            "pass": self.passed,
            "width_mean": self.width.mean,
            "width_std_error": self.width.std_error,
            "se_w2": self.se_w2,
            "spread": self.spread,
            "doubling_dimension": self.doubling_dimension,
        }


def check_width_doubling(
    cloud: PointCloud, mc_samples: int = DEFAULT_MC_SAMPLES, seed: RngSeed = 0
) -> WidthDoublingReport:
    """Verify (36/25) spread^-2 dim <= w^2(T) <= 227 spread^2 dim on a cloud.

    T is the normalized difference set; w^2 is estimated by Monte Carlo and
    compared with a 5-SE guard band (SE propagated to the squared scale).
    """
    est = gaussian_width_mc(normalized_differences(cloud), mc_samples, seed)
    w2, se_w2 = est.squared()
    stats = spread(pairwise_distances(cloud))
    dim = doubling_dimension(cloud).dimension
    lhs = (36.0 / 25.0) * stats.spread**-2 * dim
    rhs = 227.0 * stats.spread**2 * dim
    passed = (lhs - 5.0 * se_w2 <= w2) and (w2 <= rhs + 5.0 * se_w2)
    return WidthDoublingReport(
        lhs=lhs,
        w2=w2,
        rhs=rhs,
        passed=passed,
        width=est,
        se_w2=se_w2,
        spread=stats.spread,
        doubling_dimension=dim,
    )
