"""Smallest enclosing balls, exact and weighted, plus radius-distortion checks.

The exact solver is a move-to-front recursion over support sets of at most
k+1 points; the weighted solver is an iterative core-set method (pairwise
Frank-Wolfe on the dual of the enclosing-ball program) whose primal-dual gap
is monitored directly, so its accuracy is certified rather than assumed.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .core import (
    ContractViolation,
    DegenerateInput,
    ParamOutOfRange,
    PointCloud,
    Tolerance,
    WeightsNotConvex,
    _as_point_array,
    max_pairwise_distortion,
)

# Above this point count the recursive solver gives way to the iterative one.
_RECURSION_CUTOFF = 10_000
_SHUFFLE_SEED = 0x30AB
_ORDER_CACHE: dict[int, np.ndarray] = {}


def _shuffle_order(n: int) -> np.ndarray:
    # fixed random insertion order; cached because Generator startup dominates
    # the solve for small inputs
    order = _ORDER_CACHE.get(n)
    if order is None:
        order = np.random.default_rng(_SHUFFLE_SEED + n).permutation(n)
        _ORDER_CACHE[n] = order
    return order


@dataclass(frozen=True)
class Ball:
    """Center and radius of an enclosing ball, with the boundary support set."""

    center: np.ndarray
    radius: float
    support: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        c = np.asarray(self.center, dtype=np.float64)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)

    def contains(self, point: np.ndarray, slack: float = 1e-9) -> bool:
        return float(np.linalg.norm(point - self.center)) <= self.radius + slack * (
            1.0 + self.radius
        )


@dataclass(frozen=True)
class WeightedPoints:
    """Points with nonnegative weights, measured in the power distance
    ``d_y(x)^2 = |x - y|^2 + w(y)^2``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        pts = _as_point_array(self.points)
        w = np.ascontiguousarray(self.weights, dtype=np.float64).reshape(-1)
        if w.shape[0] != pts.shape[0]:
            raise ParamOutOfRange("points and weights must have equal length")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ParamOutOfRange("weights must be finite and nonnegative")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)


def _circumball(boundary: list[np.ndarray]) -> tuple[np.ndarray | None, float]:
    """Ball having all `boundary` points on its sphere (smallest such).

    Affinely dependent supports are resolved by a minimum-norm least-squares
    solve, which ignores directions the points do not span.
    """
    if not boundary:
        return None, -1.0
    q0 = boundary[0]
    if len(boundary) == 1:
        return q0.copy(), 0.0
    rel = np.stack(boundary[1:]) - q0
    gram = 2.0 * (rel @ rel.T)
    rhs = np.einsum("ij,ij->i", rel, rel)
    try:
        coef = np.linalg.solve(gram, rhs)
        if not np.all(np.isfinite(coef)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        coef = np.linalg.lstsq(gram, rhs, rcond=1e-12)[0]
    center = q0 + coef @ rel
    r2 = float(np.dot(center - q0, center - q0))
    return center, r2


def _welzl(pts: list[np.ndarray], t: int, boundary: list[np.ndarray], k: int):
    center, r2 = _circumball(boundary)
    if len(boundary) == k + 1:
        return center, r2
    i = 0
    while i < t:
        p = pts[i]
        if center is None or float(np.dot(p - center, p - center)) > r2 + 1e-12 * (1.0 + r2):
            center, r2 = _welzl(pts, i, boundary + [p], k)
            pts.insert(0, pts.pop(i))  # move-to-front keeps hard points early
        i += 1
    return center, r2


def miniball(points) -> Ball:
    """Smallest enclosing ball of a finite point set in any dimension.

    Exact up to floating point: the returned radius is the maximum distance
    from the solved center, so every input point is enclosed by construction.
    Singletons yield radius 0. Inputs beyond 10^4 points fall back to the
    iterative solver at tolerance 1e-9.
    """
    pts = _as_point_array(points)
    if not np.all(np.isfinite(pts)):
        raise ParamOutOfRange("points must be finite")
    n, k = pts.shape
    if n == 1:
        return Ball(pts[0], 0.0, support=(0,))
    if n > _RECURSION_CUTOFF:
        res = _fw_min_ball(pts, np.einsum("ij,ij->i", pts, pts), Tolerance(rel=1e-9), 200_000)
        center = res[0]
    else:
        order = _shuffle_order(n)
        rows = [pts[i] for i in order]
        limit = sys.getrecursionlimit()
        if n + 100 > limit:
            sys.setrecursionlimit(n + 1000)
        try:
            center, _ = _welzl(rows, n, [], k)
        finally:
            sys.setrecursionlimit(limit)
    dists = np.linalg.norm(pts - center, axis=1)
    radius = float(dists.max())
    support = tuple(int(i) for i in np.flatnonzero(dists >= radius - 1e-7 * (1.0 + radius)))
    return Ball(center, radius, support=support)


def _fw_min_ball(pts: np.ndarray, b: np.ndarray, tol: Tolerance, max_iter: int):
    """Pairwise Frank-Wolfe on the dual: maximize lam.b - |X^T lam|^2 over the simplex.

    The Frank-Wolfe gap equals the primal-dual gap max_i d_i(p)^2 - h(lam)
    exactly, so termination certifies the radius. Returns
    (center, radius, converged, iterations).
    """
    n = pts.shape[0]
    lam = np.zeros(n)
    start = int(np.argmax(b))
    lam[start] = 1.0
    center = pts[start].copy()
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = b - 2.0 * (pts @ center)
        s = int(np.argmax(g))
        r2_primal = g[s] + float(np.dot(center, center))
        gap = g[s] - float(np.dot(lam, g))
        if gap <= 2.0 * (tol.rel * max(r2_primal, 0.0) + tol.abs * (1.0 + np.sqrt(max(r2_primal, 0.0)))):
            converged = True
            break
        active = np.flatnonzero(lam > 0)
        a = int(active[np.argmin(g[active])])
        if s == a:
            converged = True
            break
        direction = pts[s] - pts[a]
        denom = 2.0 * float(np.dot(direction, direction))
        if denom <= 0.0:
            # coincident points with different offsets: the objective is linear
            # along this direction, so move all the mass
            gamma = lam[a]
        else:
            gamma = min(max((g[s] - g[a]) / denom, 0.0), lam[a])
        lam[a] -= gamma
        lam[s] += gamma
        if lam[a] < 1e-17:
            lam[a] = 0.0
        center = center + gamma * direction
    g = b - 2.0 * (pts @ center)
    radius = float(np.sqrt(max(np.max(g) + float(np.dot(center, center)), 0.0)))
    return center, radius, converged, it


@dataclass(frozen=True)
class WeightedBall:
    center: np.ndarray
    radius: float
    converged: bool
    iterations: int

    @property
    def ball(self) -> Ball:
        return Ball(self.center, self.radius)


def miniball_weighted(
    wp: WeightedPoints, tol: Tolerance = Tolerance(rel=1e-9), max_iter: int = 100_000
) -> WeightedBall:
    """Smallest enclosing ball in the power distance, solved iteratively.

    Minimizes ``max_i sqrt(|p - x_i|^2 + w_i^2)`` over centers p. With all
    weights zero this agrees with :func:`miniball`. Non-convergence within
    ``max_iter`` is reported on the result rather than raised; the returned
    iterate is the best one found.
    """
    if tol.rel <= 0:
        raise ParamOutOfRange("miniball_weighted needs tol.rel > 0")
    pts, w = wp.points, wp.weights
    if pts.shape[0] == 1:
        return WeightedBall(pts[0].copy(), float(w[0]), True, 0)
    b = np.einsum("ij,ij->i", pts, pts) + w * w
    center, radius, converged, iters = _fw_min_ball(pts, b, tol, max_iter)
    return WeightedBall(center, radius, converged, iters)


def power_radius(wp: WeightedPoints, center: np.ndarray) -> float:
    """max_i sqrt(|center - x_i|^2 + w_i^2): the weighted radius at a given center."""
    d2 = np.einsum("ij,ij->i", wp.points - center, wp.points - center)
    return float(np.sqrt(np.max(d2 + wp.weights**2)))


def variance_identity_residual(points, weights) -> float:
    """Relative residual of the weighted-variance identity.

    For a convex combination c = sum lam_i x_i the identity
    ``sum_i lam_i |x_i - c|^2 = sum_{i<j} lam_i lam_j |x_j - x_i|^2``
    holds exactly; this returns |LHS - RHS| / (1 + |LHS|), which should not
    exceed ~1e-10 in double precision.
    """
    pts = _as_point_array(points)
    lam = np.ascontiguousarray(weights, dtype=np.float64).reshape(-1)
    if lam.shape[0] != pts.shape[0]:
        raise ParamOutOfRange("points and weights must have equal length")
    if np.any(lam < 0) or abs(float(lam.sum()) - 1.0) > 1e-12:
        raise WeightsNotConvex("weights must be nonnegative and sum to 1")
    c = lam @ pts
    lhs = float(lam @ np.einsum("ij,ij->i", pts - c, pts - c))
    diff2 = np.einsum("ijk,ijk->ij", pts[:, None, :] - pts[None, :, :], pts[:, None, :] - pts[None, :, :])
    rhs = 0.5 * float(lam @ diff2 @ lam)
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def hull_membership_residual(points, center) -> float:
    """Distance from feasibility of `center` as a convex combination of `points`.

    Solves the nonnegative least-squares barycentric system; a residual at or
    below ~1e-7 certifies that the center lies in the convex hull.
    """
    pts = _as_point_array(points)
    c = np.asarray(center, dtype=np.float64).reshape(-1)
    scale = max(1.0, float(np.max(np.abs(pts))))
    a = np.vstack([pts.T / scale, np.ones((1, pts.shape[0]))])
    rhs = np.concatenate([c / scale, [1.0]])
    _, resid = nnls(a, rhs)
    return float(resid)


@dataclass(frozen=True)
class RadiusDistortion:
    """Ratio of enclosing-ball radii after a map, with the map's measured
    pairwise distortion. The ratio is guaranteed inside [1-eps, 1+eps]."""

    ratio: float
    eps_emp: float

    @property
    def lower(self) -> float:
        return 1.0 - self.eps_emp

    @property
    def upper(self) -> float:
        return 1.0 + self.eps_emp


def radius_distortion(s, fs, slack: float = 1e-9) -> RadiusDistortion:
    """Compare smallest-enclosing-ball radii before and after a point map.

    Computes ``ratio = rho(fs)/rho(s)`` and the empirical pairwise distortion
    eps of fs relative to s, and verifies the enclosing-ball transfer
    guarantee ``1 - eps <= ratio <= 1 + eps`` (raising
    :class:`ContractViolation` if it fails beyond `slack`, which would
    indicate a solver defect rather than a property of the data).
    """
    a = _as_point_array(s)
    b = _as_point_array(fs)
    if a.shape[0] != b.shape[0]:
        raise ParamOutOfRange("point lists must have equal length")
    if a.shape[0] < 2:
        raise ParamOutOfRange("need at least two points")
    rho_s = miniball(a).radius
    if rho_s == 0.0:
        raise DegenerateInput("all source points coincide; radius ratio undefined")
    rho_fs = miniball(b).radius
    ratio = rho_fs / rho_s
    eps = max_pairwise_distortion(PointCloud(a), PointCloud(b))
    if not (1.0 - eps - slack <= ratio <= 1.0 + eps + slack):
        raise ContractViolation(
            f"radius ratio {ratio:.12g} escaped [1-eps, 1+eps] for eps={eps:.12g}"
        )
    return RadiusDistortion(ratio, eps)
