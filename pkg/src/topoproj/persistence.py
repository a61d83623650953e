"""Filtrations, persistence pairs, diagrams, and bottleneck distances.

Scale convention: a Vietoris-Rips simplex enters at HALF its diameter, i.e.
sigma is present at scale alpha iff all its pairwise distances are at most
2 alpha. Most other software uses the edge-length convention instead; with
the half-diameter convention the Cech and Rips values of the same simplex
satisfy ``rips <= cech <= sqrt(2) rips`` verbatim, which this module treats
as a testable invariant. Cech values are smallest-enclosing-ball radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple

import numpy as np

from .core import (
    DistanceMatrix,
    NonMonotoneFiltration,
    ParamOutOfRange,
    ParseError,
    PointCloud,
    SizeBlowup,
    pairwise_distances,
)
from .geometry import miniball

DEFAULT_SIMPLEX_CAP = 2_000_000


class Simplex(NamedTuple):
    vertices: tuple[int, ...]
    dim: int
    value: float


@dataclass(frozen=True)
class FilteredComplex:
    """Simplices with filtration values, sorted by (value, dim, vertex order).

    The sort order is the order in which columns are reduced; ties are broken
    by dimension then lexicographic vertex set so output pairs are
    reproducible.
    """

    simplices: tuple[Simplex, ...]
    n_vertices: int

    @staticmethod
    def from_entries(entries: Iterable[Simplex], n_vertices: int) -> "FilteredComplex":
        ordered = tuple(sorted(entries, key=lambda s: (s.value, s.dim, s.vertices)))
        return FilteredComplex(ordered, n_vertices)

    @property
    def max_dim(self) -> int:
        return max((s.dim for s in self.simplices), default=-1)

    def validate(self) -> None:
        """Raise NonMonotoneFiltration unless every face is present with a
        value no larger than its cofaces'."""
        index = {s.vertices: s.value for s in self.simplices}
        for s in self.simplices:
            if s.dim == 0:
                continue
            for face in combinations(s.vertices, s.dim):
                if face not in index:
                    raise NonMonotoneFiltration(f"face {face} of {s.vertices} missing")
                if index[face] > s.value:
                    raise NonMonotoneFiltration(
                        f"face {face} enters at {index[face]} after {s.vertices} at {s.value}"
                    )

    def dump(self) -> str:
        """One simplex per line: ``alpha,dim,v0;v1;...``."""
        lines = [
            f"{s.value!r},{s.dim},{';'.join(str(v) for v in s.vertices)}"
            for s in self.simplices
        ]
        return "\n".join(lines) + "\n"


def vr_filtration(
    dist: DistanceMatrix,
    max_dim: int,
    max_alpha: float = math.inf,
    simplex_cap: int = DEFAULT_SIMPLEX_CAP,
) -> FilteredComplex:
    """Vietoris-Rips filtration up to simplex dimension `max_dim`.

    A p-simplex enters at half the maximum pairwise distance of its
    vertices; vertices enter at 0. Simplices whose value would exceed
    `max_alpha` are omitted. Raises SizeBlowup beyond `simplex_cap`.
    """
    if max_dim < 0:
        raise ParamOutOfRange("max_dim must be >= 0")
    if not max_alpha > 0:
        raise ParamOutOfRange("max_alpha must be positive")
    n = dist.n
    half = dist.entries / 2.0
    entries: list[Simplex] = [Simplex((i,), 0, 0.0) for i in range(n)]
    if max_dim >= 1:
        # neighbor sets over the threshold graph, successors only
        nbrs: list[set[int]] = [set() for _ in range(n)]
        frontier: list[Simplex] = []
        for i in range(n):
            for j in range(i + 1, n):
                v = half[i, j]
                if v <= max_alpha:
                    nbrs[i].add(j)
                    frontier.append(Simplex((i, j), 1, float(v)))
        entries.extend(frontier)
        dim = 2
        while dim <= max_dim and frontier:
            nxt: list[Simplex] = []
            for s in frontier:
                common = set.intersection(*(nbrs[u] for u in s.vertices))
                for v in sorted(common):
                    value = max(s.value, float(half[list(s.vertices), v].max()))
                    if value <= max_alpha:
                        nxt.append(Simplex(s.vertices + (v,), dim, value))
                if len(entries) + len(nxt) > simplex_cap:
                    raise SizeBlowup(f"simplex count would exceed cap {simplex_cap}")
            entries.extend(nxt)
            frontier = nxt
            dim += 1
    if len(entries) > simplex_cap:
        raise SizeBlowup(f"simplex count {len(entries)} exceeds cap {simplex_cap}")
    return FilteredComplex.from_entries(entries, n)


def _triangle_radius(e: np.ndarray) -> np.ndarray:
    """Smallest-enclosing-ball radius of triangles from their edge lengths.

    `e` has shape (t, 3). Obtuse/right triangles take half the longest edge;
    acute ones the circumradius, via the numerically stable area formula
    (requires sorted edges a >= b >= c).
    """
    s = np.sort(e, axis=1)[:, ::-1]
    a, b, c = s[:, 0], s[:, 1], s[:, 2]
    obtuse = a * a >= b * b + c * c
    area_sq = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    area = 0.25 * np.sqrt(np.maximum(area_sq, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        circum = (a * b * c) / (4.0 * area)
    return np.where(obtuse, a / 2.0, circum)


def cech_filtration(
    cloud: PointCloud,
    max_dim: int,
    max_alpha: float = math.inf,
    simplex_cap: int = DEFAULT_SIMPLEX_CAP,
) -> FilteredComplex:
    """Cech filtration: a simplex enters at its smallest-enclosing-ball radius.

    Candidate simplices are enumerated from the Rips filtration at the same
    scale (every Cech simplex is a Rips simplex) and revalued; the result is
    re-sorted by the Cech values.
    """
    dist = pairwise_distances(cloud)
    candidates = vr_filtration(dist, max_dim, max_alpha, simplex_cap)
    pts = cloud.points
    dmat = dist.entries
    by_dim: dict[int, list[Simplex]] = {}
    for s in candidates.simplices:
        by_dim.setdefault(s.dim, []).append(s)
    # enclosing radii; triangles in one vectorized batch, higher dims one by one
    raw: dict[tuple[int, ...], float] = {}
    for s in by_dim.get(0, []):
        raw[s.vertices] = 0.0
    for s in by_dim.get(1, []):
        raw[s.vertices] = s.value  # two-point ball radius = half the length
    tris = by_dim.get(2, [])
    if tris:
        edges = np.array(
            [
                (
                    dmat[s.vertices[0], s.vertices[1]],
                    dmat[s.vertices[0], s.vertices[2]],
                    dmat[s.vertices[1], s.vertices[2]],
                )
                for s in tris
            ]
        )
        for s, r in zip(tris, _triangle_radius(edges)):
            raw[s.vertices] = float(r)
    for dim in sorted(by_dim):
        if dim < 3:
            continue
        for s in by_dim[dim]:
            raw[s.vertices] = miniball(pts[list(s.vertices)]).radius
    # The exact radius never drops below a face's radius; clamping repairs the
    # last-ulp rounding that could otherwise break filtration monotonicity.
    entries: list[Simplex] = []
    values: dict[tuple[int, ...], float] = {}
    for dim in sorted(by_dim):
        for s in by_dim[dim]:
            value = raw[s.vertices]
            if dim >= 1:
                for face in combinations(s.vertices, dim):
                    fv = values.get(face)
                    if fv is None:
                        value = math.inf  # a face fell past max_alpha; drop coface
                        break
                    if fv > value:
                        value = fv
            if value <= max_alpha:
                values[s.vertices] = value
                entries.append(Simplex(s.vertices, dim, value))
    return FilteredComplex.from_entries(entries, cloud.n)


class PersistencePair(NamedTuple):
    dim: int
    birth: float
    death: float  # math.inf for essential classes
    birth_index: int
    death_index: int  # -1 for essential classes

    @property
    def zero_length(self) -> bool:
        return self.birth == self.death


@dataclass(frozen=True)
class PersistencePairs:
    """All persistence pairs of a reduction, zero-length ones included.

    Zero-length pairs (birth equals death) are kept so that simplex-level
    accounting stays exact, but they are flagged and dropped when diagrams
    are formed.
    """

    pairs: tuple[PersistencePair, ...]

    def nonzero(self) -> tuple[PersistencePair, ...]:
        return tuple(p for p in self.pairs if not p.zero_length)

    def essential(self) -> tuple[PersistencePair, ...]:
        return tuple(p for p in self.pairs if math.isinf(p.death))

    def key_set(self) -> set[tuple[int, int, int]]:
        """(dim, birth_index, death_index) triples, for exact comparisons."""
        return {(p.dim, p.birth_index, p.death_index) for p in self.pairs}


def _prepare_columns(fc: FilteredComplex):
    index = {}
    for i, s in enumerate(fc.simplices):
        if s.vertices in index:
            raise NonMonotoneFiltration(f"duplicate simplex {s.vertices}")
        index[s.vertices] = i
    boundaries: list[list[int]] = []
    for i, s in enumerate(fc.simplices):
        if s.dim == 0:
            boundaries.append([])
            continue
        faces = []
        for face in combinations(s.vertices, s.dim):
            j = index.get(face)
            if j is None:
                raise NonMonotoneFiltration(f"face {face} of {s.vertices} missing")
            if fc.simplices[j].value > s.value or j > i:
                raise NonMonotoneFiltration(
                    f"face {face} enters after its coface {s.vertices}"
                )
            faces.append(j)
        boundaries.append(faces)
    return boundaries


def reduce_boundary(fc: FilteredComplex) -> PersistencePairs:
    """Persistence pairs by column reduction over F2 with the clearing twist.

    Dimensions are processed top-down; whenever a column acquires a pivot,
    the column indexed by that pivot row is known to reduce to zero and is
    skipped ("cleared") when its dimension is reached. Columns are stored as
    integer bitmasks, reduced by XOR, highest set bit as pivot.
    """
    faces = _prepare_columns(fc)
    sims = fc.simplices
    by_dim: dict[int, list[int]] = {}
    for j, s in enumerate(sims):
        by_dim.setdefault(s.dim, []).append(j)
    killed: dict[int, int] = {}  # birth row -> death column
    for dim in sorted(by_dim, reverse=True):
        if dim == 0:
            continue
        pivots: dict[int, int] = {}
        for j in by_dim[dim]:
            if j in killed:
                continue  # cleared: j was a pivot row one dimension up
            col = 0
            for f in faces[j]:
                col ^= 1 << f
            while col:
                low = col.bit_length() - 1
                other = pivots.get(low)
                if other is None:
                    pivots[low] = col
                    killed[low] = j
                    break
                col ^= other
    deaths = set(killed.values())
    pairs = [
        PersistencePair(sims[r].dim, sims[r].value, sims[j].value, r, j)
        for r, j in killed.items()
    ]
    for j in range(len(sims)):
        if j not in killed and j not in deaths:
            pairs.append(PersistencePair(sims[j].dim, sims[j].value, math.inf, j, -1))
    pairs.sort(key=lambda p: (p.dim, p.birth, p.death, p.birth_index))
    return PersistencePairs(tuple(pairs))


def reduce_boundary_naive(fc: FilteredComplex) -> PersistencePairs:
    """Straightforward left-to-right column reduction, no optimizations.

    Kept as an independent implementation for cross-checking: columns are
    Python sets, every column is reduced in filtration order, and no
    clearing is applied.
    """
    faces = _prepare_columns(fc)
    sims = fc.simplices
    columns = [set(f) for f in faces]
    low_of: dict[int, int] = {}
    pairs = []
    deaths = set()
    for j in range(len(sims)):
        col = columns[j]
        while col:
            low = max(col)
            if low not in low_of:
                break
            col ^= columns[low_of[low]]
        if col:
            low = max(col)
            low_of[low] = j
            columns[j] = col
            pairs.append(
                PersistencePair(sims[low].dim, sims[low].value, sims[j].value, low, j)
            )
            deaths.add(j)
    killed = set(low_of)
    for j in range(len(sims)):
        if j not in killed and j not in deaths:
            pairs.append(PersistencePair(sims[j].dim, sims[j].value, math.inf, j, -1))
    pairs.sort(key=lambda p: (p.dim, p.birth, p.death, p.birth_index))
    return PersistencePairs(tuple(pairs))


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) points of one homological dimension."""

    dim: int
    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        for b, d in self.points:
            if not d > b:
                raise ParamOutOfRange(f"diagram point ({b}, {d}) not above the diagonal")
        object.__setattr__(self, "points", tuple(sorted(self.points)))

    @property
    def finite(self) -> tuple[tuple[float, float], ...]:
        return tuple(p for p in self.points if math.isfinite(p[1]))

    @property
    def infinite(self) -> tuple[tuple[float, float], ...]:
        return tuple(p for p in self.points if math.isinf(p[1]))


def diagrams(pairs: PersistencePairs, max_dim: int) -> list[PersistenceDiagram]:
    """Group pairs into one diagram per dimension 0..max_dim, dropping
    zero-length pairs (their points sit on the diagonal)."""
    buckets: dict[int, list[tuple[float, float]]] = {p: [] for p in range(max_dim + 1)}
    for pair in pairs.pairs:
        if pair.zero_length or pair.dim > max_dim:
            continue
        buckets[pair.dim].append((pair.birth, pair.death))
    return [PersistenceDiagram(p, tuple(buckets[p])) for p in range(max_dim + 1)]


def _saturates(adj: np.ndarray, must_rows: np.ndarray) -> bool:
    """Kuhn's algorithm: can all `must_rows` of the boolean adjacency matrix
    be matched simultaneously?"""
    n_cols = adj.shape[1]
    match_col = -np.ones(n_cols, dtype=int)

    def try_row(r: int, seen: np.ndarray) -> bool:
        for c in np.flatnonzero(adj[r] & ~seen):
            seen[c] = True
            if match_col[c] < 0 or try_row(match_col[c], seen):
                match_col[c] = r
                return True
        return False

    for r in must_rows:
        if not try_row(int(r), np.zeros(n_cols, dtype=bool)):
            return False
    return True


def bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Exact bottleneck distance between two diagrams of the same dimension.

    Infinity-norm ground cost with diagonal projections; computed by binary
    search over the finitely many candidate costs, with a bipartite-matching
    feasibility test at each candidate. Infinite bars must match in count
    (otherwise the distance is infinite) and pair up by sorted birth.
    """
    if d1.dim != d2.dim:
        raise ParamOutOfRange("diagrams must have the same homological dimension")
    inf1 = sorted(b for b, _ in d1.infinite)
    inf2 = sorted(b for b, _ in d2.infinite)
    if len(inf1) != len(inf2):
        return math.inf
    inf_cost = max((abs(a - b) for a, b in zip(inf1, inf2)), default=0.0)
    p1 = d1.finite
    p2 = d2.finite
    if not p1 and not p2:
        return inf_cost
    delta1 = np.array([(d - b) / 2.0 for b, d in p1])
    delta2 = np.array([(d - b) / 2.0 for b, d in p2])
    if not p1 or not p2:
        one_sided = max(delta1.max() if len(delta1) else 0.0, delta2.max() if len(delta2) else 0.0)
        return max(inf_cost, float(one_sided))
    b1 = np.array([b for b, _ in p1])[:, None]
    e1 = np.array([d for _, d in p1])[:, None]
    b2 = np.array([b for b, _ in p2])[None, :]
    e2 = np.array([d for _, d in p2])[None, :]
    cost = np.maximum(np.abs(b1 - b2), np.abs(e1 - e2))
    cands = np.unique(np.concatenate([cost.ravel(), delta1, delta2, [0.0]]))

    def feasible(t: float) -> bool:
        # Mendelsohn-Dulmage: a matching covering the must-match points of
        # both sides exists iff each side can be saturated separately.
        adj = cost <= t
        must1 = np.flatnonzero(delta1 > t)
        must2 = np.flatnonzero(delta2 > t)
        if must1.size and not _saturates(adj, must1):
            return False
        if must2.size and not _saturates(adj.T, must2):
            return False
        return True

    lo, hi = 0, len(cands) - 1
    if not feasible(float(cands[hi])):  # cannot happen: max candidate always feasible
        return math.inf
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(float(cands[mid])):
            hi = mid
        else:
            lo = mid + 1
    return max(inf_cost, float(cands[lo]))


def default_log_floor(*diags: PersistenceDiagram) -> float:
    """Half the minimum positive coordinate across the given diagrams (1.0 if none)."""
    vals = [
        c
        for dg in diags
        for point in dg.points
        for c in point
        if math.isfinite(c) and c > 0
    ]
    return min(vals) / 2.0 if vals else 1.0


def log_bottleneck(
    d1: PersistenceDiagram, d2: PersistenceDiagram, floor: float | None = None
) -> float:
    """Bottleneck distance after mapping coordinates through the natural log.

    Coordinates at or below `floor` are clamped to it first (connected
    components are born at exactly 0, which the log cannot take). By default
    the floor is half the minimum positive coordinate across both diagrams,
    so only exact zeros are affected.
    """
    if floor is None:
        floor = default_log_floor(d1, d2)
    if not floor > 0:
        raise ParamOutOfRange("floor must be positive")

    def transform(dg: PersistenceDiagram) -> PersistenceDiagram:
        pts = tuple(
            (
                math.log(max(b, floor)),
                math.inf if math.isinf(d) else math.log(max(d, floor)),
            )
            for b, d in dg.points
        )
        return PersistenceDiagram(dg.dim, pts)

    return bottleneck(transform(d1), transform(d2))


def interleaving_check(
    dx: PersistenceDiagram,
    dy: PersistenceDiagram,
    eps: float,
    floor: float | None = None,
    slack: float = 1e-9,
) -> bool:
    """True iff the diagrams are within the log-scale interleaving budget
    ln(1/(1-eps)) of each other (plus numerical slack)."""
    if not 0 < eps < 1:
        raise ParamOutOfRange(f"eps must lie in (0,1), got {eps}")
    return log_bottleneck(dx, dy, floor) <= math.log(1.0 / (1.0 - eps)) + slack


def diagrams_to_csv(diags: Iterable[PersistenceDiagram]) -> str:
    """CSV rows ``dim,birth,death`` with `inf` for infinite deaths."""
    lines = ["dim,birth,death"]
    for dg in diags:
        for b, d in dg.points:
            lines.append(f"{dg.dim},{b!r},{'inf' if math.isinf(d) else repr(d)}")
    return "\n".join(lines) + "\n"


def diagrams_from_csv(text: str) -> list[PersistenceDiagram]:
    buckets: dict[int, list[tuple[float, float]]] = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("dim,"):
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected dim,birth,death, got {line!r}", line=ln)
        try:
            dim = int(parts[0])
            birth = float(parts[1])
            death = math.inf if parts[2].strip() == "inf" else float(parts[2])
        except ValueError as exc:
            raise ParseError(str(exc), line=ln) from exc
        buckets.setdefault(dim, []).append((birth, death))
    if not buckets:
        return []
    top = max(buckets)
    return [PersistenceDiagram(p, tuple(buckets.get(p, []))) for p in range(top + 1)]
