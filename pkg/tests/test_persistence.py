import math
from itertools import combinations

import numpy as np
import pytest

from topoproj import (
    FilteredComplex,
    NonMonotoneFiltration,
    ParamOutOfRange,
    PersistenceDiagram,
    PointCloud,
    Simplex,
    SizeBlowup,
    bottleneck,
    cech_filtration,
    diagrams,
    diagrams_from_csv,
    diagrams_to_csv,
    interleaving_check,
    log_bottleneck,
    pairwise_distances,
    reduce_boundary,
    reduce_boundary_naive,
    vr_filtration,
)

from conftest import circle_points, equilateral_triangle, random_cloud


def brute_force_vr(dist, max_dim, max_alpha=math.inf):
    """Oracle: enumerate every vertex subset directly."""
    n = dist.n
    out = []
    for size in range(1, max_dim + 2):
        for verts in combinations(range(n), size):
            value = max(
                (dist.entries[i, j] / 2.0 for i, j in combinations(verts, 2)),
                default=0.0,
            )
            if value <= max_alpha:
                out.append(Simplex(verts, size - 1, value))
    return FilteredComplex.from_entries(out, n)


def euler_identity_holds(fc, pairs):
    """At every filtration value, alternating bar counts equal alternating
    simplex counts (exactly, as integers)."""
    for alpha in sorted({s.value for s in fc.simplices}):
        bars = sum(
            (-1) ** p.dim for p in pairs.pairs if p.birth <= alpha and alpha < p.death
        )
        simplices = sum((-1) ** s.dim for s in fc.simplices if s.value <= alpha)
        if bars != simplices:
            return False
    return True


class TestVrFiltration:
    def test_three_points_distance_two(self):
        fc = vr_filtration(pairwise_distances(equilateral_triangle()), 2)
        by_dim = {}
        for s in fc.simplices:
            by_dim.setdefault(s.dim, []).append(s)
        assert [s.value for s in by_dim[0]] == [0.0, 0.0, 0.0]
        assert all(abs(s.value - 1.0) < 1e-9 for s in by_dim[1])
        assert len(by_dim[2]) == 1 and abs(by_dim[2][0].value - 1.0) < 1e-9

    def test_edge_at_half_distance(self):
        fc = vr_filtration(pairwise_distances(PointCloud(np.array([[0.0], [3.0]]))), 1)
        edge = [s for s in fc.simplices if s.dim == 1][0]
        assert edge.value == 1.5

    def test_matches_brute_force(self, rng):
        for _ in range(10):
            cloud = random_cloud(rng, 6, 3)
            dist = pairwise_distances(cloud)
            alpha = float(rng.uniform(0.5, 1.5))
            ours = vr_filtration(dist, 2, alpha)
            oracle = brute_force_vr(dist, 2, alpha)
            assert ours.simplices == oracle.simplices

    def test_max_alpha_truncates(self, rng):
        dist = pairwise_distances(random_cloud(rng, 8, 2))
        fc = vr_filtration(dist, 1, 0.3)
        assert all(s.value <= 0.3 for s in fc.simplices)

    def test_size_cap(self, rng):
        dist = pairwise_distances(random_cloud(rng, 12, 2))
        with pytest.raises(SizeBlowup):
            vr_filtration(dist, 4, simplex_cap=50)

    def test_sorted_and_monotone(self, rng):
        fc = vr_filtration(pairwise_distances(random_cloud(rng, 7, 3)), 2)
        keys = [(s.value, s.dim, s.vertices) for s in fc.simplices]
        assert keys == sorted(keys)
        fc.validate()


class TestCechFiltration:
    def test_edges_match_rips(self, rng):
        cloud = random_cloud(rng, 6, 2)
        vr = vr_filtration(pairwise_distances(cloud), 1)
        cech = cech_filtration(cloud, 1)
        assert vr.simplices == cech.simplices

    def test_equilateral_triangle_circumradius(self):
        fc = cech_filtration(equilateral_triangle(), 2)
        tri = [s for s in fc.simplices if s.dim == 2][0]
        assert tri.value == pytest.approx(2.0 / math.sqrt(3), abs=1e-9)

    def test_sandwich_on_random_planar_clouds(self, rng):
        for _ in range(20):
            cloud = random_cloud(rng, 7, 2)
            vr = {s.vertices: s.value for s in vr_filtration(pairwise_distances(cloud), 3).simplices}
            cech = cech_filtration(cloud, 3)
            for s in cech.simplices:
                v = vr[s.vertices]
                assert v <= s.value + 1e-9
                assert s.value <= math.sqrt(2.0) * v + 1e-9

    def test_monotone(self, rng):
        cech = cech_filtration(random_cloud(rng, 8, 3), 3)
        cech.validate()


class TestReduction:
    def test_single_vertex(self):
        fc = FilteredComplex.from_entries([Simplex((0,), 0, 0.0)], 1)
        pairs = reduce_boundary(fc)
        assert len(pairs.pairs) == 1
        p = pairs.pairs[0]
        assert p.dim == 0 and p.birth == 0.0 and math.isinf(p.death)

    def test_triangle_hand_reduction(self):
        fc = vr_filtration(pairwise_distances(equilateral_triangle()), 2)
        pairs = reduce_boundary(fc)
        h0 = [p for p in pairs.pairs if p.dim == 0]
        h1 = [p for p in pairs.pairs if p.dim == 1]
        finite_h0 = [p for p in h0 if math.isfinite(p.death)]
        assert len(h0) == 3 and len(finite_h0) == 2
        assert all(p.birth == 0.0 and abs(p.death - 1.0) < 1e-9 for p in finite_h0)
        assert sum(math.isinf(p.death) for p in h0) == 1
        # the 1-cycle appears and is filled at the same value: flagged, not real
        assert len(h1) == 1 and h1[0].zero_length

    def test_circle20_single_prominent_h1(self):
        fc = vr_filtration(pairwise_distances(circle_points(20)), 2)
        pairs = reduce_boundary(fc)
        assert pairs.key_set() == reduce_boundary_naive(fc).key_set()
        h1 = diagrams(pairs, 1)[1].points
        assert len(h1) == 1
        birth, death = h1[0]
        assert death - birth > 0.3
        assert birth == pytest.approx(math.sin(math.pi / 20.0), abs=1e-12)

    def test_clearing_equals_naive_on_random_complexes(self, rng):
        for _ in range(25):
            cloud = random_cloud(rng, int(rng.integers(3, 9)), 3)
            fc = vr_filtration(pairwise_distances(cloud), 2)
            opt = reduce_boundary(fc)
            naive = reduce_boundary_naive(fc)
            assert opt.key_set() == naive.key_set()
            assert euler_identity_holds(fc, opt)

    def test_non_monotone_rejected(self):
        bad = FilteredComplex(
            (
                Simplex((0,), 0, 0.0),
                Simplex((1,), 0, 0.0),
                Simplex((0, 1), 1, 1.0),
            ),
            2,
        )
        ok = reduce_boundary(bad)  # this one is fine
        assert len(ok.pairs) == 2  # one merge pair + one essential component
        missing_face = FilteredComplex(
            (Simplex((0,), 0, 0.0), Simplex((0, 1), 1, 1.0)), 2
        )
        with pytest.raises(NonMonotoneFiltration):
            reduce_boundary(missing_face)
        late_face = FilteredComplex.from_entries(
            [
                Simplex((0,), 0, 0.0),
                Simplex((1,), 0, 2.0),
                Simplex((0, 1), 1, 1.0),
            ],
            2,
        )
        with pytest.raises(NonMonotoneFiltration):
            reduce_boundary(late_face)


class TestDiagrams:
    def test_triangle_h0_diagram(self):
        fc = vr_filtration(pairwise_distances(equilateral_triangle()), 2)
        dgs = diagrams(reduce_boundary(fc), 1)
        h0 = dgs[0].points
        assert len(h0) == 3
        assert sum(math.isinf(d) for _, d in h0) == 1
        assert dgs[1].points == ()  # zero-length bar dropped

    def test_empty_pairs(self):
        from topoproj import PersistencePairs

        assert diagrams(PersistencePairs(()), 1) == [
            PersistenceDiagram(0, ()),
            PersistenceDiagram(1, ()),
        ]

    def test_multiplicity_preserved(self):
        from topoproj import PersistencePair, PersistencePairs

        pairs = PersistencePairs(
            (
                PersistencePair(0, 0.0, 1.0, 0, 1),
                PersistencePair(0, 0.0, 1.0, 2, 3),
            )
        )
        assert diagrams(pairs, 0)[0].points == ((0.0, 1.0), (0.0, 1.0))

    def test_diagonal_points_rejected(self):
        with pytest.raises(ParamOutOfRange):
            PersistenceDiagram(0, ((1.0, 1.0),))


class TestBottleneck:
    def test_identical_zero(self, rng):
        pts = tuple((float(b), float(b) + float(d)) for b, d in rng.uniform(0.1, 2, (6, 2)))
        dg = PersistenceDiagram(1, pts)
        assert bottleneck(dg, dg) == 0.0

    def test_two_singletons(self):
        a = PersistenceDiagram(1, ((0.0, 1.0),))
        b = PersistenceDiagram(1, ((0.0, 1.2),))
        assert bottleneck(a, b) == pytest.approx(0.2, abs=1e-12)

    def test_singleton_versus_empty(self):
        a = PersistenceDiagram(1, ((0.0, 1.0),))
        b = PersistenceDiagram(1, ())
        assert bottleneck(a, b) == pytest.approx(0.5, abs=1e-12)

    def test_diagonal_beats_far_match(self):
        a = PersistenceDiagram(0, ((0.0, 0.2),))
        b = PersistenceDiagram(0, ((5.0, 5.2),))
        assert bottleneck(a, b) == pytest.approx(0.1, abs=1e-12)

    def test_symmetry_and_triangle_inequality(self, rng):
        def rand_dg(k):
            pts = []
            for _ in range(k):
                b = float(rng.uniform(0, 1))
                pts.append((b, b + float(rng.uniform(0.05, 1))))
            return PersistenceDiagram(0, tuple(pts))

        for _ in range(15):
            x, y, z = rand_dg(4), rand_dg(6), rand_dg(5)
            dxy, dyx = bottleneck(x, y), bottleneck(y, x)
            assert dxy == dyx
            assert bottleneck(x, z) <= dxy + bottleneck(y, z) + 1e-12

    def test_infinite_bars(self):
        a = PersistenceDiagram(0, ((0.0, math.inf), (0.0, 1.0)))
        b = PersistenceDiagram(0, ((0.3, math.inf), (0.0, 1.0)))
        assert bottleneck(a, b) == pytest.approx(0.3, abs=1e-12)
        c = PersistenceDiagram(0, ((0.0, 1.0),))
        assert bottleneck(a, c) == math.inf

    def test_dimension_mismatch(self):
        with pytest.raises(ParamOutOfRange):
            bottleneck(PersistenceDiagram(0, ()), PersistenceDiagram(1, ()))

    def test_matches_exhaustive_oracle(self, rng):
        from itertools import combinations as combos
        from itertools import permutations

        def brute(p1, p2):
            best = math.inf
            n1, n2 = len(p1), len(p2)
            for k in range(min(n1, n2) + 1):
                for sub1 in combos(range(n1), k):
                    rest1 = [i for i in range(n1) if i not in sub1]
                    for sub2 in combos(range(n2), k):
                        rest2 = [j for j in range(n2) if j not in sub2]
                        for perm in permutations(sub2):
                            cost = 0.0
                            for i, j in zip(sub1, perm):
                                cost = max(
                                    cost,
                                    abs(p1[i][0] - p2[j][0]),
                                    abs(p1[i][1] - p2[j][1]),
                                )
                            for i in rest1:
                                cost = max(cost, (p1[i][1] - p1[i][0]) / 2.0)
                            for j in rest2:
                                cost = max(cost, (p2[j][1] - p2[j][0]) / 2.0)
                            best = min(best, cost)
            return best

        for _ in range(50):
            def rand_points(k):
                pts = []
                for _ in range(k):
                    b = float(rng.uniform(0, 2))
                    pts.append((b, b + float(rng.uniform(0.01, 2))))
                return tuple(pts)

            p1 = rand_points(int(rng.integers(0, 5)))
            p2 = rand_points(int(rng.integers(0, 5)))
            ours = bottleneck(PersistenceDiagram(0, p1), PersistenceDiagram(0, p2))
            assert ours == pytest.approx(brute(p1, p2), abs=1e-12)


class TestLogBottleneckAndInterleaving:
    def test_identical_zero(self):
        dg = PersistenceDiagram(1, ((0.5, 2.0),))
        assert log_bottleneck(dg, dg) == 0.0

    def test_scaling_becomes_translation(self):
        base = PersistenceDiagram(1, ((0.2, 1.0), (0.5, 2.0), (1.0, 1.5)))
        for c in (1.3, 2.0, 0.7):
            scaled = PersistenceDiagram(1, tuple((c * b, c * d) for b, d in base.points))
            assert log_bottleneck(base, scaled, floor=1e-6) == pytest.approx(
                abs(math.log(c)), abs=1e-12
            )

    def test_zero_births_clamped_to_common_floor(self):
        a = PersistenceDiagram(0, ((0.0, 1.0), (0.0, math.inf)))
        b = PersistenceDiagram(0, ((0.0, 1.1), (0.0, math.inf)))
        assert log_bottleneck(a, b) == pytest.approx(math.log(1.1), abs=1e-12)

    def test_floor_validation(self):
        dg = PersistenceDiagram(0, ((0.0, 1.0),))
        with pytest.raises(ParamOutOfRange):
            log_bottleneck(dg, dg, floor=0.0)

    def test_interleaving_examples(self):
        base = PersistenceDiagram(1, ((0.2, 1.0), (0.5, 2.0)))
        eps = 0.25
        assert interleaving_check(base, base, eps)
        shrunk = PersistenceDiagram(1, tuple(((1 - eps) * b, (1 - eps) * d) for b, d in base.points))
        assert interleaving_check(base, shrunk, eps)
        doubled = PersistenceDiagram(
            1, tuple((b / (1 - eps) ** 2, d / (1 - eps) ** 2) for b, d in base.points)
        )
        assert not interleaving_check(base, doubled, eps)
        with pytest.raises(ParamOutOfRange):
            interleaving_check(base, base, 1.0)


class TestSerialization:
    def test_diagram_csv_round_trip(self):
        dgs = [
            PersistenceDiagram(0, ((0.0, 1.5), (0.0, math.inf))),
            PersistenceDiagram(1, ((0.25, 0.75),)),
        ]
        text = diagrams_to_csv(dgs)
        back = diagrams_from_csv(text)
        assert back == dgs

    def test_csv_parse_error_carries_line(self):
        from topoproj import ParseError

        with pytest.raises(ParseError) as err:
            diagrams_from_csv("dim,birth,death\n0,0.0\n")
        assert err.value.line == 2

    def test_filtration_dump_format(self):
        fc = vr_filtration(pairwise_distances(PointCloud(np.array([[0.0], [2.0]]))), 1)
        lines = fc.dump().strip().splitlines()
        assert lines[0] == "0.0,0,0"
        assert lines[1] == "0.0,0,1"
        assert lines[2] == "1.0,1,0;1"
