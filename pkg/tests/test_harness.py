import json
import math

import numpy as np
import pytest

from topoproj import (
    ExperimentReport,
    GeneratorSpec,
    ParamOutOfRange,
    ParseError,
    emit_cloud,
    emit_report,
    generate,
    ingest_csv,
    run_pipeline,
    run_success_probability,
    run_timing,
)


class TestGenerate:
    def test_circle_four_equispaced_is_square(self):
        cloud = generate(GeneratorSpec("circle", 4, 2, seed=0))
        expected = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=float)
        assert np.allclose(cloud.points, expected, atol=1e-12)

    def test_circle_embeds_in_higher_dim(self):
        cloud = generate(GeneratorSpec("circle", 8, 5, seed=0))
        assert cloud.d == 5
        assert np.all(cloud.points[:, 2:] == 0.0)
        assert np.allclose(np.linalg.norm(cloud.points, axis=1), 1.0)

    def test_circle_uniform_mode(self):
        cloud = generate(GeneratorSpec("circle", 16, 2, seed=4, equispaced=False))
        assert np.allclose(np.linalg.norm(cloud.points, axis=1), 1.0, atol=1e-12)
        gaps = np.diff(np.sort(np.arctan2(cloud.points[:, 1], cloud.points[:, 0])))
        assert gaps.std() > 1e-3  # not equispaced

    def test_sparse_support_and_norm(self):
        cloud = generate(GeneratorSpec("sparse", 50, 128, s=2, seed=3))
        nnz = np.count_nonzero(cloud.points, axis=1)
        assert np.all(nnz == 2)
        assert np.allclose(np.linalg.norm(cloud.points, axis=1), 1.0, atol=1e-12)

    def test_lowrank_rank_and_frobenius(self):
        spec = GeneratorSpec("lowrank", 10, 16, r=1, d1=4, d2=4, seed=5)
        cloud = generate(spec)
        for row in cloud.points:
            svals = np.linalg.svd(row.reshape(4, 4), compute_uv=False)
            assert svals[1] <= 1e-10
            assert np.linalg.norm(row) == pytest.approx(1.0, abs=1e-12)

    def test_sphere_unit_norm(self):
        cloud = generate(GeneratorSpec("sphere", 20, 6, seed=1))
        assert np.allclose(np.linalg.norm(cloud.points, axis=1), 1.0, atol=1e-12)

    def test_noise_bounded(self):
        clean = generate(GeneratorSpec("sphere", 30, 4, seed=2))
        noisy = generate(GeneratorSpec("sphere", 30, 4, seed=2, noise=0.05))
        assert np.all(np.linalg.norm(noisy.points - clean.points, axis=1) <= 0.05 + 1e-12)

    def test_deterministic(self):
        a = generate(GeneratorSpec("gaussian_blob", 7, 3, seed=9))
        b = generate(GeneratorSpec("gaussian_blob", 7, 3, seed=9))
        assert np.array_equal(a.points, b.points)

    def test_validation(self):
        with pytest.raises(ParamOutOfRange):
            GeneratorSpec("sparse", 5, 8)  # missing s
        with pytest.raises(ParamOutOfRange):
            GeneratorSpec("lowrank", 5, 8, r=1, d1=2, d2=3)  # d mismatch
        with pytest.raises(ParamOutOfRange):
            GeneratorSpec("blob", 5, 8)


class TestCsvRoundTrip:
    def test_exact_round_trip(self, rng, tmp_path):
        cloud = generate(GeneratorSpec("gaussian_blob", 12, 5, seed=4))
        path = tmp_path / "cloud.csv"
        emit_cloud(cloud, path)
        back = ingest_csv(path)
        assert np.array_equal(back.points, cloud.points)

    def test_comment_lines_skipped(self, tmp_path):
        path = tmp_path / "pts.csv"
        path.write_text("# header\n1.0,2.0\n# interior comment\n3.0,4.0\n")
        cloud = ingest_csv(path)
        assert cloud.n == 2 and cloud.d == 2

    def test_ragged_row_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(ParseError) as err:
            ingest_csv(path)
        assert err.value.line == 2

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,x\n")
        with pytest.raises(ParseError) as err:
            ingest_csv(path)
        assert err.value.line == 1


class TestSuccessProbability:
    def test_full_sors_sampling_always_succeeds(self):
        spec = GeneratorSpec("sparse", 12, 16, s=2, seed=6)
        rep = run_success_probability(spec, 0.1, 0.1, [16], trials=5, operators=("sors",))
        assert rep.aggregates["rates"]["sors"] == [1.0]

    def test_one_dimensional_projection_fails(self):
        spec = GeneratorSpec("gaussian_blob", 8, 16, seed=6)
        rep = run_success_probability(spec, 0.1, 0.1, [1], trials=20)
        assert rep.aggregates["rates"]["gaussian"][0] <= 0.1
        assert rep.aggregates["rates"]["sors"][0] <= 0.1

    def test_rates_rise_with_m_within_slack(self):
        spec = GeneratorSpec("sparse", 16, 32, s=2, seed=8)
        rep = run_success_probability(spec, 0.3, 0.1, [4, 8, 16, 32], trials=40)
        slack = rep.aggregates["slack_two_over_sqrt_trials"]
        for rates in rep.aggregates["rates"].values():
            for lo, hi in zip(rates, rates[1:]):
                assert hi >= lo - slack

    def test_m_grid_validated(self):
        spec = GeneratorSpec("gaussian_blob", 4, 8, seed=0)
        with pytest.raises(ParamOutOfRange):
            run_success_probability(spec, 0.1, 0.1, [9], trials=1)

    def test_seed_deterministic_end_to_end(self):
        spec = GeneratorSpec("sparse", 10, 16, s=2, seed=13)
        a = run_success_probability(spec, 0.3, 0.1, [4, 8], trials=6)
        b = run_success_probability(spec, 0.3, 0.1, [4, 8], trials=6)
        assert a.records == b.records
        pa = run_pipeline(GeneratorSpec("circle", 10, 2, seed=13), 0.4, 0.2)
        pb = run_pipeline(GeneratorSpec("circle", 10, 2, seed=13), 0.4, 0.2)
        assert pa.aggregates == pb.aggregates


class TestPipeline:
    def test_circle_vr(self):
        rep = run_pipeline(GeneratorSpec("circle", 20, 2, seed=7), 0.3, 0.1, "vr", 1)
        ag = rep.aggregates
        assert ag["interleaving_ok"]
        assert ag["eps_emp"] < 1.0
        bars = {r["dim"]: r for r in rep.records}
        assert bars[1]["bars_before"] == 1 and bars[1]["bars_after"] == 1
        assert ag["log_bottleneck"]["1"] <= ag["budget_log"] + 1e-9

    def test_single_point_vacuous(self):
        rep = run_pipeline(GeneratorSpec("gaussian_blob", 1, 4, seed=0), 0.5, 0.1)
        assert rep.aggregates["interleaving_ok"]

    def test_sors_operator_path(self):
        rep = run_pipeline(
            GeneratorSpec("circle", 12, 2, seed=3), 0.5, 0.2, "vr", 1, operator="sors"
        )
        assert rep.aggregates["interleaving_ok"]
        assert rep.aggregates["eps_emp"] >= 0.0


class TestTiming:
    def test_smoke_and_overhead_case(self):
        # m = d: the projected path does strictly more work at the same
        # distance dimension, so it never breaks even
        rep = run_timing([64], [1.0], n_grid=[64, 256], reps=3, seed=0)
        be = rep.aggregates["breakeven"][0]
        assert be["m"] == 64
        assert be["n0_empirical"] is None
        assert {r["n"] for r in rep.records} == {64, 256}
        biggest = max(rep.records, key=lambda r: r["n"])
        assert biggest["projected_us"] > biggest["dense_us"]

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ParamOutOfRange):
            run_timing([100], [0.5], n_grid=[8], reps=1)


class TestReportSerialization:
    def test_json_round_trip(self):
        rep = ExperimentReport("demo", {"a": 1}, [{"x": 1.5}], {"done": True})
        back = ExperimentReport.from_json(rep.to_json())
        assert back == rep

    def test_csv_flattening(self, tmp_path):
        rep = ExperimentReport("demo", {}, [{"x": 1.5, "y": 2}, {"x": 0.25, "y": 3}])
        path = tmp_path / "r.csv"
        emit_report(rep, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "x,y"
        assert lines[1] == "1.5,2"

    def test_json_extension(self, tmp_path):
        rep = ExperimentReport("demo", {"b": 2})
        path = tmp_path / "r.json"
        emit_report(rep, path)
        assert json.loads(path.read_text())["config"] == {"b": 2}
