"""Synthetic data generators, experiment drivers, and report/point-cloud I/O.

Experiments are seed-deterministic end to end except for wall-clock timings.
Reports serialize to JSON (full structure) or CSV (flat per-record rows);
the plotting component consumes these files and never calls back into the
library.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist

from .core import (
    ParamOutOfRange,
    ParseError,
    PointCloud,
    RngSeed,
    max_pairwise_distortion,
    pairwise_distances,
    substream,
)
from .persistence import (
    PersistenceDiagram,
    cech_filtration,
    diagrams,
    interleaving_check,
    log_bottleneck,
    default_log_floor,
    reduce_boundary,
    vr_filtration,
)
from .transforms import (
    GAUSSIAN_DENSE,
    SORS,
    make_gaussian_op,
    make_sors_op,
    next_power_of_two,
    project_cloud,
    target_dim_gaussian,
    target_dim_sors,
)
from .width import gaussian_width_mc, normalized_differences

_GEN_TAG = 0x4745
_TRIAL_TAG = 0x5452

GENERATOR_KINDS = ("circle", "sphere", "sparse", "lowrank", "gaussian_blob")


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of a synthetic point cloud.

    kinds: ``circle`` (first two coordinates on the unit circle, equispaced
    by default), ``sphere`` (uniform on the unit sphere), ``sparse``
    (unit vectors with exactly s nonzeros at uniform positions), ``lowrank``
    (rank-r d1 x d2 matrices of unit Frobenius norm, flattened, d = d1*d2),
    ``gaussian_blob`` (standard normal). ``noise`` adds an independent
    perturbation of Euclidean norm at most its value to every point.
    """

    kind: str
    n: int
    d: int
    s: int | None = None
    r: int | None = None
    d1: int | None = None
    d2: int | None = None
    noise: float = 0.0
    seed: RngSeed = 0
    equispaced: bool = True

    def __post_init__(self) -> None:
        if self.kind not in GENERATOR_KINDS:
            raise ParamOutOfRange(f"unknown generator kind {self.kind!r}")
        if self.n < 1 or self.d < 1:
            raise ParamOutOfRange("need n >= 1 and d >= 1")
        if not (np.isfinite(self.noise) and self.noise >= 0):
            raise ParamOutOfRange("noise must be finite and >= 0")
        if self.kind == "circle" and self.d < 2:
            raise ParamOutOfRange("circle needs d >= 2")
        if self.kind == "sparse":
            if self.s is None or not 1 <= self.s <= self.d:
                raise ParamOutOfRange("sparse needs 1 <= s <= d")
        if self.kind == "lowrank":
            if self.r is None or self.d1 is None or self.d2 is None:
                raise ParamOutOfRange("lowrank needs r, d1, d2")
            if self.d1 * self.d2 != self.d:
                raise ParamOutOfRange("lowrank needs d = d1 * d2")
            if not 1 <= self.r <= min(self.d1, self.d2):
                raise ParamOutOfRange("lowrank needs 1 <= r <= min(d1, d2)")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "d": self.d,
            "s": self.s,
            "r": self.r,
            "d1": self.d1,
            "d2": self.d2,
            "noise": self.noise,
            "seed": int(self.seed),
            "equispaced": self.equispaced,
        }


def generate(spec: GeneratorSpec) -> PointCloud:
    """Sample a point cloud; deterministic in the generator's seed."""
    rng = substream(spec.seed, _GEN_TAG)
    n, d = spec.n, spec.d
    if spec.kind == "circle":
        if spec.equispaced:
            theta = 2.0 * np.pi * np.arange(n) / n
        else:
            theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
        pts = np.zeros((n, d))
        pts[:, 0] = np.cos(theta)
        pts[:, 1] = np.sin(theta)
    elif spec.kind == "sphere":
        pts = rng.standard_normal((n, d))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    elif spec.kind == "sparse":
        pts = np.zeros((n, d))
        for i in range(n):
            support = rng.choice(d, size=spec.s, replace=False)
            vals = rng.standard_normal(spec.s)
            pts[i, support] = vals / np.linalg.norm(vals)
    elif spec.kind == "lowrank":
        pts = np.zeros((n, d))
        for i in range(n):
            left = rng.standard_normal((spec.d1, spec.r))
            right = rng.standard_normal((spec.r, spec.d2))
            mat = left @ right
            pts[i] = (mat / np.linalg.norm(mat)).ravel()
    else:  # gaussian_blob
        pts = rng.standard_normal((n, d))
    if spec.noise > 0:
        direction = rng.standard_normal((n, d))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = spec.noise * rng.uniform(0.0, 1.0, size=(n, 1))
        pts = pts + direction * radius
    return PointCloud(pts)


@dataclass
class ExperimentReport:
    """Echo of the configuration, per-trial records, and aggregates."""

    experiment: str
    config: dict
    records: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(
            {
                "experiment": self.experiment,
                "config": self.config,
                "records": self.records,
                "aggregates": self.aggregates,
            },
            indent=indent,
            default=_json_default,
        )

    @staticmethod
    def from_json(text: str) -> "ExperimentReport":
        doc = json.loads(text)
        return ExperimentReport(
            experiment=doc["experiment"],
            config=doc.get("config", {}),
            records=doc.get("records", []),
            aggregates=doc.get("aggregates", {}),
        )

    def to_csv(self) -> str:
        if not self.records:
            return "\n"
        keys: list[str] = []
        for rec in self.records:
            for k in rec:
                if k not in keys:
                    keys.append(k)
        lines = [",".join(keys)]
        for rec in self.records:
            lines.append(",".join(_csv_cell(rec.get(k)) for k in keys))
        return "\n".join(lines) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if o == math.inf:
        return "inf"
    raise TypeError(f"not JSON serializable: {type(o)}")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_success_probability(
    spec: GeneratorSpec,
    eps: float,
    delta: float,
    m_grid: list[int],
    trials: int,
    operators: tuple[str, ...] = (GAUSSIAN_DENSE, SORS),
) -> ExperimentReport:
    """Fraction of trials in which every pairwise distance survives within
    1 +/- eps, for each target dimension in `m_grid` and each operator kind.

    The cloud is fixed (from `spec`); each trial redraws the operator from a
    trial-specific seed. SORS needs a power-of-two ambient dimension.
    """
    if trials < 1:
        raise ParamOutOfRange("need trials >= 1")
    if any(m < 1 or m > spec.d for m in m_grid):
        raise ParamOutOfRange("m_grid entries must lie in [1, d]")
    cloud = generate(spec)
    report = ExperimentReport(
        "success_probability",
        {
            "generator": spec.to_dict(),
            "eps": eps,
            "delta": delta,
            "m_grid": list(m_grid),
            "trials": trials,
            "operators": list(operators),
        },
    )
    rates: dict[str, list[float]] = {}
    for op_kind in operators:
        rates[op_kind] = []
        for m in m_grid:
            successes = 0
            for t in range(trials):
                op_seed = int(substream(spec.seed, _TRIAL_TAG, m, t).integers(0, 2**63))
                if op_kind == GAUSSIAN_DENSE:
                    op = make_gaussian_op(m, spec.d, op_seed)
                else:
                    op = make_sors_op(m, next_power_of_two(spec.d), op_seed)
                eps_emp = max_pairwise_distortion(cloud, project_cloud(op, cloud))
                successes += eps_emp <= eps
            rate = successes / trials
            rates[op_kind].append(rate)
            report.records.append(
                {"operator": op_kind, "m": m, "trials": trials, "success_rate": rate}
            )
    report.aggregates = {
        "rates": rates,
        "target": 1.0 - delta,
        "slack_two_over_sqrt_trials": 2.0 / math.sqrt(trials),
    }
    return report


def _median_us(fn, reps: int) -> tuple[float, float]:
    """Median and interquartile range of fn() wall time, in microseconds.

    One warm-up call is discarded before timing.
    """
    fn()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e6)
    times.sort()
    med = float(np.median(times))
    iqr = float(np.percentile(times, 75) - np.percentile(times, 25))
    return med, iqr


def run_timing(
    d_grid: list[int],
    m_fractions: list[float],
    n_grid: list[int] | None = None,
    reps: int = 5,
    seed: RngSeed = 0,
    probe_n: int = 256,
) -> ExperimentReport:
    """Wall-clock comparison of the dense-distance path and the project-then-
    distance path, plus the cost-model break-even sample count.

    For each d (power of two) and each m = fraction * d, measures the
    per-point projection cost f(d) and per-pair distance costs c(d), c(m) on
    a probe batch, predicts ``n0 = 2 f(d) / (c(d) - c(m)) + 1``, then times
    both paths on a grid of n values (auto-chosen around the prediction when
    `n_grid` is not given) and reports the first n where projection wins.
    Timings are machine-dependent; medians over `reps` with a discarded
    warm-up, flagged unstable when the IQR exceeds 20% of the median.
    """
    report = ExperimentReport(
        "timing",
        {
            "d_grid": list(d_grid),
            "m_fractions": list(m_fractions),
            "n_grid": list(n_grid) if n_grid is not None else None,
            "reps": reps,
            "probe_n": probe_n,
        },
    )
    for d in d_grid:
        if not (d >= 2 and (d & (d - 1)) == 0):
            raise ParamOutOfRange("timing requires power-of-two dimensions")
        rng = substream(seed, d)
        probe = rng.standard_normal((probe_n, d))
        pairs = probe_n * (probe_n - 1) / 2.0
        t_dist_d, _ = _median_us(lambda: pdist(probe), reps)
        c_d = t_dist_d / pairs
        for frac in m_fractions:
            m = max(1, int(round(frac * d)))
            op = make_sors_op(m, d, int(rng.integers(0, 2**63)))
            cloud_probe = PointCloud(probe)
            t_proj, _ = _median_us(lambda: project_cloud(op, cloud_probe), reps)
            f_d = t_proj / probe_n
            proj_probe = project_cloud(op, cloud_probe).points
            t_dist_m, _ = _median_us(lambda: pdist(proj_probe), reps)
            c_m = t_dist_m / pairs
            if c_m >= c_d:
                n0_model = None
            else:
                n0_model = 2.0 * f_d / (c_d - c_m) + 1.0
            grid = n_grid
            if grid is None:
                base = int(n0_model) if n0_model else probe_n
                grid = sorted(
                    {max(4, int(base * g)) for g in (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0)}
                )
            n0_emp = None
            for n in grid:
                sample = substream(seed, d, m, n).standard_normal((n, d))
                cloud_n = PointCloud(sample)
                t_a, iqr_a = _median_us(lambda: pdist(sample), reps)
                t_b, iqr_b = _median_us(
                    lambda: pdist(project_cloud(op, cloud_n).points), reps
                )
                unstable = (iqr_a > 0.2 * t_a) or (iqr_b > 0.2 * t_b)
                report.records.append(
                    {
                        "d": d,
                        "m": m,
                        "n": n,
                        "dense_us": t_a,
                        "projected_us": t_b,
                        "unstable": unstable,
                        "f_d_us": f_d,
                        "c_d_us": c_d,
                        "c_m_us": c_m,
                    }
                )
                if n0_emp is None and t_b < t_a:
                    n0_emp = n
            report.aggregates.setdefault("breakeven", []).append(
                {
                    "d": d,
                    "m": m,
                    "f_d_us": f_d,
                    "c_d_us": c_d,
                    "c_m_us": c_m,
                    "n0_model": n0_model,
                    "n0_empirical": n0_emp,
                }
            )
    return report


def _build_diagrams(
    cloud: PointCloud, complex_kind: str, max_dim: int
) -> list[PersistenceDiagram]:
    # max_dim is the top homology dimension: the complex needs simplices one
    # dimension higher so that top-dimensional cycles can die. No scale cap is
    # applied; truncating the filtration would make bars near the cap
    # incomparable across the projection.
    if complex_kind == "vr":
        fc = vr_filtration(pairwise_distances(cloud), max_dim + 1)
    elif complex_kind == "cech":
        fc = cech_filtration(cloud, max_dim + 1)
    else:
        raise ParamOutOfRange(f"unknown complex kind {complex_kind!r}")
    return diagrams(reduce_boundary(fc), max_dim)


def run_pipeline(
    spec: GeneratorSpec,
    eps: float,
    delta: float,
    complex_kind: str = "vr",
    max_dim: int = 1,
    operator: str = GAUSSIAN_DENSE,
    mc_samples: int = 4096,
) -> ExperimentReport:
    """Project a cloud at the width-prescribed dimension and certify that its
    persistence diagrams moved by at most the interleaving budget.

    Width is estimated by Monte Carlo and inflated by two standard errors
    before sizing m (conservative). Reports the measured distortion, the
    per-dimension log-bottleneck distances, and the interleaving verdicts,
    which must all be true whenever the measured distortion is below 1.
    """
    cloud = generate(spec)
    report = ExperimentReport(
        "pipeline",
        {
            "generator": spec.to_dict(),
            "eps": eps,
            "delta": delta,
            "complex": complex_kind,
            "max_dim": max_dim,
            "operator": operator,
            "mc_samples": mc_samples,
        },
    )
    if cloud.n == 1:
        report.aggregates = {
            "m": 1,
            "eps_emp": 0.0,
            "width_mean": 0.0,
            "log_bottleneck": {"0": 0.0},
            "interleaving_ok": True,
            "note": "single point: one component, nothing to distort",
        }
        return report
    west = gaussian_width_mc(normalized_differences(cloud), mc_samples, spec.seed)
    width = west.mean + 2.0 * west.std_error
    op_seed = int(substream(spec.seed, _TRIAL_TAG).integers(0, 2**63))
    if operator == GAUSSIAN_DENSE:
        m = target_dim_gaussian(width, eps, delta)
        op = make_gaussian_op(m, cloud.d, op_seed)
    elif operator == SORS:
        dpad = next_power_of_two(cloud.d)
        m = target_dim_sors(width, eps, delta, dpad).m
        op = make_sors_op(m, dpad, op_seed)
    else:
        raise ParamOutOfRange(f"unknown operator {operator!r}")
    projected = project_cloud(op, cloud)
    eps_emp = max_pairwise_distortion(cloud, projected)
    dg_x = _build_diagrams(cloud, complex_kind, max_dim)
    dg_y = _build_diagrams(projected, complex_kind, max_dim)
    floor = default_log_floor(*dg_x, *dg_y)
    budget = math.log(1.0 / (1.0 - eps_emp)) if eps_emp < 1 else None
    per_dim = {}
    verdicts = []
    for p in range(max_dim + 1):
        lb = log_bottleneck(dg_x[p], dg_y[p], floor)
        per_dim[str(p)] = lb
        if eps_emp < 1 and eps_emp > 0:
            verdicts.append(interleaving_check(dg_x[p], dg_y[p], eps_emp, floor))
        report.records.append(
            {
                "dim": p,
                "log_bottleneck": lb,
                "bars_before": len(dg_x[p].points),
                "bars_after": len(dg_y[p].points),
            }
        )
    report.aggregates = {
        "m": m,
        "width_mean": west.mean,
        "width_std_error": west.std_error,
        "eps_emp": eps_emp,
        "budget_log": budget,
        "log_bottleneck": per_dim,
        "log_floor": floor,
        "interleaving_ok": all(verdicts) if verdicts else True,
    }
    return report


def ingest_csv(path: str | Path) -> PointCloud:
    """Read a point cloud: one point per row, decimal coordinates, lines
    starting with '#' skipped. Ragged rows raise ParseError with the line."""
    rows: list[list[float]] = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = [c for c in line.split(",") if c.strip() != ""]
            try:
                row = [float(c) for c in cells]
            except ValueError as exc:
                raise ParseError(f"bad coordinate: {exc}", line=ln) from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(
                    f"row has {len(row)} coordinates, expected {width}", line=ln
                )
            rows.append(row)
    if not rows:
        raise ParseError("no data rows found", line=None)
    return PointCloud(np.array(rows))


def emit_cloud(cloud: PointCloud, path: str | Path) -> None:
    """Write a cloud in the CSV format `ingest_csv` reads; round-trips exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# point cloud: n={cloud.n} d={cloud.d}\n")
        for row in cloud.points:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def emit_report(report: ExperimentReport, path: str | Path) -> None:
    """Write a report as JSON (default) or flat CSV when the path ends in .csv."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        path.write_text(report.to_csv(), encoding="utf-8")
    else:
        path.write_text(report.to_json(), encoding="utf-8")
