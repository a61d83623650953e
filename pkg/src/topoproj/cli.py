"""Command-line interface.

Every subcommand prints a JSON document to stdout; bulk outputs (point
clouds, diagrams, per-record experiment tables) go to ``--out`` as CSV, or
as JSON when the path does not end in ``.csv``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .core import PointCloud, TopoprojError, pairwise_distances, max_pairwise_distortion
from .geometry import miniball
from .harness import (
    GENERATOR_KINDS,
    GeneratorSpec,
    emit_cloud,
    emit_report,
    generate,
    ingest_csv,
    run_pipeline,
    run_success_probability,
    run_timing,
)
from .persistence import (
    cech_filtration,
    diagrams,
    diagrams_from_csv,
    diagrams_to_csv,
    interleaving_check,
    log_bottleneck,
    bottleneck,
    default_log_floor,
    reduce_boundary,
    vr_filtration,
)
from .transforms import (
    make_gaussian_op,
    make_sors_op,
    next_power_of_two,
    project_cloud,
    target_dim_gaussian,
    target_dim_sors,
)
from .width import (
    gaussian_width_mc,
    normalized_differences,
    width_bound_discrete,
    width_bound_sparse,
    width_bound_sphere,
)


def _emit(doc: dict) -> None:
    json.dump(doc, sys.stdout, indent=2, default=str)
    sys.stdout.write("\n")


def _add_generator_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=GENERATOR_KINDS, default="gaussian_blob")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--s", type=int, default=None, help="sparsity (sparse kind)")
    p.add_argument("--r", type=int, default=None, help="rank (lowrank kind)")
    p.add_argument("--d1", type=int, default=None)
    p.add_argument("--d2", type=int, default=None)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument(
        "--mode",
        choices=("equispaced", "uniform"),
        default="equispaced",
        help="circle sampling mode",
    )


def _spec_from_args(args) -> GeneratorSpec:
    return GeneratorSpec(
        kind=args.kind,
        n=args.n,
        d=args.d,
        s=args.s,
        r=args.r,
        d1=args.d1,
        d2=args.d2,
        noise=args.noise,
        seed=args.seed,
        equispaced=(args.mode == "equispaced"),
    )


def _cloud_json(cloud: PointCloud) -> dict:
    return {"n": cloud.n, "d": cloud.d, "points": cloud.points.tolist()}


def cmd_generate(args) -> None:
    cloud = generate(_spec_from_args(args))
    if args.out:
        emit_cloud(cloud, args.out)
        _emit({"written": args.out, "n": cloud.n, "d": cloud.d})
    else:
        _emit(_cloud_json(cloud))


def _make_operator(args, d: int, width: float | None = None):
    if args.operator == "sors":
        dpad = next_power_of_two(d)
        if args.m is not None:
            m = args.m
        else:
            m = target_dim_sors(width, args.eps, args.delta, dpad).m
        return make_sors_op(m, dpad, args.seed)
    m = args.m if args.m is not None else target_dim_gaussian(width, args.eps, args.delta)
    return make_gaussian_op(m, d, args.seed)


def cmd_project(args) -> None:
    cloud = ingest_csv(args.infile)
    width = None
    if args.m is None:
        est = gaussian_width_mc(normalized_differences(cloud), args.k, args.seed)
        width = est.mean + 2.0 * est.std_error
    op = _make_operator(args, cloud.d, width)
    projected = project_cloud(op, cloud)
    eps_emp = max_pairwise_distortion(cloud, projected)
    if args.out:
        emit_cloud(projected, args.out)
    doc = {"operator": json.loads(op.to_json()), "eps_emp": eps_emp}
    if width is not None:
        doc["width_used"] = width
    if args.out:
        doc["written"] = args.out
    else:
        doc["points"] = projected.points.tolist()
    _emit(doc)


def cmd_distances(args) -> None:
    cloud = ingest_csv(args.infile)
    dist = pairwise_distances(cloud)
    if args.out:
        np.savetxt(args.out, dist.entries, delimiter=",")
        _emit({"written": args.out, "n": dist.n})
    else:
        off = dist.condensed()
        _emit(
            {
                "n": dist.n,
                "diameter": float(off.max()) if len(off) else 0.0,
                "min_distance": float(off.min()) if len(off) else 0.0,
                "entries": dist.entries.tolist(),
            }
        )


def cmd_width(args) -> None:
    cloud = ingest_csv(args.infile)
    t = normalized_differences(cloud)
    est = gaussian_width_mc(t, args.k, args.seed)
    support = int(np.max(np.count_nonzero(cloud.points, axis=1)))
    sparse_s = min(2 * support, cloud.d)
    bounds = {
        "discrete": width_bound_discrete(t.size),
        "sparse": width_bound_sparse(sparse_s, cloud.d, args.sparse_c)
        if sparse_s < cloud.d
        else None,
        "sphere": width_bound_sphere(cloud.d),
    }
    _emit(
        {
            "mean": est.mean,
            "std_error": est.std_error,
            "k": est.num_samples,
            "bounds": bounds,
            "sparse_s": sparse_s if sparse_s < cloud.d else None,
            "sparse_c": args.sparse_c,
        }
    )


def cmd_miniball(args) -> None:
    cloud = ingest_csv(args.infile)
    ball = miniball(cloud.points)
    _emit({"center": ball.center.tolist(), "radius": ball.radius})


def _diagrams_for(args, cloud: PointCloud):
    max_alpha = args.max_alpha if args.max_alpha is not None else math.inf
    if args.complex == "cech":
        fc = cech_filtration(cloud, args.max_dim + 1, max_alpha)
    else:
        fc = vr_filtration(pairwise_distances(cloud), args.max_dim + 1, max_alpha)
    return diagrams(reduce_boundary(fc), args.max_dim)


def cmd_phom(args) -> None:
    cloud = ingest_csv(args.infile)
    diags = _diagrams_for(args, cloud)
    csv_text = diagrams_to_csv(diags)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        _emit({"written": args.out, "bars": {str(d.dim): len(d.points) for d in diags}})
    else:
        _emit(
            {
                "diagrams": {
                    str(d.dim): [[b, "inf" if math.isinf(x) else x] for b, x in d.points]
                    for d in diags
                }
            }
        )


def cmd_compare(args) -> None:
    with open(args.a, "r", encoding="utf-8") as fh:
        da = diagrams_from_csv(fh.read())
    with open(args.b, "r", encoding="utf-8") as fh:
        db = diagrams_from_csv(fh.read())
    top = min(len(da), len(db)) - 1
    floor = args.floor if args.floor is not None else default_log_floor(*da[: top + 1], *db[: top + 1])
    out = {"floor": floor, "dims": {}}
    for p in range(top + 1):
        entry = {
            "bottleneck": bottleneck(da[p], db[p]),
            "log_bottleneck": log_bottleneck(da[p], db[p], floor),
        }
        if args.eps is not None:
            entry["interleaving_ok"] = interleaving_check(da[p], db[p], args.eps, floor)
            entry["budget_log"] = math.log(1.0 / (1.0 - args.eps))
        out["dims"][str(p)] = entry
    _emit(out)


def cmd_succ_prob(args) -> None:
    spec = _spec_from_args(args)
    m_grid = [int(x) for x in args.m_grid.split(",")]
    operators = tuple(args.operators.split(","))
    report = run_success_probability(spec, args.eps, args.delta, m_grid, args.trials, operators)
    if args.out:
        emit_report(report, args.out)
        _emit({"written": args.out, **report.aggregates})
    else:
        print(report.to_json())


def cmd_timing(args) -> None:
    d_grid = [int(x) for x in args.d_grid.split(",")]
    m_fractions = [float(x) for x in args.m_frac.split(",")]
    n_grid = [int(x) for x in args.n_grid.split(",")] if args.n_grid else None
    report = run_timing(d_grid, m_fractions, n_grid, args.reps, args.seed)
    if args.out:
        emit_report(report, args.out)
        _emit({"written": args.out, **report.aggregates})
    else:
        print(report.to_json())


def cmd_pipeline(args) -> None:
    spec = _spec_from_args(args)
    report = run_pipeline(
        spec, args.eps, args.delta, args.complex, args.max_dim, args.operator, args.k
    )
    if args.out:
        emit_report(report, args.out)
        _emit({"written": args.out, **report.aggregates})
    else:
        print(report.to_json())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topoproj",
        description="Width-sized random projection of point clouds with "
        "persistent-homology certification.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, seed=True, out=True):
        if seed:
            p.add_argument("--seed", type=int, default=0)
        if out:
            p.add_argument("--out", default=None, help="write bulk output to this path")

    p = sub.add_parser("generate", help="sample a synthetic point cloud")
    _add_generator_args(p)
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("project", help="randomly project a CSV point cloud")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--operator", choices=("gaussian", "sors"), default="gaussian")
    p.add_argument("--m", type=int, default=None, help="target dimension (sized from width when omitted)")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--k", type=int, default=4096, help="Monte Carlo samples for width sizing")
    common(p)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("distances", help="pairwise distance matrix")
    p.add_argument("--in", dest="infile", required=True)
    common(p, seed=False)
    p.set_defaults(func=cmd_distances)

    p = sub.add_parser("width", help="Monte Carlo Gaussian width of the difference set")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k", type=int, default=4096)
    p.add_argument("--sparse-c", type=float, default=2.0, help="constant of the sparse width bound")
    common(p, out=False)
    p.set_defaults(func=cmd_width)

    p = sub.add_parser("miniball", help="smallest enclosing ball of a CSV point cloud")
    p.add_argument("--in", dest="infile", required=True)
    common(p, seed=False, out=False)
    p.set_defaults(func=cmd_miniball)

    p = sub.add_parser("phom", help="persistence diagrams of a CSV point cloud")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--complex", choices=("vr", "cech"), default="vr")
    p.add_argument("--max-dim", type=int, default=1, help="top homology dimension")
    p.add_argument("--max-alpha", type=float, default=None)
    common(p, seed=False)
    p.set_defaults(func=cmd_phom)

    p = sub.add_parser("compare", help="bottleneck distances between two diagram CSVs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--floor", type=float, default=None)
    common(p, seed=False, out=False)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("succ-prob", help="distance-preservation success rates vs m")
    _add_generator_args(p)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--m-grid", required=True, help="comma-separated target dimensions")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--operators", default="gaussian,sors")
    common(p)
    p.set_defaults(func=cmd_succ_prob)

    p = sub.add_parser("timing", help="dense vs projected distance timing and break-even")
    p.add_argument("--d-grid", required=True, help="comma-separated power-of-two dimensions")
    p.add_argument("--m-frac", default="0.125", help="comma-separated fractions m/d")
    p.add_argument("--n-grid", default=None, help="comma-separated sample counts")
    p.add_argument("--reps", type=int, default=5)
    common(p)
    p.set_defaults(func=cmd_timing)

    p = sub.add_parser("pipeline", help="end-to-end projection + persistence certification")
    _add_generator_args(p)
    p.add_argument("--eps", type=float, default=0.3)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--complex", choices=("vr", "cech"), default="vr")
    p.add_argument("--max-dim", type=int, default=1, help="top homology dimension")
    p.add_argument("--operator", choices=("gaussian", "sors"), default="gaussian")
    p.add_argument("--k", type=int, default=4096)
    common(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except TopoprojError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
