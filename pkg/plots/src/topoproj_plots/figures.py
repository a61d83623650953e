"""Render figures from serialized topoproj experiment reports.

This package reads report JSON files only; it never recomputes anything and
never imports the library that produced them, so committed reports are
enough to regenerate every figure. Rendering is pure with respect to the
report bytes: the same input yields the same plotted data series.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FIGURE_KINDS = ("timing", "breakeven", "succprob")

# which report experiment type each figure kind consumes
_EXPECTED_EXPERIMENT = {
    "timing": "timing",
    "breakeven": "timing",
    "succprob": "success_probability",
}


class SchemaMismatch(Exception):
    """The report's experiment type does not match the requested figure."""


@dataclass(frozen=True)
class FigureSpec:
    report_path: str | Path
    kind: str
    output_path: str | Path
    xlabel: str | None = None
    ylabel: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise SchemaMismatch(f"unknown figure kind {self.kind!r}")


@dataclass(frozen=True)
class RenderResult:
    """The file written and the exact data series that were drawn."""

    output_path: str
    series: dict = field(default_factory=dict)


def _load_report(spec: FigureSpec) -> dict:
    with open(spec.report_path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    experiment = doc.get("experiment")
    if experiment != _EXPECTED_EXPERIMENT[spec.kind]:
        raise SchemaMismatch(
            f"figure {spec.kind!r} needs a {_EXPECTED_EXPERIMENT[spec.kind]!r} report, "
            f"got {experiment!r}"
        )
    return doc


def isotonic(values: list[float]) -> list[float]:
    """Nondecreasing fit by pool-adjacent-violators (least squares)."""
    blocks: list[tuple[float, int]] = []  # (mean, count)
    for v in values:
        mean, count = float(v), 1
        while blocks and blocks[-1][0] > mean:
            pm, pc = blocks.pop()
            mean = (pm * pc + mean * count) / (pc + count)
            count += pc
        blocks.append((mean, count))
    out: list[float] = []
    for mean, count in blocks:
        out.extend([mean] * count)
    return out


def _empty_figure(ax, message: str) -> None:
    ax.annotate(
        message,
        xy=(0.5, 0.5),
        xycoords="axes fraction",
        ha="center",
        va="center",
        fontsize=12,
        color="crimson",
    )


def render(spec: FigureSpec) -> RenderResult:
    """Write one figure for the given report; returns the plotted series."""
    doc = _load_report(spec)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    series: dict = {}
    try:
        if spec.kind == "succprob":
            series = _render_succprob(ax, doc)
        elif spec.kind == "timing":
            series = _render_timing(ax, doc)
        else:
            series = _render_breakeven(ax, doc)
        if spec.xlabel:
            ax.set_xlabel(spec.xlabel)
        if spec.ylabel:
            ax.set_ylabel(spec.ylabel)
        fig.tight_layout()
        fig.savefig(spec.output_path, dpi=130)
    finally:
        plt.close(fig)
    return RenderResult(str(spec.output_path), series)


def _render_succprob(ax, doc: dict) -> dict:
    records = doc.get("records", [])
    series: dict = {}
    if not records:
        _empty_figure(ax, "no records in report")
        return series
    by_op: dict[str, list[tuple[int, float]]] = {}
    for rec in records:
        by_op.setdefault(rec["operator"], []).append((rec["m"], rec["success_rate"]))
    for op, pts in sorted(by_op.items()):
        pts.sort()
        ms = [m for m, _ in pts]
        raw = [r for _, r in pts]
        smooth = isotonic(raw)
        ax.plot(ms, raw, "o--", alpha=0.45, label=f"{op} (raw)")
        ax.plot(ms, smooth, "-", linewidth=2, label=f"{op} (isotonic)")
        series[op] = {"m": ms, "raw": raw, "smooth": smooth}
    target = doc.get("aggregates", {}).get("target")
    if target is not None:
        ax.axhline(target, color="gray", linestyle=":", label=f"target {target:g}")
        series["target"] = target
    ax.set_xlabel("target dimension m")
    ax.set_ylabel("success probability")
    ax.set_ylim(-0.02, 1.05)
    eps = doc.get("config", {}).get("eps")
    ax.set_title(f"all pairwise distances within 1±{eps:g}" if eps is not None else "")
    ax.legend(loc="lower right", fontsize=8)
    return series


def _render_timing(ax, doc: dict) -> dict:
    entries = doc.get("aggregates", {}).get("breakeven", [])
    series: dict = {}
    if not entries:
        _empty_figure(ax, "no timing entries in report")
        return series
    entries = sorted(entries, key=lambda e: (e["d"], e["m"]))
    ds = [e["d"] for e in entries]
    fht = [e["f_d_us"] for e in entries]
    dist = [e["c_d_us"] for e in entries]
    ax.loglog(ds, dist, "o-", label="distance per pair")
    ax.loglog(ds, fht, "s-", label="projection per point")
    ax.set_xlabel("ambient dimension d")
    ax.set_ylabel("microseconds")
    ax.set_title("measured per-operation costs")
    ax.legend()
    series = {"d": ds, "distance_us": dist, "fht_us": fht}
    return series


def _render_breakeven(ax, doc: dict) -> dict:
    entries = doc.get("aggregates", {}).get("breakeven", [])
    series: dict = {}
    if not entries:
        _empty_figure(ax, "no break-even entries in report")
        return series
    entries = sorted(entries, key=lambda e: (e["d"], e["m"]))
    ds = [e["d"] for e in entries]
    model = [e["n0_model"] for e in entries]
    emp = [e["n0_empirical"] for e in entries]
    ax.semilogx(ds, model, "o-", label="cost-model prediction")
    if any(v is not None for v in emp):
        ax.semilogx(ds, emp, "s--", label="measured")
    ax.set_xlabel("ambient dimension d")
    ax.set_ylabel("break-even sample count n0")
    ax.set_title("samples needed before projection pays off")
    ax.legend()
    series = {"d": ds, "n0_model": model, "n0_empirical": emp}
    return series
