"""Script entry points: ``plot_timing REPORT OUT.png`` and friends."""

from __future__ import annotations

import argparse

from .figures import FigureSpec, render


def _run(kind: str, argv: list[str] | None) -> int:
    parser = argparse.ArgumentParser(description=f"render the {kind} figure from a report")
    parser.add_argument("report", help="experiment report JSON")
    parser.add_argument("output", help="image file to write (e.g. out.png)")
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    args = parser.parse_args(argv)
    result = render(FigureSpec(args.report, kind, args.output, args.xlabel, args.ylabel))
    print(result.output_path)
    return 0


def main_timing(argv: list[str] | None = None) -> int:
    return _run("timing", argv)


def main_breakeven(argv: list[str] | None = None) -> int:
    return _run("breakeven", argv)


def main_succprob(argv: list[str] | None = None) -> int:
    return _run("succprob", argv)
