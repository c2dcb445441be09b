"""Entry points: render_bars <csv> <out>, render_sweep <csv> <out> --ref X."""

from __future__ import annotations

import argparse
import sys

from .render import PlotJob, render
from .schema import SchemaError


def _run(job: PlotJob) -> int:
    try:
        render(job)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"no such file: {exc}", file=sys.stderr)
        return 1
    print(job.output_path)
    return 0


def main_bars(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_bars",
        description="Similarity bar chart from a report CSV "
        "(query,vocab_name,similarity,winner_flag).",
    )
    parser.add_argument("csv", help="input report CSV")
    parser.add_argument("out", help="output image (.svg vector, .png raster)")
    args = parser.parse_args(argv)
    return _run(PlotJob(args.csv, "bars", args.out))


def main_sweep(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_sweep",
        description="SSP similarity curves from a sweep CSV (query,x,similarity) "
        "with dotted reference lines at encoded locations.",
    )
    parser.add_argument("csv", help="input sweep CSV")
    parser.add_argument("out", help="output image (.svg vector, .png raster)")
    parser.add_argument(
        "--ref", type=float, action="append", default=[],
        help="reference x position (repeatable)",
    )
    args = parser.parse_args(argv)
    return _run(PlotJob(args.csv, "sweep", args.out, annotations=args.ref))


if __name__ == "__main__":
    sys.exit(main_bars())
