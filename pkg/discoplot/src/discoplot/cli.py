"""Command line for rendering sweep-results CSVs to figures."""

from __future__ import annotations

import argparse
import sys
import warnings

from .reader import CsvFormatError
from .render import PlotSpec, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="discosim-plot",
        description="Render a sweep-results CSV as a line chart with confidence bands",
    )
    parser.add_argument("--csv", required=True, help="input results CSV")
    parser.add_argument("--out", required=True, help="output image path (png, pdf, svg)")
    parser.add_argument("--title", default=None, help="figure title")
    parser.add_argument("--xlabel", default=None, help="override the x-axis label")
    parser.add_argument("--ylabel", default=None, help="override the y-axis label")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    spec = PlotSpec(
        input_csv=args.csv,
        output_image=args.out,
        title=args.title,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            render(spec)
        except CsvFormatError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
