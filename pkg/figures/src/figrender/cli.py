"""`render_figs <out_dir>`: render figures next to the discovered CSVs."""

from __future__ import annotations

import argparse
import sys

from .render import SchemaError, render_directory


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figs",
        description="Render failure-probability heatmaps and threshold curves "
                    "from grid.csv / thresholds.csv in a results directory.")
    parser.add_argument("out_dir", help="directory containing the CSV outputs")
    args = parser.parse_args(argv)
    try:
        files = render_directory(args.out_dir)
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"render_figs: {exc}", file=sys.stderr)
        return 1
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
