"""One figure per invocation.

    lpfigures --kind timeseries --input out_run/mu_trajectory.csv --out mu.png
    lpfigures --kind leaf3d --input out_run/mu_trajectory.csv \
              --summary out_run/summary.json --out leaf.png
    lpfigures --kind error_compare --input out_cmp/invariants.csv \
              out_cmp/baseline_invariants.csv --out drift.png
"""

import argparse
import sys

from .render import KINDS, FigureRequest, render


def _parser():
    p = argparse.ArgumentParser(
        prog="lpfigures",
        description="Render figures from liepoisson CLI output files.",
    )
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--input", required=True, nargs="+", help="input CSV file(s)")
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--summary", default="", help="summary.json (leaf3d only)")
    p.add_argument("--columns", default="",
                   help="comma-separated column restriction")
    p.add_argument("--title", default="")
    p.add_argument("--dpi", type=int, default=150)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    req = FigureRequest(
        kind=args.kind,
        inputs=tuple(args.input),
        out=args.out,
        summary=args.summary,
        columns=tuple(c for c in args.columns.split(",") if c),
        title=args.title,
        dpi=args.dpi,
    )
    try:
        out = render(req)
    except (ValueError, OSError, KeyError) as e:
        # JSONDecodeError is a ValueError, so bad summary files land here too
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"{args.kind}: wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
