"""render-figures: draw one experiment's figure from its CSV/JSON outputs.

    render-figures --in results/fig3 --fig fig3 --out fig3.png

Exit codes: 0 success, 2 missing/ill-formed input.
"""

import argparse
import sys

from .reader import InputDataError
from .render import FIGURE_IDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="render-figures", description=__doc__)
    parser.add_argument("--in", dest="input_dir", required=True,
                        help="experiment output directory (holds summary.json)")
    parser.add_argument("--fig", dest="figure", required=True, choices=FIGURE_IDS,
                        help="figure id to render")
    parser.add_argument("--out", dest="output", required=True,
                        help="output image path (.png, .pdf, .svg, ...)")
    parser.add_argument("--no-overlays", action="store_true",
                        help="suppress fitted-curve overlays")
    parser.add_argument("--x-scale", choices=("linear", "log"), default="")
    parser.add_argument("--y-scale", choices=("linear", "log"), default="")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        experiment=args.figure,
        input_dir=args.input_dir,
        output_path=args.output,
        x_scale=args.x_scale,
        y_scale=args.y_scale,
        overlays=not args.no_overlays,
    )
    try:
        path = render(spec)
    except InputDataError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
