"""Command line front end: render one swapqueue CSV to a PNG."""

import argparse
import sys

from .render import KINDS, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figs",
        description="Render a swapqueue-sim CSV file to a PNG figure.",
    )
    parser.add_argument("csv", help="input CSV file")
    parser.add_argument(
        "--kind", required=True, choices=sorted(KINDS), help="figure kind"
    )
    parser.add_argument(
        "--out", help="output PNG path (default: the CSV path with .png)"
    )
    args = parser.parse_args(argv)
    try:
        out = render(args.csv, args.kind, args.out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
