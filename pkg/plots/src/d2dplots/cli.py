"""Command-line wrapper: one figure per invocation, written next to the CSV."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .render import KINDS, MissingColumnError, PlotSpec, RenderError, render


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="d2dplot", description="Render figures from simulator sweep CSVs"
    )
    parser.add_argument("--csv", required=True, help="input CSV (simulator schema)")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", default=None, help="output PNG (default: alongside the CSV)")
    parser.add_argument("--x", default=None, help="x column override")
    parser.add_argument("--y", default=None, help="y column override")
    parser.add_argument("--no-overlay", action="store_true", help="skip the fitted overlay")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    out = args.out or str(Path(args.csv).with_suffix(f".{args.kind}.png"))
    spec = PlotSpec(
        csv_path=args.csv,
        kind=args.kind,
        out_path=out,
        x=args.x,
        y=args.y,
        overlay=not args.no_overlay,
    )
    try:
        meta = render(spec)
    except MissingColumnError as exc:
        print(f"error: missing column {exc.column!r}", file=sys.stderr)
        return 2
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(meta))
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
