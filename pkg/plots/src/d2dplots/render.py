"""Render scaling, r-profile, and goodness-bound figures from sweep CSVs.

Consumes the simulator's CSV schema as documented bytes-for-bytes; no
simulation logic lives here. Output is PNG with no embedded timestamps, so a
rerun over the same CSV produces an identical file.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("scaling", "r-profile", "goodness-bounds")

# columns each kind needs; x/y defaults for the curve kinds
REQUIRED = {
    "scaling": ("n", "L_greedy_mean"),
    "r-profile": ("r", "L_greedy_mean"),
    "goodness-bounds": ("k", "empirical", "lower", "upper"),
}

_RC = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}


class RenderError(Exception):
    pass


class MissingColumnError(RenderError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"csv is missing required column {column!r}")


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    kind: str
    out_path: str
    x: str | None = None
    y: str | None = None
    overlay: bool = True


def _read_columns(path: str, columns: tuple[str, ...]) -> dict[str, np.ndarray]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            rows = list(reader)
    except FileNotFoundError:
        raise RenderError(f"csv file not found: {path}")
    if not rows:
        raise RenderError(f"csv has no data rows: {path}")
    for col in columns:
        if col not in header:
            raise MissingColumnError(col)
    out = {}
    for col in columns:
        try:
            out[col] = np.asarray([float(r[col]) for r in rows])
        except ValueError:
            raise RenderError(f"column {col!r} contains non-numeric entries")
    return out


def _fit_loglog(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and intercept of ln y against ln x."""
    if (x <= 0).any() or (y <= 0).any():
        raise RenderError("power-law overlay needs strictly positive data")
    lx, ly = np.log(x), np.log(y)
    dx = lx - lx.mean()
    slope = float(np.dot(dx, ly - ly.mean()) / np.dot(dx, dx))
    return slope, float(ly.mean() - slope * lx.mean())


def _render_scaling(spec: PlotSpec, ax) -> dict:
    x_col = spec.x or REQUIRED["scaling"][0]
    y_col = spec.y or REQUIRED["scaling"][1]
    se_col = f"{y_col[:-5]}_se" if y_col.endswith("_mean") else None
    cols = (x_col, y_col) + ((se_col,) if se_col else ())
    try:
        data = _read_columns(spec.csv_path, cols)
    except MissingColumnError:
        data = _read_columns(spec.csv_path, (x_col, y_col))
        se_col = None
    order = np.argsort(data[x_col])
    x, y = data[x_col][order], data[y_col][order]
    if se_col:
        ax.errorbar(x, y, yerr=1.96 * data[se_col][order], fmt="o", capsize=3, label="simulated")
    else:
        ax.plot(x, y, "o", label="simulated")
    meta = {"slope": None}
    if spec.overlay and len(x) >= 2:
        slope, intercept = _fit_loglog(x, y)
        xs = np.geomspace(x.min(), x.max(), 64)
        ax.plot(xs, np.exp(intercept) * xs**slope, "-", label=f"fit slope {slope:.2f}")
        meta["slope"] = slope
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(x_col)
    ax.set_ylabel(y_col)
    ax.legend()
    return meta


def _render_r_profile(spec: PlotSpec, ax) -> dict:
    x_col = spec.x or REQUIRED["r-profile"][0]
    y_col = spec.y or REQUIRED["r-profile"][1]
    data = _read_columns(spec.csv_path, (x_col, y_col))
    order = np.argsort(data[x_col])
    x, y = data[x_col][order], data[y_col][order]
    best = int(np.argmax(y))
    ax.plot(x, y, "o-", label=y_col)
    ax.axvline(x[best], linestyle="--", color="tab:red", label=f"r* = {x[best]:.4g}")
    ax.set_xscale("log")
    ax.set_xlabel(x_col)
    ax.set_ylabel(y_col)
    ax.legend()
    return {"r_star": float(x[best]), "slope": None}


def _render_goodness(spec: PlotSpec, ax) -> dict:
    data = _read_columns(spec.csv_path, REQUIRED["goodness-bounds"])
    order = np.argsort(data["k"])
    k = data["k"][order]
    ax.plot(k, data["upper"][order], "s--", label="upper bound")
    ax.plot(k, data["empirical"][order], "o-", label="empirical")
    ax.plot(k, data["lower"][order], "v--", label="lower bound")
    ax.set_xlabel("cluster occupancy k")
    ax.set_ylabel("Pr[cluster good]")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    return {"slope": None}


def render(spec: PlotSpec) -> dict:
    """Draw the figure described by spec; returns metadata (fitted slope etc.)."""
    if spec.kind not in KINDS:
        raise RenderError(f"unknown plot kind {spec.kind!r}; expected one of {KINDS}")
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        try:
            if spec.kind == "scaling":
                meta = _render_scaling(spec, ax)
            elif spec.kind == "r-profile":
                meta = _render_r_profile(spec, ax)
            else:
                meta = _render_goodness(spec, ax)
            out = Path(spec.out_path)
            out.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(out, format="png")  # PNG carries no timestamp metadata
        finally:
            plt.close(fig)
    meta["out"] = str(spec.out_path)
    meta["kind"] = spec.kind
    return meta
