"""File formats: point-cloud and labeling CSVs, grid-function CSV/binary,
experiment trial CSVs, JSON summaries, and SVG plots.

Floats in CSVs are written with 17 significant digits so round trips are
exact.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .experiments import RateFitResult, TrialResult
from .hj import Grid, GridFunction
from .sampling import PointCloud

FLOAT_FMT = "{:.17g}"


def _fmt(x: float) -> str:
    return FLOAT_FMT.format(float(x))


def write_cloud_csv(path, cloud: PointCloud) -> None:
    meta = cloud.meta
    header = "# d={d} n={n} seed={seed} mode={mode}\n".format(
        d=cloud.d, n=meta.get("n", cloud.size), seed=meta.get("seed", 0),
        mode=meta.get("mode", "poisson"),
    )
    with open(path, "w") as fh:
        fh.write(header)
        for row in cloud.points:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_cloud_csv(path) -> PointCloud:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ValueError("missing cloud header line")
        meta = {}
        for tok in header[1:].split():
            key, _, val = tok.partition("=")
            meta[key] = val
        rows = [
            [float(v) for v in line.split(",")]
            for line in fh
            if line.strip()
        ]
    pts = np.array(rows, dtype=float) if rows else np.zeros((0, int(meta["d"])))
    out_meta = {
        "n": int(meta.get("n", pts.shape[0])),
        "seed": int(meta.get("seed", 0)),
        "mode": meta.get("mode", "poisson"),
    }
    return PointCloud(points=pts, meta=out_meta)


def write_labeling_csv(path, cloud: PointCloud, depth: np.ndarray,
                       front: np.ndarray) -> None:
    d = cloud.d
    cols = ["point_index"] + [f"x{j}" for j in range(d)] + ["depth", "front"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for i, row in enumerate(cloud.points):
            vals = [str(i)] + [_fmt(v) for v in row] + [str(int(depth[i])), str(int(front[i]))]
            fh.write(",".join(vals) + "\n")


def write_gridfunction_csv(path, gf: GridFunction) -> None:
    g = gf.grid
    cols = [f"i{j}" for j in range(g.d)] + [f"x{j}" for j in range(g.d)] + ["value"]
    axis = g.axis
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for idx in np.ndindex(*gf.values.shape):
            coords = [axis[k] for k in idx]
            row = [str(k) for k in idx] + [_fmt(c) for c in coords] + [_fmt(gf.values[idx])]
            fh.write(",".join(row) + "\n")


def write_gridfunction_binary(path, gf: GridFunction) -> None:
    """16-byte header (d, m as little-endian int64) then row-major float64."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qq", gf.grid.d, gf.grid.m))
        fh.write(np.ascontiguousarray(gf.values, dtype="<f8").tobytes())


def read_gridfunction_binary(path, side: float = 1.0) -> GridFunction:
    with open(path, "rb") as fh:
        d, m = struct.unpack("<qq", fh.read(16))
        data = np.frombuffer(fh.read(), dtype="<f8").reshape((m,) * d)
    return GridFunction(grid=Grid(d=d, m=m, side=side), values=data.copy())


def write_trials_csv(path, rows: list[TrialResult]) -> None:
    ordered = sorted(rows, key=lambda r: (r.n, r.trial_index))
    with open(path, "w") as fh:
        fh.write("n,trial_index,seed,statistic\n")
        for r in ordered:
            fh.write(f"{r.n},{r.trial_index},{r.seed},{_fmt(r.statistic)}\n")


def jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


def write_summary_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def rate_fit_summary(fit: RateFitResult) -> dict:
    return {
        "ns": fit.ns,
        "means": fit.means,
        "stds": fit.stds,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r2": fit.r2,
        "theory_slope": fit.theory_slope,
        "extras": jsonable(fit.extras),
    }


def write_blowup_outputs(stem, fit) -> None:
    """CSV of (R, constant) plus a JSON summary with slope and r2."""
    stem = Path(stem)
    with open(stem.with_suffix(".csv"), "w") as fh:
        fh.write("R,constant,samples\n")
        for R, c, s in zip(fit.radii, fit.constants, fit.samples):
            fh.write(f"{_fmt(R)},{_fmt(c)},{int(s)}\n")
    write_summary_json(stem.with_suffix(".summary.json"),
                       {"slope": fit.slope, "r2": fit.r2})


def emit_plot(series, style: str, path) -> None:
    """Standalone SVG scatter of labeled (x, y) series with least-squares
    reference lines; decorative only, never read by checks.

    series: list of (label, xs, ys); style: 'loglog' or 'linear'.
    """
    if not series:
        raise ValueError("empty series")
    if style not in ("loglog", "linear"):
        raise ValueError(f"unknown style {style!r}")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, xs, ys in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.size == 0:
            raise ValueError(f"series {label!r} is empty")
        ax.plot(xs, ys, "o", label=label, markersize=5)
        if xs.size >= 2:
            if style == "loglog":
                slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
                xs_line = np.linspace(xs.min(), xs.max(), 64)
                ax.plot(xs_line, np.exp(intercept) * xs_line**slope, "-",
                        alpha=0.7, label=f"{label} fit: slope {slope:.3f}")
            else:
                slope, intercept = np.polyfit(xs, ys, 1)
                xs_line = np.linspace(xs.min(), xs.max(), 64)
                ax.plot(xs_line, intercept + slope * xs_line, "-",
                        alpha=0.7, label=f"{label} fit: slope {slope:.3f}")
    if style == "loglog":
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
