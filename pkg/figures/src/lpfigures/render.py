"""Figure rendering over the CSV/JSON files the liepoisson CLI writes.

Three kinds:

* ``timeseries``: every column of a trajectory file against time;
* ``leaf3d``: the dual trajectory threaded through translucent isosurfaces
  of the energy and the Casimir at their initial values;
* ``error_compare``: invariant relative errors of the collective run (dashed
  red) over the direct Runge-Kutta baseline (solid blue).

Inputs are read only; nothing is written until a figure fully assembles, so
a bad input never leaves a truncated image behind.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .levels import level_functions

KINDS = ("timeseries", "leaf3d", "error_compare")
GRID = 48
BBOX_PAD = 0.2
ERROR_FLOOR = 1e-18  # keeps exact zeros visible on the log axis

# fixed metadata so a re-render is byte-identical across matplotlib builds
_META = {"Software": "lpfigures"}


@dataclass(frozen=True)
class FigureRequest:
    kind: str
    inputs: tuple = ()
    out: str = ""
    summary: str = ""  # leaf3d: summary.json with the preset echo
    columns: tuple = ()  # timeseries/error_compare: restrict to these
    title: str = ""
    dpi: int = 150


def read_table(path):
    """Header names and a 2-d float array; empty or malformed files fail."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        has_data = any(line.strip() for line in fh)
    if not header:
        raise ValueError(f"{path}: empty file")
    if not has_data:
        raise ValueError(f"{path}: no data rows")
    names = header.split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(names):
        raise ValueError(f"{path}: {len(names)} columns in header, {data.shape[1]} in data")
    return names, data


def columns_by_name(path, wanted=None):
    names, data = read_table(path)
    cols = {name: data[:, i] for i, name in enumerate(names)}
    for name in wanted or ():
        if name not in cols:
            raise ValueError(
                f"column {name!r} not found in {path}; available: {names}"
            )
    return cols


def _finish(fig, req: FigureRequest):
    out = Path(req.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=req.dpi, metadata=_META)
    plt.close(fig)
    return out


def _render_timeseries(req: FigureRequest):
    if len(req.inputs) != 1:
        raise ValueError("timeseries takes exactly one input CSV")
    cols = columns_by_name(req.inputs[0], ("t", *req.columns))
    names = req.columns or tuple(n for n in cols if n != "t")
    fig, ax = plt.subplots(figsize=(7, 4))
    for name in names:
        ax.plot(cols["t"], cols[name], lw=1.0, label=name)
    ax.set_xlabel("t")
    ax.legend(loc="best")
    ax.set_title(req.title or Path(req.inputs[0]).stem)
    fig.tight_layout()
    return _finish(fig, req)


def _load_summary(path):
    if not path:
        raise ValueError("leaf3d needs --summary pointing at the run's summary.json")
    with open(path) as fh:
        summary = json.load(fh)
    for key in ("preset", "params"):
        if key not in summary:
            raise ValueError(f"{path}: missing {key!r} entry")
    return summary


def _isosurface(ax, fn, grids, axes, level, color, label):
    from skimage.measure import marching_cubes

    vol = fn(*grids)
    # the energy can be undefined beyond a domain wall; a large finite value
    # on that side reproduces the divergence without breaking marching cubes
    vol = np.nan_to_num(vol, nan=level + 10.0 * (1.0 + abs(level)))
    try:
        verts, faces, _, _ = marching_cubes(
            vol,
            level=level,
            spacing=tuple(ax_[1] - ax_[0] for ax_ in axes),
        )
    except ValueError:
        raise ValueError(
            f"level set {label}={level:.6g} does not cross the padded "
            "trajectory bounding box"
        ) from None
    verts += np.array([axes[0][0], axes[1][0], axes[2][0]])
    ax.plot_trisurf(
        verts[:, 0], verts[:, 1], faces, verts[:, 2],
        color=color, alpha=0.3, linewidth=0.0, shade=True,
    )


def _render_leaf3d(req: FigureRequest):
    if len(req.inputs) != 1:
        raise ValueError("leaf3d takes exactly one dual trajectory CSV")
    names, data = read_table(req.inputs[0])
    if names[0] != "t" or len(names) != 4:
        raise ValueError(
            f"leaf3d needs a 3-component dual trajectory (t plus three "
            f"columns), got {names} in {req.inputs[0]}"
        )
    summary = _load_summary(req.summary)
    fields = level_functions(summary["preset"], summary["params"])
    mu = data[:, 1:4]

    axes = []
    for i in range(3):
        lo, hi = float(mu[:, i].min()), float(mu[:, i].max())
        pad = BBOX_PAD * (hi - lo)
        if pad == 0.0:
            pad = max(BBOX_PAD * abs(hi), 0.5)
        axes.append(np.linspace(lo - pad, hi + pad, GRID))
    grids = np.meshgrid(*axes, indexing="ij")

    levels = {
        name: float(fn(mu[0, 0], mu[0, 1], mu[0, 2])) for name, fn in fields.items()
    }

    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(projection="3d")
    _isosurface(ax, fields["h"], grids, axes, levels["h"], "tab:blue", "h")
    _isosurface(ax, fields["f1"], grids, axes, levels["f1"], "tab:orange", "f1")
    ax.plot(mu[:, 0], mu[:, 1], mu[:, 2], color="black", lw=1.2)
    ax.set_xlabel(names[1])
    ax.set_ylabel(names[2])
    ax.set_zlabel(names[3])
    ax.set_title(
        req.title
        or f"{summary['preset']}: h={levels['h']:.4g}, f1={levels['f1']:.4g}"
    )
    fig.tight_layout()
    return _finish(fig, req)


def _render_error_compare(req: FigureRequest):
    if len(req.inputs) != 2:
        raise ValueError(
            "error_compare takes the collective invariants CSV then the "
            "baseline invariants CSV"
        )
    coll = columns_by_name(req.inputs[0])
    base = columns_by_name(req.inputs[1])
    shared = [
        n for n in coll if n.endswith("_relerr") and n in base
    ]
    if req.columns:
        wanted = [f"{c}_relerr" for c in req.columns]
        missing = [w for w in wanted if w not in shared]
        if missing:
            raise ValueError(
                f"columns {missing} not shared by both inputs; shared: {shared}"
            )
        shared = wanted
    if not shared:
        raise ValueError("no shared *_relerr columns between the two inputs")

    fig, axs = plt.subplots(
        len(shared), 1, figsize=(7, 2.6 * len(shared)), sharex=True, squeeze=False
    )
    for ax, name in zip(axs[:, 0], shared):
        label = name.removesuffix("_relerr")
        ax.semilogy(
            base["t"], np.maximum(np.abs(base[name]), ERROR_FLOOR),
            color="tab:blue", lw=1.0, label=f"{label} direct rk4",
        )
        ax.semilogy(
            coll["t"], np.maximum(np.abs(coll[name]), ERROR_FLOOR),
            color="tab:red", lw=1.0, ls="--", label=f"{label} collective gauss",
        )
        ax.set_ylabel("|relative error|")
        ax.legend(loc="best", fontsize=8)
    axs[-1, 0].set_xlabel("t")
    axs[0, 0].set_title(req.title or "invariant drift, collective vs direct")
    fig.tight_layout()
    return _finish(fig, req)


_RENDERERS = {
    "timeseries": _render_timeseries,
    "leaf3d": _render_leaf3d,
    "error_compare": _render_error_compare,
}


def render(req: FigureRequest):
    """Dispatch on the figure kind; returns the written path."""
    if req.kind not in _RENDERERS:
        raise ValueError(f"unknown figure kind {req.kind!r}; one of {KINDS}")
    if not req.inputs:
        raise ValueError("no input files given")
    if not req.out:
        raise ValueError("no output path given")
    return _RENDERERS[req.kind](req)
