#!/usr/bin/env python3
"""Render harness CSV artifacts into figures.

Usage: python3 plots/render.py --spec <spec.json>

The spec file is JSON with a list of figure entries:

    {"figures": [
      {"kind": "timeseries-semilog",     # or: profile | field2d | schlieren | table
       "inputs": [{"path": "run/timeseries.csv", "column": "max_eps", "label": "LDG"}],
       "xlabel": "t", "ylabel": "max eps", "title": "...",
       "output": "figs/eps.png"},
      ...
    ]}

Only the documented CSV schemas are read; there is no solver coupling.
Rendering is deterministic: identical inputs give byte-identical images.
"""

import argparse
import csv
import json
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

KINDS = ("timeseries-semilog", "profile", "field2d", "schlieren", "table")

# strip nondeterministic/environment-specific PNG metadata
_SAVEFIG_KW = dict(dpi=130, metadata={"Software": None})


def read_table(path):
    """Read one harness CSV: returns (schema, dict column -> float array)."""
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# schema:"):
            raise ValueError(f"{path}: missing schema header line")
        schema = first.split(":", 1)[1].strip()
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    cols = {}
    for i, name in enumerate(header):
        vals = []
        for row in rows:
            cell = row[i] if i < len(row) else ""
            if cell == "":
                vals.append(np.nan)
            else:
                try:
                    vals.append(float(cell))
                except ValueError:
                    vals.append(np.nan)
        cols[name] = np.asarray(vals)
    if not rows:
        raise ValueError(f"{path}: empty series")
    return schema, cols


def _require(cols, names, path):
    for name in names:
        if name not in cols:
            raise KeyError(f"{path}: column {name!r} not in CSV (has {sorted(cols)})")


def render_timeseries_semilog(fig_spec, ax):
    for inp in fig_spec["inputs"]:
        schema, cols = read_table(inp["path"])
        ycol = inp.get("column", "max_eps")
        xcol = inp.get("x", "t")
        _require(cols, [xcol, ycol], inp["path"])
        y = np.abs(cols[ycol])
        floor = fig_spec.get("floor", 1e-20)
        y = np.maximum(y, floor)
        ax.semilogy(cols[xcol], y, label=inp.get("label", ycol), lw=1.2)
    ax.set_xlabel(fig_spec.get("xlabel", "t"))
    ax.set_ylabel(fig_spec.get("ylabel", ""))
    ax.legend()


def render_profile(fig_spec, ax):
    for inp in fig_spec["inputs"]:
        schema, cols = read_table(inp["path"])
        xcol = inp.get("x", "x")
        ycol = inp.get("column", "rho")
        _require(cols, [xcol, ycol], inp["path"])
        order = np.argsort(cols[xcol], kind="stable")
        style = inp.get("style", "-")
        ax.plot(cols[xcol][order], cols[ycol][order], style,
                label=inp.get("label", ycol), lw=1.0, ms=2)
    ax.set_xlabel(fig_spec.get("xlabel", "x"))
    ax.set_ylabel(fig_spec.get("ylabel", "rho"))
    ax.legend()


def _scatter_field(fig_spec, ax, default_col, cmap, inp=None):
    inp = inp or fig_spec["inputs"][0]
    schema, cols = read_table(inp["path"])
    ycol = inp.get("column", default_col)
    _require(cols, ["x", "y", ycol], inp["path"])
    sc = ax.scatter(cols["x"], cols["y"], c=cols[ycol], s=2.0, cmap=cmap,
                    marker="s", linewidths=0)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    return sc


def render_field2d(fig_spec, ax, fig):
    sc = _scatter_field(fig_spec, ax, "rho", fig_spec.get("cmap", "viridis"))
    fig.colorbar(sc, ax=ax, shrink=0.8)


def render_schlieren(fig_spec, ax, fig):
    sc = _scatter_field(fig_spec, ax, "rho_schl", "gray")
    fig.colorbar(sc, ax=ax, shrink=0.8)


def render_tablefig(fig_spec, ax):
    schema, cols = read_table(fig_spec["inputs"][0]["path"])
    names = list(cols)
    body = [
        [("" if np.isnan(cols[n][i]) else f"{cols[n][i]:.4g}") for n in names]
        for i in range(len(next(iter(cols.values()))))
    ]
    ax.axis("off")
    tbl = ax.table(cellText=body, colLabels=names, loc="center")
    tbl.scale(1.0, 1.3)


def render(fig_spec):
    kind = fig_spec["kind"]
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind {kind!r}")
    fig, ax = plt.subplots(figsize=fig_spec.get("figsize", (6.0, 4.0)))
    if kind == "timeseries-semilog":
        render_timeseries_semilog(fig_spec, ax)
    elif kind == "profile":
        render_profile(fig_spec, ax)
    elif kind == "field2d":
        render_field2d(fig_spec, ax, fig)
    elif kind == "schlieren":
        render_schlieren(fig_spec, ax, fig)
    elif kind == "table":
        render_tablefig(fig_spec, ax)
    if "title" in fig_spec:
        ax.set_title(fig_spec["title"])
    out = fig_spec["output"]
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    fig.tight_layout()
    fig.savefig(out, **_SAVEFIG_KW)
    plt.close(fig)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spec", required=True, help="JSON figure spec")
    args = ap.parse_args(argv)
    with open(args.spec) as fh:
        spec = json.load(fh)
    outputs = []
    for fig_spec in spec["figures"]:
        outputs.append(render(fig_spec))
        print(f"wrote {outputs[-1]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
