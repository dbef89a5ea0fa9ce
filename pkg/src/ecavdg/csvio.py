"""Versioned CSV schemas for all harness outputs.

Every file starts with a ``# schema: <name> v<version>`` comment line and a
header row; floats are serialized with 17 significant digits so runs are
bit-reproducible.  Column orders are fixed here and documented in the README.
"""

from __future__ import annotations

import csv

SCHEMAS = {
    "timeseries": (
        1,
        ["step", "t", "dt", "max_eps", "entropy_rate", "lemma2_lhs",
         "lemma1_residual", "r_min", "r_max", "l2_error_abs", "l2_error_rel"],
    ),
    "steps": (1, ["step", "t", "dt", "accepted", "err_estimate"]),
    "profile": (1, None),   # 1D: x then one column per variable (+ exact)
    "field2d": (1, None),   # x, y, then variables
    "schlieren": (1, ["x", "y", "rho_schl"]),
    "summary": (1, ["key", "value"]),
    "convergence": (1, None),
    "compare": (1, ["t", "eps_a", "eps_b", "err_a", "err_b"]),
}


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int,)):
        return str(x)
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def write_csv(path, schema, rows, header=None):
    version, columns = SCHEMAS[schema]
    if columns is None:
        if header is None:
            raise ValueError(f"schema {schema!r} needs an explicit header")
        columns = header
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: ecavdg-{schema} v{version}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """Return (schema_line, header, rows-as-strings)."""
    with open(path) as fh:
        schema_line = fh.readline().strip()
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader]
    return schema_line, header, rows
