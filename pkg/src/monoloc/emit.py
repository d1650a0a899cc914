"""Stable CSV/JSON artifacts and optional gnuplot stubs."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os

import numpy as np

SCHEMAS = {
    "curves": ["level", "x", "mu", "is_left_limit"],
    "spectrum": ["index", "E"],
    "lyapunov": ["E", "gamma_n", "n", "sampling", "stderr_estimate"],
    "ids": ["E", "N", "n", "samples", "bc"],
    "pairs": ["E", "n0", "rate", "R2", "verdict", "gammaE"],
    "thouless": ["E", "thouless", "gamma_n", "diff"],
    "gaps": ["k", "q_k", "p_k", "large_len", "large_count", "small_len", "small_count"],
}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def write_csv(path, schema, rows):
    cols = SCHEMAS[schema]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])
    return path


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))
    return path


def sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


_PLOTS = {
    "lyapunov": ("E", "gamma_n", "set xlabel 'E'; set ylabel 'gamma_n(E)'", "1:2"),
    "ids": ("E", "N", "set xlabel 'E'; set ylabel 'N(E)'", "1:2"),
    "curves": ("x", "mu", "set xlabel 'x'; set ylabel 'mu'", "2:3"),
    "pairs": ("E", "rate", "set xlabel 'E'; set ylabel 'rate'", "1:3"),
}


def gnuplot_stub(out_dir, schema, csv_name):
    """Minimal script plotting the CSV next to it."""
    if schema not in _PLOTS:
        return None
    _, _, labels, cols = _PLOTS[schema]
    path = os.path.join(out_dir, f"{schema}.gp")
    with open(path, "w") as fh:
        fh.write("set datafile separator ','\n")
        fh.write(labels + "\n")
        fh.write(f"plot '{csv_name}' every ::1 using {cols} with points pt 7 ps 0.4 notitle\n")
    return path


def emit_plotdata(out_dir, schema, rows, summary=None, gnuplot=False, name=None):
    """Write ``<name>.csv`` (and ``summary.json``); returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    name = name or schema
    paths = [write_csv(os.path.join(out_dir, f"{name}.csv"), schema, rows)]
    if summary is not None:
        paths.append(write_json(os.path.join(out_dir, "summary.json"), summary))
    if gnuplot:
        p = gnuplot_stub(out_dir, schema, f"{name}.csv")
        if p:
            paths.append(p)
    return paths
