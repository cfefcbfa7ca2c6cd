"""Provenance-stamped CSV and JSON writers.

CSV files begin with ``# key: value`` comment lines followed by a plain
header row, so ``numpy.loadtxt(..., delimiter=',', comments='#', skiprows=...)``
or ``pandas.read_csv(..., comment='#')`` read them back directly.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from . import __version__

TOOL = "fockphase"
OUTPUT_DIR_ENV = "FOCKPHASE_OUTPUT_DIR"


def provenance(**params) -> dict:
    return {"tool": TOOL, "version": __version__, **params}


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    return str(v)


def write_csv(path, header: list[str], data, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.asarray(data, dtype=float)
    with open(path, "w", newline="\n") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}: {_fmt(value)}\n")
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, fmt="%.17g", delimiter=",")
    return path


def write_rows_csv(path, header: list[str], rows, meta: dict | None = None) -> Path:
    """Like write_csv but for mixed-type rows (bools and ints stay literal)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def cell(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (float, np.floating)):
            return "%.17g" % v
        return str(v)

    with open(path, "w", newline="\n") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}: {_fmt(value)}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell(v) for v in row) + "\n")
    return path


def write_json(path, doc: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return path


def read_csv(path) -> tuple[dict, list[str], np.ndarray]:
    """Inverse of write_csv: (meta as raw strings, header, data)."""
    meta, header, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                meta[key.strip()] = value.strip()
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(x) for x in line.split(",")])
    return meta, header, np.array(rows)


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))
