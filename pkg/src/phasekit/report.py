"""Byte-stable JSON and CSV output.

Numbers are rounded to 12 significant digits, field order is fixed by the
caller, and line endings are always "\\n".
"""

import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

SIG_DIGITS = 12

MOMENT_REPORT_SCHEMA = {
    "type": "object",
    "required": ["mean", "second_moment", "variance", "method", "norm_defect", "grid"],
    "properties": {
        "mean": {"type": "number"},
        "second_moment": {"type": "number"},
        "variance": {"type": "number"},
        "method": {"enum": ["q-integral", "operator-expectation", "pegg-barnett"]},
        "norm_defect": {"type": "number", "minimum": 0},
        "grid": {
            "type": "object",
            "required": ["n_radial", "n_angular", "theta0"],
            "properties": {
                "n_radial": {"type": ["integer", "null"]},
                "n_angular": {"type": ["integer", "null"]},
                "theta0": {"type": "number"},
            },
        },
        "meta": {"type": "object"},
    },
}

UNITARITY_REPORT_SCHEMA = {
    "type": "object",
    "required": ["dim", "diagonal_of_EdagE", "diagonal_of_EEdag", "max_defect_inner_block"],
    "properties": {
        "dim": {"type": "integer", "minimum": 2},
        "diagonal_of_EdagE": {"type": "array", "items": {"type": "number"}},
        "diagonal_of_EEdag": {"type": "array", "items": {"type": "number"}},
        "max_defect_inner_block": {"type": "number"},
        "max_defect_inner_block_EEdag": {"type": "number"},
    },
}

EQUIVALENCE_REPORT_SCHEMA = {
    "type": "object",
    "required": ["block", "max_abs_dev", "fro_dev", "entries"],
    "properties": {
        "block": {"type": "integer", "minimum": 1},
        "max_abs_dev": {"type": "number", "minimum": 0},
        "fro_dev": {"type": "number", "minimum": 0},
        "entries": {
            "type": "array",
            "items": {"type": "object", "required": ["m", "n", "abs_dev"]},
        },
    },
}


def fmt(x):
    return f"{float(x):.{SIG_DIGITS}g}"


def rounded(obj):
    """Recursively round floats to 12 significant digits and convert numpy scalars."""
    if isinstance(obj, dict):
        return {str(k): rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [rounded(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": rounded(obj.real), "im": rounded(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return None
        value = float(fmt(obj))
        return 0.0 if value == 0 else value
    return obj


def json_text(data):
    return json.dumps(rounded(data), indent=2) + "\n"


def distribution_csv(dist):
    lines = ["theta,p"]
    lines += [f"{fmt(t)},{fmt(p)}" for t, p in zip(dist.thetas, dist.values)]
    return "\n".join(lines) + "\n"


def operator_csv(op):
    lines = ["m,n,re,im"]
    for m in range(op.dim):
        for n in range(op.dim):
            z = op.entries[m, n]
            lines.append(f"{m},{n},{fmt(z.real)},{fmt(z.imag)}")
    return "\n".join(lines) + "\n"


def operator_meta(op):
    return {"method": op.method, "dim": op.dim, "meta": op.meta}


def read_operator_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    dim = max(int(r["m"]) for r in rows) + 1
    out = np.zeros((dim, dim), dtype=complex)
    for r in rows:
        out[int(r["m"]), int(r["n"])] = complex(float(r["re"]), float(r["im"]))
    return out


def read_distribution_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([float(r["theta"]) for r in rows]), np.array([float(r["p"]) for r in rows])


def write_text(text, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def render(report, fmt_name):
    """Text for a report object in ``json`` or ``csv`` format."""
    if fmt_name == "csv":
        if hasattr(report, "thetas"):
            return distribution_csv(report)
        if hasattr(report, "entries") and hasattr(report, "method"):
            return operator_csv(report)
        raise ValueError(f"{type(report).__name__} has no CSV form")
    data = report.to_dict() if hasattr(report, "to_dict") else report
    return json_text(data)


def write_report(report, fmt_name, path):
    """Write ``report`` to ``path``; ``path`` of None means standard output."""
    text = render(report, fmt_name)
    if path is None:
        sys.stdout.write(text)
        return None
    write_text(text, path)
    return Path(path)


def sidecar_path(path, suffix):
    path = Path(path)
    return path.with_name(path.stem + suffix)
