"""File formats: matrix CSV, label files, JSON configs/results and SVG scatter."""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import ConfigError, NonFiniteInput

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
           "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def read_matrix_csv(path, header=False):
    """One row per data point, comma separated, optional single header line."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, 1):
            if header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise NonFiniteInput(f"{path}:{lineno}: cell does not parse as a number") from None
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ConfigError(f"{path}: rows have different lengths")
    m = np.array(rows)
    if not np.all(np.isfinite(m)):
        raise NonFiniteInput(f"{path}: non-finite cell")
    return m


def write_matrix_csv(path, m, header=None, fmt="%.17g"):
    m = np.atleast_2d(np.asarray(m))
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in m:
            fh.write(",".join(fmt % v for v in row) + "\n")


def read_labels(path):
    with open(path) as fh:
        vals = [line.strip() for line in fh if line.strip()]
    try:
        return np.array([int(v) for v in vals], dtype=int)
    except ValueError:
        raise ConfigError(f"{path}: labels must be integers") from None


def write_labels(path, labels):
    with open(path, "w") as fh:
        for v in labels:
            fh.write(f"{int(v)}\n")


def load_json_object(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return obj


def check_keys(obj, allowed, where="config"):
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")


def _encode(obj):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        s = format(x, ".17g")
        if not any(ch in s for ch in ".en"):
            s += ".0"
        return s
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj)


def non_finite_paths(obj, prefix=""):
    """Dotted paths of float leaves that are NaN or infinite."""
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from non_finite_paths(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple, np.ndarray)):
        for i, v in enumerate(obj):
            yield from non_finite_paths(v, f"{prefix}[{i}]")
    elif isinstance(obj, (float, np.floating)) and not math.isfinite(float(obj)):
        yield prefix


def write_scatter_svg(path, coords, labels):
    """Minimal scatter: r=3 circles coloured by label, viewBox fitted with a 5% margin."""
    xy = np.asarray(coords, dtype=float)[:, :2]
    x, y = xy[:, 0], -xy[:, 1]  # SVG y grows downwards
    lo = np.array([x.min(), y.min()])
    span = np.array([x.max(), y.max()]) - lo
    span = np.where(span > 0, span, 1.0)
    margin = 0.05 * span
    # scale to a 400-unit wide canvas so the fixed 3px radius is meaningful
    k = 400.0 / (span[0] + 2 * margin[0])
    w = (span[0] + 2 * margin[0]) * k
    h = (span[1] + 2 * margin[1]) * k
    px = (x - lo[0] + margin[0]) * k
    py = (y - lo[1] + margin[1]) * k
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.3f} {h:.3f}" '
             f'width="{w:.0f}" height="{h:.0f}">']
    for cx, cy, lab in zip(px, py, labels):
        parts.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="3" '
                     f'fill="{PALETTE[int(lab) % len(PALETTE)]}"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
