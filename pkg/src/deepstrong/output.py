"""Deterministic CSV/JSON writers with a metadata preamble.

Floats are printed with ``%.12g``; NaN (a spectral gap) is written as
``nan`` in CSV and ``null`` in JSON. Files are UTF-8 with LF endings.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__

UNITS = ("frequency THz (linear), time ps, length um, damping 1/ps, density m^-2, "
         "quadratures X=(a+a^dag)/sqrt(2) with vacuum variance 1/2")


def metadata(config_hash: str, **extra) -> dict:
    meta = {"tool": "deepstrong", "version": __version__, "config_sha256": config_hash,
            "units": UNITS}
    meta.update(extra)
    return meta


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.12g" % x


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if not math.isfinite(x) else float("%.12g" % x)
    return obj


def write_json(path: Path, meta: dict, payload: dict) -> Path:
    doc = {"metadata": meta}
    doc.update(payload)
    text = json.dumps(_clean(doc), indent=2, ensure_ascii=False, allow_nan=False)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")
    return path


def write_csv(path: Path, meta: dict, header, rows) -> Path:
    """Comment preamble (``# key: value``), one header line, then data rows."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}: {v}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path
