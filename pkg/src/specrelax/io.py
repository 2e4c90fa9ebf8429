"""File formats and deterministic serialization.

Chain files: JSON {"kernel": [[...]]} or dense CSV (n rows of n floats).
Profile files: JSON {"eigenvalues": [...], "log_weights": [...]}.
Floats are emitted with 17 significant digits so output is byte-stable and
round-trips exactly.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .chains import ReversibleChain, Tolerances, build_chain
from .errors import IoError
from .trajectory import SpectralProfile


def fmt(x) -> str:
    """17-significant-digit decimal rendering; empty string for missing."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x != x:
        return "nan"
    if x == float("inf"):
        return "inf"
    if x == float("-inf"):
        return "-inf"
    return format(x, ".17g")


def write_csv(path: str | None, header: list[str], rows: list[list]) -> str:
    """Render rows to CSV text; write to `path` when given.  Returns the text."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if not isinstance(v, str) else v for v in row))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def dump_json(obj, path: str | None = None) -> str:
    """Deterministic JSON with full-precision floats."""
    text = json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if x != x or x in (float("inf"), float("-inf")):
            return fmt(x)
        return float(fmt(x))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def load_chain_file(path: str, tol: Tolerances | None = None) -> ReversibleChain:
    if not os.path.exists(path):
        raise IoError(f"chain file not found: {path}")
    try:
        if path.endswith(".json"):
            with open(path) as fh:
                data = json.load(fh)
            kernel = np.asarray(data["kernel"], dtype=float)
        else:
            kernel = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise IoError(f"malformed chain file {path}: {exc}") from exc
    return build_chain(kernel, tol) if tol else build_chain(kernel)


def load_profile_file(path: str) -> SpectralProfile:
    if not os.path.exists(path):
        raise IoError(f"profile file not found: {path}")
    try:
        with open(path) as fh:
            data = json.load(fh)
        return SpectralProfile(
            lambdas=np.asarray(data["eigenvalues"], dtype=float),
            log_weights=np.asarray(data["log_weights"], dtype=float),
        )
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise IoError(f"malformed profile file {path}: {exc}") from exc


def save_profile(profile: SpectralProfile, path: str):
    dump_json({"eigenvalues": list(profile.lambdas),
               "log_weights": list(profile.log_weights)}, path)
