"""Deterministic JSON and the CSV formats for profiles, snapshots and front traces."""

from __future__ import annotations

import json
import math
from enum import Enum
from pathlib import Path

import numpy as np

from .dispersion import ModelParams
from .wave import WaveProfile

FLOAT_FMT = ".17g"


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, FLOAT_FMT)
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float at 17 significant digits; non-finite floats become strings."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, Enum):
        obj = obj.value
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if obj in ("inf", "-inf", "nan"):
        return float(obj)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj) + "\n")
    return path


def read_json(path):
    return _restore(json.loads(Path(path).read_text()))


def write_columns(path, header: str, *cols) -> Path:
    path = Path(path)
    data = np.column_stack([np.asarray(c, dtype=float) for c in cols])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")
    return path


def read_columns(path, header: str) -> list[np.ndarray]:
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().strip()
    if first != header:
        raise ValueError(f"{path}: expected header {header!r}, found {first!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return [data[:, i].copy() for i in range(data.shape[1])]


PROFILE_HEADER = "z,phi,psi"


def profile_sidecar(profile: WaveProfile, bundle_ref: str | None = None) -> dict:
    return {
        "s": profile.s,
        "a": profile.params.a,
        "b": profile.params.b,
        "d": profile.params.d,
        "beta": profile.beta,
        "residual": list(profile.residual),
        "iterations": profile.iterations,
        "converged": profile.converged,
        "L": profile.L,
        "n": int(profile.z.size - 1),
        "h": profile.h,
        "bundle": bundle_ref,
    }


def write_profile(profile: WaveProfile, csv_path, bundle_ref: str | None = None) -> tuple[Path, Path]:
    """``z,phi,psi`` CSV plus a JSON sidecar with the same stem."""
    csv_path = Path(csv_path)
    write_columns(csv_path, PROFILE_HEADER, profile.z, profile.phi, profile.psi)
    side = write_json(csv_path.with_suffix(".json"), profile_sidecar(profile, bundle_ref))
    return csv_path, side


def read_profile(csv_path) -> WaveProfile:
    csv_path = Path(csv_path)
    z, phi, psi = read_columns(csv_path, PROFILE_HEADER)
    meta = read_json(csv_path.with_suffix(".json"))
    return WaveProfile(
        s=meta["s"],
        params=ModelParams(meta["a"], meta["b"], meta["d"]),
        z=z,
        phi=phi,
        psi=psi,
        beta=meta["beta"],
        residual=tuple(meta["residual"]),
        iterations=meta["iterations"],
        converged=meta["converged"],
    )
