"""JSON parameter files for spin systems, unitary models and sequences.

Spin-system schema::

    {
      "n_spins": 3,
      "offsets_hz": [..],               # one per spin
      "j_matrix_hz": [[..], ..],        # symmetric, zero diagonal
      "labels": ["system", ..],         # optional, default all "system"
      "gammas": [..]                    # optional, rad/T/s
    }

Extra keys starting with "_" are treated as comments.  Any other unknown
key is an error.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .core import PulseSpec, SpinSystem


class ConfigError(ValueError):
    """Malformed or invalid parameter file."""


def read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    return parse_json(text, str(path))


def parse_json(text: str, source: str = "<string>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be an object")
    return data


def check_keys(data: dict, allowed, required, source: str) -> None:
    for key in data:
        if key not in allowed and not key.startswith("_"):
            raise ConfigError(f"{source}: unknown field {key!r}")
    for key in required:
        if key not in data:
            raise ConfigError(f"{source}: missing required field {key!r}")


def _array(data, key, source, shape=None):
    try:
        arr = np.asarray(data[key], dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{source}: field {key!r} must be numeric") from None
    if shape is not None and arr.shape != shape:
        raise ConfigError(f"{source}: field {key!r} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{source}: field {key!r} contains non-finite values")
    return arr


def system_from_dict(data: dict, source: str = "<system>") -> SpinSystem:
    check_keys(data, {"n_spins", "offsets_hz", "j_matrix_hz", "labels", "gammas"},
               ("n_spins", "offsets_hz", "j_matrix_hz"), source)
    n = data["n_spins"]
    if not isinstance(n, int) or n < 1:
        raise ConfigError(f"{source}: field 'n_spins' must be a positive integer")
    offsets = _array(data, "offsets_hz", source, (n,))
    couplings = _array(data, "j_matrix_hz", source, (n, n))
    labels = data.get("labels", ["system"] * n)
    gammas = _array(data, "gammas", source, (n,)) if "gammas" in data else None
    try:
        return SpinSystem(offsets, couplings, tuple(labels), gammas)
    except ValueError as exc:
        field_name = "labels" if "label" in str(exc) or "role" in str(exc) else "j_matrix_hz"
        raise ConfigError(f"{source}: field {field_name!r}: {exc}") from None


def load_system(path) -> SpinSystem:
    return system_from_dict(read_json(path), str(path))


def system_to_dict(system: SpinSystem) -> dict:
    out = {"n_spins": system.n_spins, "offsets_hz": system.offsets.tolist(),
           "j_matrix_hz": system.couplings.tolist(), "labels": list(system.labels)}
    if system.gammas is not None:
        out["gammas"] = system.gammas.tolist()
    return out


def pulse_from_dict(d: dict, source: str) -> PulseSpec:
    check_keys(d, {"angle", "axis", "targets"}, ("angle",), source)
    try:
        return PulseSpec(float(d["angle"]), d.get("axis", "x"),
                         None if d.get("targets") is None else tuple(d["targets"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from None


def steps_from_list(items, source: str) -> list:
    """Decode a step list: numbers are delays, objects are pulses."""
    steps = []
    for i, item in enumerate(items):
        where = f"{source}[{i}]"
        if isinstance(item, (int, float)) and not isinstance(item, bool):
            steps.append(float(item))
        elif isinstance(item, str):
            steps.append(item)
        elif isinstance(item, dict):
            if "param" in item:
                from .aaqst import ParamPulse
                check_keys(item, {"param", "axis", "targets"}, ("param",), where)
                steps.append(ParamPulse(item["param"], item.get("axis", "x"),
                                        None if item.get("targets") is None else tuple(item["targets"])))
            else:
                steps.append(pulse_from_dict(item, where))
        else:
            raise ConfigError(f"{where}: cannot interpret step {item!r}")
    return steps


def model_from_dict(data: dict, source: str = "<model>"):
    """Unitary model: {"params": [...], "bounds": [[lo, hi], ...], "experiments": [[step, ...]]}."""
    from .aaqst import UnitaryModel
    check_keys(data, {"params", "bounds", "experiments"}, ("params", "bounds", "experiments"), source)
    exps = [steps_from_list(e, f"{source}: experiments[{k}]") for k, e in enumerate(data["experiments"])]
    try:
        return UnitaryModel(tuple(exps), tuple(data["params"]), data["bounds"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_model(path):
    return model_from_dict(read_json(path), str(path))


def data_path(name: str) -> Path:
    return Path(str(resources.files("aaqip") / "data" / name))


def load_gyromagnetic() -> dict:
    data = read_json(data_path("gyromagnetic.json"))
    return {k: float(v) for k, v in data.items() if not k.startswith("_")}
