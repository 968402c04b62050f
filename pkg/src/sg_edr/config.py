"""Run configuration: JSON schemas, the packaged default profile, and loading.

A user config is merged section by section over the default profile: a
section present in the user file (``params``, ``state``, ...) replaces the
profile's section as a whole, and keys missing inside it take the dataclass
defaults. This keeps ``dt``/``tau`` and ``l2``/``l3``/``vy`` from mixing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema
import numpy as np
from referencing import Registry, Resource

from .gaussian_states import GaussianState
from .oracle import OracleConfig
from .sg_measurement import ApparatusParams
from .spin_qubit import BlochState

__all__ = [
    "ConfigError",
    "SCHEMA_NAMES",
    "RunConfig",
    "SWEEP_AXES",
    "schema",
    "default_profile",
    "parse_config",
    "load_config",
]

SCHEMA_NAMES = ("gaussian_state", "bloch_state", "apparatus_params", "oracle_config", "run_config")
SWEEP_AXES = ("k_re", "k_im", "dt", "tau", "b0", "b1")


class ConfigError(ValueError):
    """Malformed or schema-violating configuration."""


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    if name not in SCHEMA_NAMES:
        raise KeyError(name)
    text = resources.files("sg_edr").joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=1)
def _validator() -> jsonschema.Draft202012Validator:
    registry = Registry().with_resources(
        (f"{n}.json", Resource.from_contents(schema(n))) for n in SCHEMA_NAMES
    )
    return jsonschema.Draft202012Validator(schema("run_config"), registry=registry)


def default_profile() -> dict:
    return json.loads(resources.files("sg_edr").joinpath("profiles", "default.json").read_text())


def _axis(spec) -> tuple[float, ...]:
    if isinstance(spec, Mapping):
        return tuple(float(v) for v in np.linspace(spec["start"], spec["stop"], spec["num"]))
    return tuple(float(v) for v in spec)


@dataclass(frozen=True)
class RunConfig:
    params: ApparatusParams
    state: GaussianState
    bloch: BlochState
    oracle_cfg: OracleConfig
    theta: float = 0.0
    reference_k: float | None = None
    sweep: dict[str, tuple[float, ...]] = field(default_factory=dict)


def parse_config(data: Any) -> RunConfig:
    """Validate a decoded JSON document and build the domain objects.

    Schema violations raise ``ConfigError``; physically invalid values that
    pass the schema (e.g. a Bloch vector longer than one) raise ``DomainError``.
    """
    if not isinstance(data, Mapping):
        raise ConfigError("config must be a JSON object")
    errors = sorted(_validator().iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in errors]
        raise ConfigError("invalid config:\n  " + "\n  ".join(lines))
    merged = {**default_profile(), **data}
    oracle = dict(merged["oracle"])
    return RunConfig(
        params=ApparatusParams.from_json(merged["params"]),
        state=GaussianState.from_json(merged["state"]),
        bloch=BlochState.from_json(merged["bloch"]),
        oracle_cfg=OracleConfig(**oracle),
        theta=float(merged.get("theta", 0.0)),
        reference_k=merged.get("reference_k"),
        sweep={k: _axis(v) for k, v in merged.get("sweep", {}).items()},
    )


def _reject_constant(name: str):
    raise ConfigError(f"non-finite number {name} is not allowed")


def load_config(path: str | Path | None) -> RunConfig:
    """Read a config file; ``None`` yields the default profile."""
    if path is None:
        return parse_config({})
    try:
        data = json.loads(Path(path).read_text(), parse_constant=_reject_constant)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(data)
