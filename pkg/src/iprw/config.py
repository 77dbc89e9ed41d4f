"""Scenario configuration: JSON schema validation and defaults."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .steps import JointStepModel

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


def load_schema(name: str = "config.v1.json") -> dict:
    return json.loads(resources.files("iprw").joinpath("schemas", name).read_text())


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package, e.g. ``poisson-unit``."""
    p = resources.files("iprw").joinpath("configs", f"{name}.json")
    if not p.is_file():
        raise ConfigError(f"no bundled config named {name!r}")
    return Path(str(p))


@dataclass(frozen=True)
class ScenarioConfig:
    raw: dict
    sha256: str
    model: JointStepModel

    def get(self, key: str, default: Any = None) -> Any:
        return self.raw.get(key, default)

    @property
    def task(self) -> str:
        return self.raw["task"]

    @property
    def seed(self) -> int:
        return int(self.raw.get("seed", 0))

    @property
    def workers(self) -> int:
        return int(self.raw.get("workers", 1))


def parse_config(data: bytes) -> ScenarioConfig:
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc
    try:
        model = JointStepModel.from_dict(raw["model"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid model: {exc}") from exc
    return ScenarioConfig(raw, hashlib.sha256(data).hexdigest(), model)


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)
