# src/sphere_structures/run_config.py

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from sphere_structures.ambient import GeometryError, SignPattern
from sphere_structures.manifolds import SubmanifoldSpec
from sphere_structures.normality import FDConfig

_TOP_LEVEL_KEYS = {
    "family",
    "p",
    "q",
    "radii",
    "signs",
    "seed",
    "n_points",
    "n_vectors",
    "tolerances",
    "fd",
    "normality",
    "n_jobs",
    "output",
}

# Parameters cmd_sweep may vary.
SWEEP_PARAMS = ("r1", "r2", "r3", "R", "r", "r1_over_r2", "signs", "p", "q")


class ConfigError(GeometryError):
    """A run configuration is malformed or inconsistent."""


def _positive_int(data: Mapping[str, Any], key: str, default: int) -> int:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"'{key}' must be a positive integer, got {value!r}.")
    return value


def _mapping(data: Mapping[str, Any], key: str) -> dict[str, Any]:
    value = data.get(key, {})
    if not isinstance(value, Mapping):
        raise ConfigError(f"'{key}' must be an object, got {value!r}.")
    return dict(value)


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def parse_signs(value: Any, q: int) -> SignPattern:
    """An int gives the uniform pattern; a list or "1,-1" string gives an explicit one."""
    if isinstance(value, str):
        try:
            value = [int(v) for v in value.split(",")] if "," in value else int(value)
        except ValueError:
            raise ConfigError(f"Cannot parse sign pattern {value!r}.") from None
    if isinstance(value, bool):
        raise ConfigError(f"Invalid sign pattern {value!r}.")
    if isinstance(value, int):
        if value not in (1, -1):
            raise ConfigError(f"Uniform sign must be +1 or -1, got {value}.")
        return SignPattern.uniform(value, q)
    if isinstance(value, (list, tuple)):
        if len(value) != q:
            raise ConfigError(f"Sign pattern has {len(value)} entries, expected q={q}.")
        try:
            return SignPattern(tuple(value))
        except GeometryError as e:
            raise ConfigError(e.message) from e
    raise ConfigError(f"Invalid sign pattern {value!r}.")


@dataclass(frozen=True, slots=True)
class RunConfig:
    spec: SubmanifoldSpec
    signs: SignPattern
    seed: int = 0
    n_points: int = 100
    n_vectors: int = 20
    tolerances: dict[str, float] = field(default_factory=dict)
    fd: FDConfig = field(default_factory=FDConfig)
    normality_points: int = 100
    normality_fields: int = 10
    normality_enabled: bool = True
    n_jobs: int = 1
    output_json: str | None = None
    output_csv: str | None = None

    def __post_init__(self):
        if self.signs.q != self.spec.q:
            raise ConfigError(f"Sign pattern has length {self.signs.q}, spec has q={self.spec.q}.")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"'seed' must be an integer in [0, 2^64), got {self.seed!r}.")
        if self.n_jobs == 0 or self.n_jobs < -1:
            raise ConfigError(f"'n_jobs' must be positive or -1, got {self.n_jobs}.")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RunConfig:
        unknown = set(data) - _TOP_LEVEL_KEYS
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {sorted(unknown)}.")
        for key in ("family", "p", "q", "radii"):
            if key not in data:
                raise ConfigError(f"Missing required key '{key}'.")
        if not isinstance(data["family"], str):
            raise ConfigError(f"'family' must be a family name, got {data['family']!r}.")
        if not isinstance(data["radii"], Mapping):
            raise ConfigError("'radii' must map radius names to values.")
        for name, value in data["radii"].items():
            if not _is_real(value):
                raise ConfigError(f"Radius '{name}' must be a number, got {value!r}.")

        try:
            spec = SubmanifoldSpec.from_definition(
                data["family"],
                _positive_int(data, "p", 1),
                _positive_int(data, "q", 1),
                data["radii"],
            )
        except GeometryError as e:
            raise ConfigError(e.message) from e

        tolerances = _mapping(data, "tolerances")
        for name, value in tolerances.items():
            if not _is_real(value) or not value > 0:
                raise ConfigError(f"Tolerance '{name}' must be positive, got {value!r}.")

        fd_def = _mapping(data, "fd")
        unknown_fd = set(fd_def) - {"h", "du_half", "richardson"}
        if unknown_fd:
            raise ConfigError(f"Unknown fd keys: {sorted(unknown_fd)}.")
        if "h" in fd_def and not _is_real(fd_def["h"]):
            raise ConfigError(f"'fd.h' must be a number, got {fd_def['h']!r}.")
        for key in ("du_half", "richardson"):
            if key in fd_def and not isinstance(fd_def[key], bool):
                raise ConfigError(f"'fd.{key}' must be true or false, got {fd_def[key]!r}.")
        try:
            fd = FDConfig(**fd_def)
        except GeometryError as e:
            raise ConfigError(e.message) from e

        normality = _mapping(data, "normality")
        if not isinstance(normality.get("enabled", True), bool):
            raise ConfigError(f"'normality.enabled' must be true or false, got {normality['enabled']!r}.")
        output = _mapping(data, "output")
        for key in ("json", "csv"):
            if output.get(key) is not None and not isinstance(output[key], str):
                raise ConfigError(f"'output.{key}' must be a path, got {output[key]!r}.")
        n_jobs = data.get("n_jobs", 1)
        if isinstance(n_jobs, bool) or not isinstance(n_jobs, int):
            raise ConfigError(f"'n_jobs' must be an integer, got {n_jobs!r}.")
        return cls(
            spec=spec,
            signs=parse_signs(data.get("signs", 1), spec.q),
            seed=data.get("seed", 0),
            n_points=_positive_int(data, "n_points", 100),
            n_vectors=_positive_int(data, "n_vectors", 20),
            tolerances={k: float(v) for k, v in tolerances.items()},
            fd=fd,
            normality_points=_positive_int(normality, "n_points", 100),
            normality_fields=_positive_int(normality, "n_fields", 10),
            normality_enabled=normality.get("enabled", True),
            n_jobs=n_jobs,
            output_json=output.get("json"),
            output_csv=output.get("csv"),
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> RunConfig:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"Cannot read config {path}: {e}") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config {path} must hold a JSON object.")
        return cls.from_dict(data)

    def to_dict(self, execution: bool = True) -> dict[str, Any]:
        """execution=False leaves out n_jobs, which never changes results."""
        signs: int | list[int] = self.signs.epsilon if self.signs.is_uniform else list(self.signs.signs)
        output = {}
        if self.output_json:
            output["json"] = self.output_json
        if self.output_csv:
            output["csv"] = self.output_csv
        definition = {
            "family": self.spec.family.label,
            "p": self.spec.p,
            "q": self.spec.q,
            "radii": self.spec.named_radii(),
            "signs": signs,
            "seed": self.seed,
            "n_points": self.n_points,
            "n_vectors": self.n_vectors,
            "tolerances": dict(self.tolerances),
            "fd": {"h": self.fd.h, "du_half": self.fd.du_half, "richardson": self.fd.richardson},
            "normality": {
                "enabled": self.normality_enabled,
                "n_fields": self.normality_fields,
                "n_points": self.normality_points,
            },
            "output": output,
        }
        if execution:
            definition["n_jobs"] = self.n_jobs
        return definition

    def with_param(self, name: str, value: Any) -> RunConfig:
        """A copy of this config with one sweepable parameter changed."""
        if name not in SWEEP_PARAMS:
            raise ConfigError(f"Cannot sweep '{name}', expected one of {SWEEP_PARAMS}.")
        spec = self.spec
        if name == "signs":
            return replace(self, signs=parse_signs(value, spec.q))

        if name in ("p", "q"):
            p = int(value) if name == "p" else spec.p
            q = int(value) if name == "q" else spec.q
            if q != spec.q and not self.signs.is_uniform:
                raise ConfigError("Sweeping q needs a uniform sign pattern.")
            try:
                new_spec = SubmanifoldSpec(spec.family, p, q, spec.radii)
            except GeometryError as e:
                raise ConfigError(e.message) from e
            return replace(self, spec=new_spec, signs=SignPattern.uniform(self.signs.signs[0], q))

        radii = spec.named_radii()
        if name == "r1_over_r2":
            if "r2" not in radii:
                raise ConfigError(f"{spec.family.label} has no r1/r2 ratio.")
            radii["r1"] = float(value) * radii["r2"]
        elif name in radii:
            radii[name] = float(value)
        else:
            raise ConfigError(f"{spec.family.label} has no free radius '{name}'.")
        try:
            new_spec = SubmanifoldSpec.from_definition(spec.family, spec.p, spec.q, radii)
        except GeometryError as e:
            raise ConfigError(e.message) from e
        return replace(self, spec=new_spec)
