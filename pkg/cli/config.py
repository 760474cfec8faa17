"""
Run Configuration
-----------------
TOML run recipes validated into a RunConfig.

A recipe has the sections [scenario], [model], [sweep], [engine] and
[output]. Unknown keys are rejected and validation errors point at the
1-based line of the offending key. Command-line flags are merged on top of
the file before validation, so the validated config is exactly what ran.
"""

import copy
import math
import re

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.capacity import EngineSpec
from core.channel import LosProbability, PathLossModel, PathLossSegment, get_model, three_gpp_case
from core.deployment import NetworkParams, db_to_linear
from core.errors import ConfigError
from core.quadrature import QuadratureSpec

Command = Literal["limit", "coverage-sweep", "simulate", "ase-sweep", "deploy", "schedule", "reproduce"]
Recipe = Literal["fig1", "fig2", "numbers"]

# Defaults layered under the user's config by `reproduce <recipe>`.
RECIPES: Dict[str, Dict[str, Any]] = {
    "fig1": {
        "scenario": {"gamma_db": 0.0},
        "sweep": {
            "lambda_min": 0.1, "lambda_max": 1e6, "lambda_per_decade": 4,
            "rho_values": [300.0, 600.0], "height_m_values": [3.5, 8.5], "mc_min_lambda": 10.0,
        },
        "engine": {"trials": 1000},
    },
    "fig2": {
        "scenario": {"gamma0_db": 0.0, "height_m": 8.5},
        "sweep": {
            "lambda_min": 1.0, "lambda_max": 1e6, "lambda_per_decade": 4,
            "rho_values": [300.0, 600.0, 1000.0, 2000.0], "mc_min_lambda": 10.0,
        },
        "engine": {"trials": 1000},
    },
    "numbers": {
        "scenario": {"lambda_per_km2": 1e6, "height_m": 8.5, "gamma_db": 0.0, "gamma0_db": 0.0},
        "sweep": {"rho_values": [300.0, 600.0]},
    },
}


class ScenarioConfig(BaseModel):
    """Scenario in config units (per km^2, m, dBm, dB)."""

    model_config = ConfigDict(extra="forbid")

    lambda_per_km2: float = Field(default=1e6, gt=0)
    rho_per_km2: float = Field(default=300.0, gt=0)
    height_m: float = Field(default=8.5, ge=0)
    tx_power_dbm: float = 24.0
    noise_power_dbm: float = -95.0
    q: float = Field(default=3.5, gt=0)
    gamma_db: float = 0.0
    gamma0_db: float = 0.0
    epsilon: float = Field(default=0.05, gt=0, lt=1)

    def to_params(self, **changes: float) -> NetworkParams:
        values = {**self.model_dump(exclude={"gamma_db"}), **changes}
        return NetworkParams.from_external(
            lambda_per_km2=values["lambda_per_km2"],
            rho_per_km2=values["rho_per_km2"],
            height_m=values["height_m"],
            tx_power_dbm=values["tx_power_dbm"],
            noise_power_dbm=values["noise_power_dbm"],
            q=values["q"],
            gamma0_db=values["gamma0_db"],
            epsilon=values["epsilon"],
        )

    @property
    def gamma(self) -> float:
        return db_to_linear(self.gamma_db)


class SegmentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    break_km: Optional[float] = Field(default=None, gt=0)
    a_los: float = Field(gt=0)
    a_nlos: float = Field(gt=0)
    alpha_los: float = Field(gt=0)
    alpha_nlos: float = Field(gt=0)
    los_prob: LosProbability


class ModelConfig(BaseModel):
    """Either a preset name or an inline list of segments."""

    model_config = ConfigDict(extra="forbid")

    name: str = "3gpp-36828"
    r1_km: Optional[float] = Field(default=None, gt=0)
    r2_km: Optional[float] = Field(default=None, gt=0)
    segments: Optional[List[SegmentConfig]] = None

    def build(self) -> PathLossModel:
        if self.segments:
            return PathLossModel(
                name=self.name,
                segments=tuple(
                    PathLossSegment(upper_break_km=s.break_km, a_los=s.a_los, a_nlos=s.a_nlos,
                                    alpha_los=s.alpha_los, alpha_nlos=s.alpha_nlos, los_prob=s.los_prob)
                    for s in self.segments
                ),
            )
        if self.name == "3gpp-36828" and (self.r1_km or self.r2_km):
            return three_gpp_case(self.r1_km or 0.156, self.r2_km or 0.030)
        return get_model(self.name)


class SweepConfig(BaseModel):
    """Log-spaced density axes and explicit value lists."""

    model_config = ConfigDict(extra="forbid")

    lambda_min: float = Field(default=1e2, gt=0)
    lambda_max: float = Field(default=1e6, gt=0)
    lambda_per_decade: int = Field(default=4, ge=1)
    rho_min: Optional[float] = Field(default=None, gt=0)
    rho_max: Optional[float] = Field(default=None, gt=0)
    rho_per_decade: int = Field(default=4, ge=1)
    rho_values: List[float] = Field(default_factory=list)
    height_m_values: List[float] = Field(default_factory=list)
    gamma_db_values: List[float] = Field(default_factory=list)
    mc_min_lambda: float = Field(default=0.0, ge=0)

    @field_validator("rho_values")
    @classmethod
    def _positive(cls, values: List[float]) -> List[float]:
        if any(not v > 0 for v in values):
            raise ValueError("densities must be positive")
        return values

    @field_validator("height_m_values")
    @classmethod
    def _non_negative(cls, values: List[float]) -> List[float]:
        if any(v < 0 for v in values):
            raise ValueError("heights must be non-negative")
        return values

    @model_validator(mode="after")
    def _ranges(self) -> "SweepConfig":
        if self.lambda_max < self.lambda_min:
            raise ValueError(f"lambda range is empty: [{self.lambda_min}, {self.lambda_max}]")
        if (self.rho_min is None) != (self.rho_max is None):
            raise ValueError("rho_min and rho_max must be given together")
        if self.rho_min is not None and self.rho_max < self.rho_min:
            raise ValueError(f"rho range is empty: [{self.rho_min}, {self.rho_max}]")
        return self

    def lambdas(self) -> np.ndarray:
        return log_axis(self.lambda_min, self.lambda_max, self.lambda_per_decade)

    def rhos(self, default: float) -> List[float]:
        if self.rho_min is not None:
            return [float(r) for r in log_axis(self.rho_min, self.rho_max, self.rho_per_decade)]
        return list(self.rho_values) or [default]

    def heights(self, default: float) -> List[float]:
        return list(self.height_m_values) or [default]

    def gammas_db(self, default: float) -> List[float]:
        return list(self.gamma_db_values) or [default]


class EngineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["monte-carlo", "dense-approx"] = "monte-carlo"
    trials: int = Field(default=2000, ge=1)
    seed: int = Field(default=1, ge=0)
    workers: Optional[int] = Field(default=None, ge=1)
    radius_km: Union[float, Literal["auto"]] = "auto"
    tail_fraction: float = Field(default=1e-3, gt=0, lt=1)
    progress: bool = True
    rel_tol: float = Field(default=1e-9, gt=0)
    max_subdivisions: int = Field(default=200, ge=10)

    @field_validator("radius_km")
    @classmethod
    def _radius(cls, value):
        if value != "auto" and not value > 0:
            raise ValueError("radius_km must be positive or 'auto'")
        return value

    def spec(self, kind: Optional[str] = None) -> EngineSpec:
        return EngineSpec(
            kind=kind or self.kind,
            trials=self.trials,
            seed=self.seed,
            workers=self.workers,
            radius_km=None if self.radius_km == "auto" else float(self.radius_km),
            tail_fraction=self.tail_fraction,
            progress=self.progress,
        )

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(rel_tol=self.rel_tol, max_subdivisions=self.max_subdivisions)


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: Optional[Path] = None
    metrics: Optional[Path] = None


class RunConfig(BaseModel):
    """One fully resolved run: a command plus everything it needs."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    recipe: Optional[Recipe] = None
    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    engine: EngineConfig = Field(default_factory=EngineConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _recipe_matches_command(self) -> "RunConfig":
        if (self.command == "reproduce") != (self.recipe is not None):
            raise ValueError("a recipe is required with, and only with, the reproduce command")
        return self

    def provenance(self) -> Dict[str, Any]:
        """Everything that determines the results; the output location does not."""
        return self.model_dump(mode="json", exclude={"output"})


def log_axis(lo: float, hi: float, per_decade: int) -> np.ndarray:
    """Log-spaced axis with per_decade points per decade, ends included."""
    if lo == hi:
        return np.array([lo])
    n = max(int(round(per_decade * math.log10(hi / lo))), 1) + 1
    return np.geomspace(lo, hi, n)


def deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive dict merge; values in update win."""
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


_HEADER = re.compile(r"^\s*\[\[?\s*([A-Za-z0-9_.\-\"]+)\s*\]\]?")
_KEY = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*=")


def _find_key(text: str, table: str, key: str, index: Optional[int]) -> Optional[int]:
    current, seen = "", {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        header = _HEADER.match(line)
        if header:
            current = header.group(1).replace('"', "")
            seen[current] = seen.get(current, -1) + 1
            continue
        match = _KEY.match(line)
        if match and match.group(1) == key and current == table:
            if index is None or seen.get(current, 0) == index:
                return lineno
    return None


def locate_key(text: str, loc: Sequence[Union[str, int]]) -> Optional[int]:
    """
    1-based line of the key at a pydantic error location.

    Falls back to the enclosing key (e.g. an inline table) and finally to
    the table header when the key itself is not on a line of its own.
    """
    names = [str(part) for part in loc if not isinstance(part, int)]
    index = next((part for part in loc if isinstance(part, int)), None)
    while names:
        line = _find_key(text, ".".join(names[:-1]), names[-1], index)
        if line is not None:
            return line
        names = names[:-1]
        for lineno, row in enumerate(text.splitlines(), start=1):
            header = _HEADER.match(row)
            if names and header and header.group(1).replace('"', "") == ".".join(names):
                return lineno
    return None


def _toml_line(error: tomllib.TOMLDecodeError) -> Optional[int]:
    match = re.search(r"line (\d+)", str(error))
    return int(match.group(1)) if match else None


def read_toml(path: Union[str, Path]) -> Tuple[Dict[str, Any], str]:
    """Parse a TOML file; returns (data, text)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror}", path=str(path)) from None
    try:
        return tomllib.loads(text), text
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML: {e}", path=str(path), line=_toml_line(e)) from None


def load_config(path: Optional[Union[str, Path]] = None, command: Optional[str] = None,
                recipe: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Build a RunConfig from a TOML file, recipe defaults and flag overrides.

    Precedence, lowest first: recipe defaults, file, overrides.

    Raises:
        ConfigError: on unreadable or invalid configs, with the line of the
            offending key when it comes from the file
    """
    data: Dict[str, Any] = {}
    text = ""
    if path is not None:
        data, text = read_toml(path)
    if recipe is not None:
        if recipe not in RECIPES:
            raise ConfigError(f"unknown recipe {recipe!r}; available: {sorted(RECIPES)}")
        data = deep_merge(RECIPES[recipe], data)
        data.setdefault("recipe", recipe)
    if command is not None:
        data["command"] = command
    if overrides:
        data = deep_merge(data, overrides)

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = first["loc"]
        where = ".".join(str(p) for p in loc) or "<root>"
        line = locate_key(text, loc) if text else None
        raise ConfigError(f"{where}: {first['msg']}", path=str(path) if path else None, line=line,
                          details={"errors": e.error_count()}) from None
