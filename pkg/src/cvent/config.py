"""Run configuration: one YAML document validated by pydantic models.

The scientific inputs of a run live here and are hashed into every output
header. Operational knobs (log level, worker count) are in
:mod:`cvent.settings` and do not affect results.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_serializer, field_validator, model_validator

from cvent.criteria import calibrate_to_paper
from cvent.gaussian import SqueezerSpec
from cvent.measurement import EstimatorConfig, LossGrid
from cvent.protocols import ContourGrid, PhotonBudget
from cvent.spectra import FrequencyGrid, SourceSpectrumModel

_FROZEN = ConfigDict(frozen=True, extra="forbid")


class ConfigError(ValueError):
    """Configuration document is malformed or fails validation."""

    def __init__(self, message: str, keys: tuple[str, ...] = ()) -> None:
        super().__init__(message)
        self.keys = keys


class ConfigFileError(OSError):
    """Configuration file cannot be read."""


class CalibrationTargets(BaseModel):
    """Measured Duan and EPR products the source is fitted to."""

    model_config = _FROZEN

    duan: float = Field(default=0.44, gt=0, lt=1)
    epr: float = Field(default=0.58, gt=0, lt=1)


class SourceConfig(BaseModel):
    """Either an explicit squeezer or calibration targets, never both."""

    model_config = _FROZEN

    squeezer: SqueezerSpec | None = None
    calibration: CalibrationTargets | None = CalibrationTargets()

    @model_validator(mode="before")
    @classmethod
    def _explicit_squeezer_replaces_calibration(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("squeezer") is not None:
            if data.get("calibration") is not None:
                raise ValueError("set either squeezer or calibration, not both")
            data = {**data, "calibration": None}
        return data

    @model_validator(mode="after")
    def _check_one(self) -> SourceConfig:
        if self.squeezer is None and self.calibration is None:
            raise ValueError("source needs a squeezer or calibration targets")
        return self


class GridsConfig(BaseModel):
    model_config = _FROZEN

    loss: LossGrid = LossGrid()
    frequency: FrequencyGrid = FrequencyGrid()
    contour: ContourGrid = ContourGrid()


class RunConfig(BaseModel):
    model_config = _FROZEN

    source: SourceConfig = SourceConfig()
    efficiency: float = Field(default=0.85, gt=0, le=1)
    spectrum: SourceSpectrumModel = SourceSpectrumModel()
    estimator: EstimatorConfig = EstimatorConfig()
    grids: GridsConfig = GridsConfig()
    budgets: tuple[PhotonBudget, ...] = Field(
        default=(PhotonBudget(n_max=6.75), PhotonBudget(n_max=250)),
        min_length=1,
    )

    @field_validator("budgets", mode="before")
    @classmethod
    def _budgets_from_numbers(cls, value: Any) -> Any:
        if isinstance(value, list | tuple):
            return [{"n_max": v} if isinstance(v, int | float) and not isinstance(v, bool) else v for v in value]
        return value

    @field_serializer("budgets")
    def _budgets_as_numbers(self, budgets: tuple[PhotonBudget, ...]) -> list[float]:
        return [b.n_max for b in budgets]

    def source_spec(self) -> SqueezerSpec:
        """The configured squeezer, or the one fitted to the calibration targets at ``efficiency``."""
        if self.source.squeezer is not None:
            return self.source.squeezer
        targets = self.source.calibration or CalibrationTargets()
        return calibrate_to_paper(targets.duan, targets.epr, self.efficiency)


def _dotted(loc: tuple[int | str, ...]) -> str:
    return ".".join(str(p) for p in loc) or "<root>"


def validate_config(data: Any) -> RunConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a mapping, got {type(data).__name__}")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        errors = exc.errors()
        keys = tuple(_dotted(e["loc"]) for e in errors)
        detail = "; ".join(f"{_dotted(e['loc'])}: {e['msg']}" for e in errors)
        raise ConfigError(f"invalid config: {detail}", keys=keys) from exc


def load_config(config_path: str | Path | None = None) -> RunConfig:
    """Load and validate a YAML run config; no path means all defaults."""
    if config_path is None:
        return RunConfig()
    path = Path(config_path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigFileError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    return validate_config(data)


def _plain(cfg: RunConfig) -> dict[str, Any]:
    return cfg.model_dump(mode="json", exclude_none=True)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(_plain(cfg), sort_keys=False)


def config_hash(cfg: RunConfig) -> str:
    """First 12 hex digits of SHA-256 over the canonical JSON form."""
    canonical = json.dumps(_plain(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def apply_overrides(
    cfg: RunConfig,
    *,
    seed: int | None = None,
    points_per_trace: int | None = None,
    loss_points: int | None = None,
    frequency_points: int | None = None,
    contour_resolution: int | None = None,
) -> RunConfig:
    """Return a re-validated copy with command-line overrides applied."""
    data = _plain(cfg)
    if seed is not None:
        data["estimator"]["seed"] = seed
    if points_per_trace is not None:
        data["estimator"]["points_per_trace"] = points_per_trace
    if loss_points is not None:
        data["grids"]["loss"]["points"] = loss_points
    if frequency_points is not None:
        data["grids"]["frequency"]["points"] = frequency_points
    if contour_resolution is not None:
        data["grids"]["contour"]["resolution"] = contour_resolution
    return validate_config(data)
