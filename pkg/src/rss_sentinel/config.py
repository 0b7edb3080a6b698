"""Pipeline configuration: a single JSON document validated with pydantic.

The same models double as the request schemas of the HTTP service.  Every
random choice in a run is controlled by the seeds block, so a resolved
config reproduces its outputs exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .kernels import KERNEL_KINDS
from .simulate import Area, DomainShift, EnvironmentSpec

__all__ = [
    "EnvironmentConfig",
    "WindowingSection",
    "FusionSection",
    "KernelsSection",
    "TransferSection",
    "IterationSection",
    "SeedsSection",
    "ShiftSection",
    "PipelineConfig",
    "ConfigError",
    "load_config",
    "apply_overrides",
]


class ConfigError(ValueError):
    """Invalid configuration document."""


class AreaConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")
    center: tuple[float, float]
    radius: float = Field(gt=0)


class EnvironmentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")
    ap_positions: list[tuple[float, float]] = Field(min_length=1)
    mp_positions: list[tuple[float, float]] = Field(min_length=1)
    areas: list[AreaConfig] = Field(min_length=1)
    tx_power_dbm: float = -30.0
    path_loss_exponent: float = Field(default=2.0, ge=1)
    ref_distance_m: float = Field(default=1.0, gt=0)
    shadowing_sigma_db: float = Field(default=1.0, ge=0)
    intrusion_atten_db: float = 6.0
    intrusion_sigma_db: float = Field(default=1.0, ge=0)

    def build(self) -> EnvironmentSpec:
        return EnvironmentSpec(
            ap_positions=tuple(self.ap_positions),
            mp_positions=tuple(self.mp_positions),
            areas=tuple(Area(a.center, a.radius) for a in self.areas),
            tx_power_dbm=self.tx_power_dbm,
            path_loss_exponent=self.path_loss_exponent,
            ref_distance_m=self.ref_distance_m,
            shadowing_sigma_db=self.shadowing_sigma_db,
            intrusion_atten_db=self.intrusion_atten_db,
            intrusion_sigma_db=self.intrusion_sigma_db,
        )


class WindowingSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    window_len: int = Field(default=20, ge=2)
    stride: int | None = Field(default=None, ge=1)
    normalization: Literal["per_row", "per_column"] = "per_row"


class TrainSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    learning_rate: float = Field(default=0.05, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    epochs: int = Field(default=40, ge=1)
    batch_size: int = Field(default=32, ge=1)


class FusionSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    fused_dim: int = Field(default=32, ge=1)
    train: TrainSection = TrainSection()
    bypass: bool = False


class KernelEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: str
    gamma: Union[float, Literal["median"]] = "median"

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, v: str) -> str:
        canon = v.strip().lower().replace("_", "-")
        if canon == "inverse-square":
            canon = "inverse-square-distance"
        if canon not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {v!r}")
        return canon

    @field_validator("gamma")
    @classmethod
    def _positive_gamma(cls, v):
        if isinstance(v, (int, float)) and not v > 0:
            raise ValueError("gamma must be > 0")
        return v


def _default_kernels() -> list[KernelEntry]:
    return [KernelEntry(kind=k) for k in KERNEL_KINDS]


class KernelsSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kernels: list[KernelEntry] = Field(default_factory=_default_kernels, min_length=1)
    weights: Union[Literal["uniform"], list[float]] = "uniform"
    gamma_mode: Literal["reciprocal", "raw_median"] = "reciprocal"

    @model_validator(mode="after")
    def _weights_match(self) -> "KernelsSection":
        if isinstance(self.weights, list):
            if len(self.weights) != len(self.kernels):
                raise ValueError("need one weight per kernel")
            if any(w < 0 for w in self.weights):
                raise ValueError("kernel weights must be nonnegative")
            if abs(sum(self.weights) - 1.0) > 1e-12:
                raise ValueError("kernel weights must sum to 1")
        return self

    def resolved_weights(self) -> tuple[float, ...]:
        if self.weights == "uniform":
            return tuple(1.0 / len(self.kernels) for _ in self.kernels)
        return tuple(self.weights)


class TransferSection(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    # recommended lambda window is 0.001..0.1; larger values over-smooth
    lambda_: float = Field(default=0.1, gt=0, alias="lambda")
    n_components: int = Field(default=40, ge=1)


class SvmSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    reg_strength: float = Field(default=1e-3, gt=0)
    epochs: int = Field(default=30, ge=1)
    learning_rate: float = Field(default=0.1, ge=0)


class IterationSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    max_iterations: int = Field(default=10, ge=1)
    label_change_tol: float = Field(default=0.01, ge=0, lt=1)
    classifier: Literal["knn", "svm"] = "knn"
    knn_k: int = Field(default=5, ge=1)
    svm: SvmSection = SvmSection()


class SeedsSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    sim_offline: int = 0
    sim_online: int = 1
    fusion: int = 2
    classifier: int = 3


class ShiftSection(BaseModel):
    model_config = ConfigDict(extra="forbid")
    offset_db: float = 0.0
    extra_sigma_db: float = Field(default=0.0, ge=0)

    def build(self) -> DomainShift:
        return DomainShift(offset_db=self.offset_db, extra_sigma_db=self.extra_sigma_db)


class PipelineConfig(BaseModel):
    """Root configuration for the simulate/extract/fuse/detect pipeline."""

    model_config = ConfigDict(extra="forbid")
    environment: Union[EnvironmentConfig, str]
    windowing: WindowingSection = WindowingSection()
    fusion: FusionSection = FusionSection()
    kernels: KernelsSection = KernelsSection()
    transfer: TransferSection = TransferSection()
    iteration: IterationSection = IterationSection()
    seeds: SeedsSection = SeedsSection()
    shift: ShiftSection = ShiftSection()
    windows_per_state: int = Field(default=60, ge=1)
    output_dir: str = "out"

    def resolve_environment(self, base_dir: str | Path | None = None) -> EnvironmentConfig:
        """Inline the environment block, loading it from a file if referenced."""
        if isinstance(self.environment, EnvironmentConfig):
            return self.environment
        path = Path(self.environment)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"environment: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"environment: invalid JSON in {path}: {exc}") from exc
        return EnvironmentConfig.model_validate(doc)

    def effective(self, base_dir: str | Path | None = None) -> dict:
        """Fully resolved config document (environment inlined)."""
        doc = self.model_dump(by_alias=True)
        doc["environment"] = self.resolve_environment(base_dir).model_dump()
        return doc


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Apply repeated --override key=value flags onto the raw document.

    Keys are dotted paths (e.g. transfer.lambda); values parse as JSON and
    fall back to plain strings.
    """
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]
        node[parts[-1]] = value
    return doc


def load_config(
    path: str | Path,
    overrides: list[str] | None = None,
    master_seed: int | None = None,
    fusion_bypass: bool = False,
) -> PipelineConfig:
    """Read, override and validate a pipeline config file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if overrides:
        doc = apply_overrides(doc, overrides)
    try:
        cfg = PipelineConfig.model_validate(doc)
    except Exception as exc:
        raise ConfigError(str(exc)) from exc
    if master_seed is not None:
        cfg = cfg.model_copy(
            update={
                "seeds": SeedsSection(
                    sim_offline=master_seed,
                    sim_online=master_seed + 1,
                    fusion=master_seed + 2,
                    classifier=master_seed + 3,
                )
            }
        )
    if fusion_bypass:
        cfg = cfg.model_copy(update={"fusion": cfg.fusion.model_copy(update={"bypass": True})})
    return cfg
