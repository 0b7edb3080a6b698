"""Request/response models of the HTTP service.

File contents travel as text payloads: the CLI reads and writes files,
the service does the computation.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel

from ..config import (
    FusionSection,
    IterationSection,
    KernelsSection,
    PipelineConfig,
    TransferSection,
    WindowingSection,
)

__all__ = [
    "HealthResponse",
    "SimulateRequest",
    "SimulateResponse",
    "ExtractRequest",
    "ExtractResponse",
    "FuseTrainRequest",
    "FuseTrainResponse",
    "DetectRequest",
    "DetectResponse",
    "PipelineRequest",
    "PipelineResponse",
    "EvaluateRequest",
    "EvaluateResponse",
]


class HealthResponse(BaseModel):
    status: str
    version: str


class SimulateRequest(BaseModel):
    config: PipelineConfig
    stage: Literal["offline", "online"] = "offline"


class SimulateResponse(BaseModel):
    trace_csv: str
    states_csv: str


class ExtractRequest(BaseModel):
    trace_csv: str
    states_csv: Optional[str] = None
    windowing: WindowingSection = WindowingSection()
    normalize: bool = True


class ExtractResponse(BaseModel):
    features_csv: str


class FuseTrainRequest(BaseModel):
    features_csv: str
    fusion: FusionSection = FusionSection()
    n_states: Optional[int] = None
    seed: int = 0


class FuseTrainResponse(BaseModel):
    model_json: dict
    loss_history: list[float]


class DetectRequest(BaseModel):
    source_csv: str
    target_csv: str
    model_json: Optional[dict] = None
    kernels: KernelsSection = KernelsSection()
    transfer: TransferSection = TransferSection()
    iteration: IterationSection = IterationSection()
    classifier_seed: int = 0
    n_states: Optional[int] = None


class DetectResponse(BaseModel):
    report: dict
    confusion_csv: Optional[str]
    summary: str


class PipelineRequest(BaseModel):
    config: PipelineConfig


class PipelineResponse(BaseModel):
    report: dict
    confusion_csv: Optional[str]
    summary: str
    effective_config: dict
    fusion_loss_history: list[float]


class EvaluateRequest(BaseModel):
    truth_csv: str
    pred_csv: str
    n_states: int


class EvaluateResponse(BaseModel):
    fp: Optional[float]
    fn: Optional[float]
    da: float
    confusion: list[list[float]]
    confusion_csv: str
