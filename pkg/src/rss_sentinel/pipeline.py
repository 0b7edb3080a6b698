"""End-to-end orchestration: simulate, extract, fuse, transfer, detect.

The offline stage is simulated shift-free and becomes the labelled source
domain; the online stage applies the configured drift and becomes the
target domain.  Kernel scales come from the source fusion features only
and stay frozen across detection iterations, as does the fusion network.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import features as feat
from . import fusion
from .classify import SvmConfig
from .config import PipelineConfig
from .detector import DetectionReport, DomainDataset, IterationConfig, run_detection
from .io import canonical_json, confusion_to_csv
from .kernels import KernelSpec, MultiKernel, median_gamma
from .simulate import EnvironmentSpec, RssTrace, simulate_schedule

__all__ = ["PipelineResult", "default_schedule", "build_multi_kernel", "run_pipeline"]

log = logging.getLogger("rss_sentinel")


@dataclass
class PipelineResult:
    """Everything a pipeline run produces, serializable parts first."""

    report: DetectionReport
    summary: str
    effective_config: dict
    source: DomainDataset
    target: DomainDataset
    fusion_loss_history: list[float]

    def report_json(self) -> str:
        return canonical_json(self.report.to_dict())

    def confusion_csv(self) -> str | None:
        if self.report.confusion is None:
            return None
        return confusion_to_csv(self.report.confusion)


def default_schedule(env: EnvironmentSpec, windows_per_state: int, window_len: int) -> list[tuple[int, int]]:
    """Visit every state once, long enough for the requested window count."""
    duration = windows_per_state * window_len
    return [(state, duration) for state in range(env.n_states)]


def _summary_line(report: DetectionReport) -> str:
    def fmt(v: float | None) -> str:
        return "n/a" if v is None else f"{v:.4f}"

    return (
        f"DA={fmt(report.da)} FP={fmt(report.fp)} FN={fmt(report.fn)} "
        f"iters={report.iterations_run}"
    )


def simulate_stage(cfg: PipelineConfig, stage: str, base_dir: str | Path | None = None) -> RssTrace:
    """Simulate one collection stage; 'online' applies the configured shift."""
    if stage not in ("offline", "online"):
        raise ValueError("stage must be 'offline' or 'online'")
    env = cfg.resolve_environment(base_dir).build()
    schedule = default_schedule(env, cfg.windows_per_state, cfg.windowing.window_len)
    if stage == "offline":
        return simulate_schedule(env, schedule, seed=cfg.seeds.sim_offline)
    return simulate_schedule(env, schedule, shift=cfg.shift.build(), seed=cfg.seeds.sim_online)


def _normalize_pair(
    cfg: PipelineConfig, offline: feat.FeatureMatrix, online: feat.FeatureMatrix
) -> tuple[feat.FeatureMatrix, feat.FeatureMatrix]:
    if cfg.windowing.normalization == "per_row":
        return feat.normalize(offline), feat.normalize(online)
    lo, hi = feat.column_bounds(offline)
    return feat.normalize_between(offline, lo, hi), feat.normalize_between(online, lo, hi)


def build_multi_kernel(cfg: PipelineConfig, source_values: np.ndarray) -> MultiKernel:
    """Resolve 'median' gammas against the source rows and fix the weights."""
    specs = []
    for entry in cfg.kernels.kernels:
        if entry.kind == "linear":
            gamma = None
        elif entry.gamma == "median":
            gamma = median_gamma(source_values, entry.kind, cfg.kernels.gamma_mode)
        else:
            gamma = float(entry.gamma)
        specs.append(KernelSpec(entry.kind, gamma))
    return MultiKernel(kernels=tuple(specs), weights=cfg.kernels.resolved_weights())


def run_pipeline(cfg: PipelineConfig, base_dir: str | Path | None = None) -> PipelineResult:
    """Run the whole detection pipeline for one config."""
    env = cfg.resolve_environment(base_dir).build()
    windowing = feat.WindowingConfig(cfg.windowing.window_len, cfg.windowing.stride)

    log.info("simulating offline and online stages (p=%d, K=%d)", env.n_paths, env.n_states)
    offline = simulate_stage(cfg, "offline", base_dir)
    online = simulate_stage(cfg, "online", base_dir)

    raw_off = feat.extract_windows(offline, windowing)
    raw_on = feat.extract_windows(online, windowing)
    norm_off, norm_on = _normalize_pair(cfg, raw_off, raw_on)
    log.info("extracted %d offline / %d online windows", raw_off.n_windows, raw_on.n_windows)

    if cfg.fusion.bypass:
        fused_off = fusion.FusionFeatureMatrix(norm_off.values, norm_off.labels)
        fused_on = fusion.FusionFeatureMatrix(norm_on.values, norm_on.labels)
        loss_history: list[float] = []
    else:
        net = fusion.init_network(
            env.n_paths, env.n_states, cfg.fusion.fused_dim, seed=cfg.seeds.fusion
        )
        train_cfg = fusion.TrainConfig(
            learning_rate=cfg.fusion.train.learning_rate,
            momentum=cfg.fusion.train.momentum,
            epochs=cfg.fusion.train.epochs,
            batch_size=cfg.fusion.train.batch_size,
        )
        net, loss_history = fusion.train(net, norm_off, train_cfg, seed=cfg.seeds.fusion)
        log.info("fusion training loss %.4f -> %.4f", loss_history[0], loss_history[-1])
        fused_off = fusion.fuse(net, norm_off)
        fused_on = fusion.fuse(net, norm_on)

    source = DomainDataset(fused_off.values, fused_off.labels, domain="source")
    target = DomainDataset(fused_on.values, fused_on.labels, domain="target")
    mk = build_multi_kernel(cfg, source.features)

    iter_cfg = IterationConfig(
        max_iterations=cfg.iteration.max_iterations,
        label_change_tol=cfg.iteration.label_change_tol,
        classifier=cfg.iteration.classifier,
        knn_k=cfg.iteration.knn_k,
        svm=SvmConfig(
            reg_strength=cfg.iteration.svm.reg_strength,
            epochs=cfg.iteration.svm.epochs,
            learning_rate=cfg.iteration.svm.learning_rate,
        ),
    )
    n_components = min(cfg.transfer.n_components, source.n_rows + target.n_rows - 1)
    report = run_detection(
        source,
        target,
        mk,
        lambda_=cfg.transfer.lambda_,
        n_components=n_components,
        cfg=iter_cfg,
        classifier_seed=cfg.seeds.classifier,
        n_states=env.n_states,
    )
    summary = _summary_line(report)
    log.info("detection finished: %s", summary)
    return PipelineResult(
        report=report,
        summary=summary,
        effective_config=cfg.effective(base_dir),
        source=source,
        target=target,
        fusion_loss_history=loss_history,
    )
