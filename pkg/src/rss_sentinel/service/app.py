"""FastAPI application exposing the detection pipeline.

Endpoints are stateless compute wrappers around the core package; each
mirrors one CLI subcommand.  Domain errors (bad values, malformed CSV)
surface as 422 responses whose detail names the problem.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from .. import features as feat
from .. import fusion
from ..detector import DomainDataset, IterationConfig, metrics, run_detection
from ..classify import SvmConfig
from ..io import (
    ParseError,
    confusion_to_csv,
    features_from_csv,
    features_to_csv,
    labels_from_csv,
    states_to_csv,
    trace_from_csv,
    trace_to_csv,
)
from ..pipeline import build_multi_kernel, run_pipeline, simulate_stage
from ..config import PipelineConfig
from . import schemas

__all__ = ["create_app"]


def _detail(exc: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=str(exc))


def create_app() -> FastAPI:
    app = FastAPI(title="rss-sentinel", version=__version__)

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
        try:
            trace = simulate_stage(req.config, req.stage)
        except ValueError as exc:
            raise _detail(exc) from exc
        return schemas.SimulateResponse(
            trace_csv=trace_to_csv(trace), states_csv=states_to_csv(trace)
        )

    @app.post("/extract", response_model=schemas.ExtractResponse)
    def extract(req: schemas.ExtractRequest) -> schemas.ExtractResponse:
        try:
            trace = trace_from_csv(req.trace_csv, req.states_csv)
            cfg = feat.WindowingConfig(req.windowing.window_len, req.windowing.stride)
            matrix = feat.extract_windows(trace, cfg)
            if req.normalize:
                matrix = feat.normalize(matrix)
        except (ParseError, ValueError) as exc:
            raise _detail(exc) from exc
        return schemas.ExtractResponse(features_csv=features_to_csv(matrix))

    @app.post("/fuse-train", response_model=schemas.FuseTrainResponse)
    def fuse_train(req: schemas.FuseTrainRequest) -> schemas.FuseTrainResponse:
        try:
            matrix = features_from_csv(req.features_csv)
            if not isinstance(matrix, feat.FeatureMatrix):
                raise ValueError("fuse-train expects a window feature matrix")
            if matrix.labels is None:
                raise ValueError("fuse-train needs labelled features")
            if matrix.n_paths is None:
                raise ValueError("feature file is missing its n_paths metadata")
            n_states = req.n_states or int(matrix.labels.max()) + 1
            net = fusion.init_network(
                matrix.n_paths, n_states, req.fusion.fused_dim, seed=req.seed
            )
            train_cfg = fusion.TrainConfig(
                learning_rate=req.fusion.train.learning_rate,
                momentum=req.fusion.train.momentum,
                epochs=req.fusion.train.epochs,
                batch_size=req.fusion.train.batch_size,
            )
            net, history = fusion.train(net, matrix, train_cfg, seed=req.seed)
        except (ParseError, ValueError) as exc:
            raise _detail(exc) from exc
        return schemas.FuseTrainResponse(model_json=net.to_dict(), loss_history=history)

    @app.post("/detect", response_model=schemas.DetectResponse)
    def detect(req: schemas.DetectRequest) -> schemas.DetectResponse:
        try:
            src = features_from_csv(req.source_csv)
            tgt = features_from_csv(req.target_csv)
            if req.model_json is not None:
                net = fusion.FusionNet.from_dict(req.model_json)
                src = fusion.fuse(net, src)
                tgt = fusion.fuse(net, tgt)
            if src.labels is None:
                raise ValueError("source features must be labelled")
            source = DomainDataset(src.values, src.labels, domain="source")
            target = DomainDataset(tgt.values, tgt.labels, domain="target")
            n_states = req.n_states
            if n_states is None:
                n_states = int(src.labels.max()) + 1
                if tgt.labels is not None:
                    n_states = max(n_states, int(tgt.labels.max()) + 1)
            mk = _kernels_from_section(req.kernels, source.features)
            iter_cfg = IterationConfig(
                max_iterations=req.iteration.max_iterations,
                label_change_tol=req.iteration.label_change_tol,
                classifier=req.iteration.classifier,
                knn_k=req.iteration.knn_k,
                svm=SvmConfig(
                    reg_strength=req.iteration.svm.reg_strength,
                    epochs=req.iteration.svm.epochs,
                    learning_rate=req.iteration.svm.learning_rate,
                ),
            )
            n_components = min(
                req.transfer.n_components, source.n_rows + target.n_rows - 1
            )
            report = run_detection(
                source,
                target,
                mk,
                lambda_=req.transfer.lambda_,
                n_components=n_components,
                cfg=iter_cfg,
                classifier_seed=req.classifier_seed,
                n_states=n_states,
            )
        except (ParseError, ValueError) as exc:
            raise _detail(exc) from exc
        confusion = None if report.confusion is None else confusion_to_csv(report.confusion)
        summary = (
            f"DA={_fmt(report.da)} FP={_fmt(report.fp)} FN={_fmt(report.fn)} "
            f"iters={report.iterations_run}"
        )
        return schemas.DetectResponse(
            report=report.to_dict(), confusion_csv=confusion, summary=summary
        )

    @app.post("/pipeline", response_model=schemas.PipelineResponse)
    def pipeline(req: schemas.PipelineRequest) -> schemas.PipelineResponse:
        try:
            result = run_pipeline(req.config)
        except ValueError as exc:
            raise _detail(exc) from exc
        return schemas.PipelineResponse(
            report=result.report.to_dict(),
            confusion_csv=result.confusion_csv(),
            summary=result.summary,
            effective_config=result.effective_config,
            fusion_loss_history=result.fusion_loss_history,
        )

    @app.post("/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(req: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
        try:
            truth = labels_from_csv(req.truth_csv)
            pred = labels_from_csv(req.pred_csv)
            result = metrics(truth, pred, req.n_states)
        except (ParseError, ValueError) as exc:
            raise _detail(exc) from exc
        return schemas.EvaluateResponse(
            fp=result.fp,
            fn=result.fn,
            da=result.da,
            confusion=result.confusion.tolist(),
            confusion_csv=confusion_to_csv(result.confusion),
        )

    return app


def _fmt(v: float | None) -> str:
    return "n/a" if v is None else f"{v:.4f}"


def _kernels_from_section(section, source_values: np.ndarray):
    cfg = PipelineConfig.model_construct(environment="unused", kernels=section)
    return build_multi_kernel(cfg, source_values)
