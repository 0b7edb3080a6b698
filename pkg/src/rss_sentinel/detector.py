"""Iterative pseudo-label transfer detection and the FP/FN/DA metrics.

The loop: bootstrap target pseudo-labels with a classifier trained on the
raw source fusion features, then repeatedly (1) build the MMD coefficient
matrix from the current labels, (2) solve for the migration matrix,
(3) embed both domains, (4) retrain the classifier on the embedded source
and relabel the embedded target.  Iteration stops when the fraction of
changed pseudo-labels drops to the tolerance or the round budget is spent.

State 0 is silence.  FP is the fraction of true-silence windows judged as
any intrusion class, FN the fraction of true-intrusion windows judged
silence, DA the exact K-way match rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classify import KnnModel, SvmConfig, knn_predict, svm_predict, svm_train
from .kernels import GramMatrix, MultiKernel, multi_gram
from .mmd import combined_coefficients, mixed_mmd
from .transfer import TransferModel, embed, solve_transfer

__all__ = [
    "DomainDataset",
    "IterationConfig",
    "MetricsResult",
    "DetectionReport",
    "metrics",
    "run_detection",
]


@dataclass
class DomainDataset:
    """Fusion features plus labels for one domain.

    Source labels are required for detection; target labels are optional
    ground truth used only for reporting.
    """

    features: np.ndarray
    labels: np.ndarray | None
    domain: str = "source"

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if len(self.labels) != len(self.features):
                raise ValueError("labels length must match feature rows")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class IterationConfig:
    """Stopping rule and classifier choice for the detection loop."""

    max_iterations: int = 10
    label_change_tol: float = 0.01
    classifier: str = "knn"
    knn_k: int = 5
    svm: SvmConfig = SvmConfig()

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 <= self.label_change_tol < 1:
            raise ValueError("label_change_tol must lie in [0, 1)")
        if self.classifier not in ("knn", "svm"):
            raise ValueError("classifier must be 'knn' or 'svm'")


@dataclass
class MetricsResult:
    """FP/FN/DA plus the row-normalized confusion matrix.

    fp (or fn) is None when no true-silence (or no true-intrusion) window
    exists.  Rows of the confusion matrix with zero support are all-zero;
    row_support tells them apart from genuinely zero rates.
    """

    fp: float | None
    fn: float | None
    da: float
    confusion: np.ndarray
    row_support: np.ndarray

    def to_dict(self) -> dict:
        return {
            "fp": self.fp,
            "fn": self.fn,
            "da": self.da,
            "confusion": self.confusion.tolist(),
            "row_support": self.row_support.tolist(),
        }


def metrics(true_labels, predicted_labels, n_states: int) -> MetricsResult:
    """Exact-count detection metrics; state 0 is silence."""
    t = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(predicted_labels, dtype=np.int64)
    if len(t) == 0:
        raise ValueError("metrics need at least one window")
    if len(t) != len(p):
        raise ValueError(f"length mismatch: {len(t)} true vs {len(p)} predicted")
    if t.min() < 0 or t.max() >= n_states or p.min() < 0 or p.max() >= n_states:
        raise ValueError(f"labels must lie in 0..{n_states - 1}")

    counts = np.zeros((n_states, n_states), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    support = counts.sum(axis=1)
    confusion = np.zeros((n_states, n_states))
    nonzero = support > 0
    confusion[nonzero] = counts[nonzero] / support[nonzero, None]

    silence = t == 0
    fp = float((p[silence] != 0).mean()) if silence.any() else None
    intrusion = ~silence
    fn = float((p[intrusion] == 0).mean()) if intrusion.any() else None
    da = float((t == p).mean())
    return MetricsResult(fp=fp, fn=fn, da=da, confusion=confusion, row_support=support)


@dataclass
class DetectionReport:
    """Final target labels, metrics and per-iteration diagnostics.

    fp/fn/da and the confusion matrix are None when the target dataset
    carries no ground truth.  baseline holds the same metrics for the
    iteration-0 (no-transfer) pseudo-labels.  The trailing fields keep the
    final transfer model and embeddings for analysis; they are not part of
    the serialized report.
    """

    final_labels: np.ndarray
    confusion: np.ndarray | None
    fp: float | None
    fn: float | None
    da: float | None
    per_iteration: list[tuple[float, float]]
    iterations_run: int
    n_components_used: int
    baseline: MetricsResult | None = None
    row_support: np.ndarray | None = None
    transfer_model: TransferModel | None = field(default=None, repr=False)
    embedded_source: np.ndarray | None = field(default=None, repr=False)
    embedded_target: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "final_labels": self.final_labels.tolist(),
            "confusion": None if self.confusion is None else self.confusion.tolist(),
            "fp": self.fp,
            "fn": self.fn,
            "da": self.da,
            "per_iteration": [
                {"mixed_mmd_total": m, "label_change_fraction": c}
                for m, c in self.per_iteration
            ],
            "iterations_run": self.iterations_run,
            "n_components_used": self.n_components_used,
            "baseline": None if self.baseline is None else self.baseline.to_dict(),
            "row_support": None if self.row_support is None else self.row_support.tolist(),
        }


def _make_classifier(cfg: IterationConfig, seed: int):
    """Returns train(X, y, n_classes) -> predict(Q) for the configured kind."""
    if cfg.classifier == "knn":

        def train_knn(X, y, n_classes):
            model = KnnModel(X, y, k=min(cfg.knn_k, len(X)))
            return lambda Q: knn_predict(model, Q)

        return train_knn

    svm_cfg = SvmConfig(
        reg_strength=cfg.svm.reg_strength,
        epochs=cfg.svm.epochs,
        learning_rate=cfg.svm.learning_rate,
        seed=seed,
    )

    def train_svm(X, y, n_classes):
        model = svm_train(X, y, svm_cfg, n_classes=n_classes)
        return lambda Q: svm_predict(model, Q)

    return train_svm


def run_detection(
    source: DomainDataset,
    target: DomainDataset,
    mk: MultiKernel,
    lambda_: float = 0.1,
    n_components: int = 40,
    cfg: IterationConfig = IterationConfig(),
    classifier_seed: int = 0,
    n_states: int | None = None,
) -> DetectionReport:
    """Run the full iterative transfer-detection loop."""
    if source.labels is None:
        raise ValueError("source dataset must be labelled")
    ys = source.labels
    if n_states is None:
        n_states = int(ys.max()) + 1
        if target.labels is not None:
            n_states = max(n_states, int(target.labels.max()) + 1)

    train_classifier = _make_classifier(cfg, classifier_seed)

    # Iteration 0: dummy tags from the raw (pre-transfer) fusion features.
    predict0 = train_classifier(source.features, ys, n_states)
    pseudo = predict0(target.features)
    baseline = None
    if target.labels is not None:
        baseline = metrics(target.labels, pseudo, n_states)

    kernel_matrix: GramMatrix = multi_gram(mk, source.features, target.features)
    per_iteration: list[tuple[float, float]] = []
    model = None
    emb_s = emb_t = None
    used = 0
    iterations = 0
    for _ in range(cfg.max_iterations):
        coeff = combined_coefficients(ys, pseudo, n_states)
        mmd_total, _ = mixed_mmd(kernel_matrix, ys, pseudo, n_states)
        model = solve_transfer(
            kernel_matrix,
            coeff,
            lambda_,
            n_components,
            clamp=True,
            kernel_hash=mk.config_hash(),
        )
        used = model.n_components
        emb_s, emb_t = embed(model, kernel_matrix)
        predict = train_classifier(emb_s, ys, n_states)
        new_pseudo = predict(emb_t)
        change = float((new_pseudo != pseudo).mean())
        pseudo = new_pseudo
        iterations += 1
        per_iteration.append((mmd_total, change))
        if change <= cfg.label_change_tol:
            break

    if target.labels is not None:
        final = metrics(target.labels, pseudo, n_states)
        fp, fn, da = final.fp, final.fn, final.da
        confusion, support = final.confusion, final.row_support
    else:
        fp = fn = da = None
        confusion = support = None

    return DetectionReport(
        final_labels=pseudo,
        confusion=confusion,
        fp=fp,
        fn=fn,
        da=da,
        per_iteration=per_iteration,
        iterations_run=iterations,
        n_components_used=used,
        baseline=baseline,
        row_support=support,
        transfer_model=model,
        embedded_source=emb_s,
        embedded_target=emb_t,
    )
