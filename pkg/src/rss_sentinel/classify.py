"""Classifiers applied to embedded features: KNN and a linear one-vs-rest SVM.

Every tie is broken deterministically: equal distances prefer the lower
training index, equal votes and equal scores prefer the smallest state id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "KnnModel",
    "knn_predict",
    "SvmConfig",
    "LinearSvmModel",
    "svm_train",
    "svm_predict",
    "svm_loss",
]


@dataclass
class KnnModel:
    """Stored training set for k-nearest-neighbour voting."""

    train_points: np.ndarray
    train_labels: np.ndarray
    k: int = 5

    def __post_init__(self) -> None:
        self.train_points = np.asarray(self.train_points, dtype=np.float64)
        self.train_labels = np.asarray(self.train_labels, dtype=np.int64)
        if len(self.train_points) != len(self.train_labels):
            raise ValueError("points and labels must have equal length")
        if not 1 <= self.k <= len(self.train_points):
            raise ValueError(f"k must lie in 1..{len(self.train_points)}")

    def to_dict(self) -> dict:
        return {
            "train_points": self.train_points.tolist(),
            "train_labels": self.train_labels.tolist(),
            "k": self.k,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "KnnModel":
        return cls(
            train_points=np.asarray(doc["train_points"], dtype=np.float64),
            train_labels=np.asarray(doc["train_labels"], dtype=np.int64),
            k=int(doc["k"]),
        )


def knn_predict(model: KnnModel, queries: np.ndarray) -> np.ndarray:
    """Majority vote among the k nearest training points per query."""
    Q = np.asarray(queries, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q[None, :]
    if Q.shape[1] != model.train_points.shape[1]:
        raise ValueError("query width does not match the training set")
    dists = cdist(Q, model.train_points)
    # stable sort keeps the lower training index on distance ties
    nearest = np.argsort(dists, axis=1, kind="stable")[:, : model.k]
    votes = model.train_labels[nearest]
    preds = np.empty(len(Q), dtype=np.int64)
    for i, row in enumerate(votes):
        preds[i] = int(np.argmax(np.bincount(row)))  # vote ties -> smallest id
    return preds


@dataclass(frozen=True)
class SvmConfig:
    reg_strength: float = 1e-3
    epochs: int = 30
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.reg_strength > 0:
            raise ValueError("reg_strength must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")


@dataclass
class LinearSvmModel:
    """One weight vector and bias per class; prediction is argmax score."""

    weights: np.ndarray  # (n_classes, d)
    biases: np.ndarray  # (n_classes,)
    config: SvmConfig

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "biases": self.biases.tolist(),
            "reg_strength": self.config.reg_strength,
            "epochs": self.config.epochs,
            "learning_rate": self.config.learning_rate,
            "seed": self.config.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LinearSvmModel":
        cfg = SvmConfig(
            reg_strength=doc["reg_strength"],
            epochs=doc["epochs"],
            learning_rate=doc["learning_rate"],
            seed=doc["seed"],
        )
        return cls(
            weights=np.asarray(doc["weights"], dtype=np.float64),
            biases=np.asarray(doc["biases"], dtype=np.float64),
            config=cfg,
        )


def svm_loss(model: LinearSvmModel, X: np.ndarray, y: np.ndarray) -> float:
    """Full-batch one-vs-rest hinge loss plus the L2 penalty."""
    scores = X @ model.weights.T + model.biases
    signs = np.where(y[:, None] == np.arange(model.weights.shape[0]), 1.0, -1.0)
    hinge = np.maximum(0.0, 1.0 - signs * scores).mean(axis=0).sum()
    penalty = 0.5 * model.config.reg_strength * float((model.weights**2).sum())
    return float(hinge + penalty)


def svm_train(
    X: np.ndarray,
    y: np.ndarray,
    cfg: SvmConfig = SvmConfig(),
    n_classes: int | None = None,
) -> LinearSvmModel:
    """Stochastic subgradient descent on the one-vs-rest hinge objective.

    The step size decays as learning_rate / (1 + epoch); updates are
    per-sample in a seeded shuffled order.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    present = np.unique(y)
    if len(present) < 2:
        raise ValueError("SVM training needs at least two classes present")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    n, d = X.shape
    weights = np.zeros((n_classes, d))
    biases = np.zeros(n_classes)
    rng = np.random.default_rng(cfg.seed)
    class_ids = np.arange(n_classes)
    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate / (1.0 + epoch)
        for i in rng.permutation(n):
            xi = X[i]
            signs = np.where(class_ids == y[i], 1.0, -1.0)
            margins = signs * (weights @ xi + biases)
            active = margins < 1.0
            weights *= 1.0 - lr * cfg.reg_strength
            weights[active] += lr * np.outer(signs[active], xi)
            biases[active] += lr * signs[active]
    return LinearSvmModel(weights=weights, biases=biases, config=cfg)


def svm_predict(model: LinearSvmModel, queries: np.ndarray) -> np.ndarray:
    """Argmax class score; exact ties go to the smallest state id."""
    Q = np.asarray(queries, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q[None, :]
    scores = Q @ model.weights.T + model.biases
    return np.argmax(scores, axis=1).astype(np.int64)
