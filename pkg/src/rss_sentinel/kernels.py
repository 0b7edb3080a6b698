"""Kernel functions, median-distance scale selection and multi-kernel Grams.

Five kernel families are supported: linear, gaussian, laplace,
inverse-square-distance and inverse-distance.  The non-linear kinds take a
scale gamma, usually derived from the median pairwise distance of the
source-domain features.  A multi-kernel is a convex combination of kernels;
its Gram over stacked source+target samples drives the transfer solve.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

__all__ = [
    "KERNEL_KINDS",
    "KernelSpec",
    "MultiKernel",
    "GramMatrix",
    "kernel_eval",
    "gram",
    "median_distance",
    "median_gamma",
    "multi_gram",
    "default_multi_kernel",
]

KERNEL_KINDS = (
    "linear",
    "gaussian",
    "laplace",
    "inverse-square-distance",
    "inverse-distance",
)


def _canonical_kind(kind: str) -> str:
    k = kind.strip().lower().replace("_", "-")
    if k == "inverse-square":
        k = "inverse-square-distance"
    if k not in KERNEL_KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}; expected one of {KERNEL_KINDS}")
    return k


@dataclass(frozen=True)
class KernelSpec:
    """One kernel function: kind plus scale (gamma is ignored for linear)."""

    kind: str
    gamma: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _canonical_kind(self.kind))
        if self.kind != "linear":
            if self.gamma is None or not self.gamma > 0:
                raise ValueError(f"{self.kind} kernel needs gamma > 0, got {self.gamma}")


@dataclass(frozen=True)
class MultiKernel:
    """Convex combination of kernels: weights are nonnegative and sum to 1."""

    kernels: tuple[KernelSpec, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kernels", tuple(self.kernels))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.kernels) != len(self.weights) or not self.kernels:
            raise ValueError("need one weight per kernel and at least one kernel")
        if any(w < 0 for w in self.weights):
            raise ValueError("kernel weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"kernel weights must sum to 1, got {sum(self.weights)}")

    def to_dict(self) -> dict:
        return {
            "kernels": [{"kind": k.kind, "gamma": k.gamma} for k in self.kernels],
            "weights": list(self.weights),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MultiKernel":
        kernels = tuple(KernelSpec(e["kind"], e.get("gamma")) for e in doc["kernels"])
        return cls(kernels=kernels, weights=tuple(doc["weights"]))

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class GramMatrix:
    """Kernel matrix over stacked source+target rows (source rows first)."""

    values: np.ndarray
    n_s: int
    n_t: int

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        n = self.n_s + self.n_t
        if self.values.shape != (n, n):
            raise ValueError(f"gram must be {n}x{n}, got {self.values.shape}")

    @property
    def n(self) -> int:
        return self.n_s + self.n_t


def _as_matrix(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", x), dtype=np.float64)


def _apply_kernel(spec: KernelSpec, dot: np.ndarray, sq_dist: np.ndarray) -> np.ndarray:
    """Evaluate a kernel from precomputed inner products / squared distances."""
    if spec.kind == "linear":
        return dot
    g = spec.gamma
    if spec.kind == "gaussian":
        return np.exp(-g * sq_dist)
    if spec.kind == "laplace":
        return np.exp(-math.sqrt(g) * np.sqrt(sq_dist))
    if spec.kind == "inverse-square-distance":
        return 1.0 / (g * sq_dist + 1.0)
    if spec.kind == "inverse-distance":
        return 1.0 / (g * np.sqrt(sq_dist) + 1.0)
    raise AssertionError(spec.kind)


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Kernel value for a single pair of equal-length vectors."""
    xv = np.asarray(x, dtype=np.float64).ravel()
    yv = np.asarray(y, dtype=np.float64).ravel()
    if xv.shape != yv.shape:
        raise ValueError(f"vector lengths differ: {xv.shape} vs {yv.shape}")
    diff = xv - yv
    return float(_apply_kernel(spec, np.array(xv @ yv), np.array(diff @ diff)))


def gram(spec: KernelSpec, X, Y=None) -> np.ndarray:
    """Kernel matrix between row sets X and Y (Y defaults to X)."""
    Xm = _as_matrix(X)
    Ym = Xm if Y is None else _as_matrix(Y)
    if Xm.shape[1] != Ym.shape[1]:
        raise ValueError("row widths differ")
    dot = Xm @ Ym.T
    sq = cdist(Xm, Ym, "sqeuclidean")
    return _apply_kernel(spec, dot, sq)


def median_distance(X) -> float:
    """Median Euclidean distance over all distinct row pairs."""
    Xm = _as_matrix(X)
    if len(Xm) < 2:
        raise ValueError("need at least two rows for a pairwise median")
    m = float(np.median(pdist(Xm)))
    if m <= 0:
        raise ValueError("median pairwise distance is zero (all rows identical)")
    return m


def median_gamma(X, kind: str, gamma_mode: str = "reciprocal") -> float:
    """Kernel scale from the median pairwise distance m of the rows.

    "reciprocal" (default) keeps kernel values O(1) at typical distances:
    1/m^2 for gaussian, laplace and inverse-square-distance, 1/m for
    inverse-distance.  "raw_median" returns m itself for every kind.
    """
    kind = _canonical_kind(kind)
    m = median_distance(X)
    if gamma_mode == "raw_median":
        return m
    if gamma_mode != "reciprocal":
        raise ValueError(f"unknown gamma_mode {gamma_mode!r}")
    if kind == "inverse-distance":
        return 1.0 / m
    return 1.0 / (m * m)


def multi_gram(mk: MultiKernel, X_S, X_T) -> GramMatrix:
    """Weighted Gram over stacked source+target rows: sum_g alpha_g K_g."""
    Xs = _as_matrix(X_S)
    Xt = _as_matrix(X_T)
    if Xs.shape[1] != Xt.shape[1]:
        raise ValueError(f"feature widths differ: {Xs.shape[1]} vs {Xt.shape[1]}")
    stacked = np.vstack([Xs, Xt])
    dot = stacked @ stacked.T
    sq = cdist(stacked, stacked, "sqeuclidean")
    values = np.zeros_like(dot)
    for w, spec in zip(mk.weights, mk.kernels):
        if w:
            values += w * _apply_kernel(spec, dot, sq)
    values = 0.5 * (values + values.T)
    return GramMatrix(values=values, n_s=len(Xs), n_t=len(Xt))


def default_multi_kernel(
    X_source,
    kinds: tuple[str, ...] = KERNEL_KINDS,
    weights: tuple[float, ...] | None = None,
    gamma_mode: str = "reciprocal",
) -> MultiKernel:
    """Uniformly weighted multi-kernel with median-based scales.

    Scales are computed from the source rows only and are meant to stay
    frozen for the lifetime of a detection run.
    """
    specs = []
    for kind in kinds:
        kind = _canonical_kind(kind)
        g = None if kind == "linear" else median_gamma(X_source, kind, gamma_mode)
        specs.append(KernelSpec(kind, g))
    if weights is None:
        weights = tuple(1.0 / len(specs) for _ in specs)
    return MultiKernel(kernels=tuple(specs), weights=weights)
