"""Maximum mean discrepancy between source and target feature sets.

The squared RKHS distance between mean embeddings is evaluated two ways:
directly, by expanding the kernel double sums, and in trace form
tr(K * C) where K is the Gram over stacked samples and C is a coefficient
matrix.  C is the outer product of a signed indicator vector (+1/n_s on
source members, -1/n_t on target members), either over whole domains
(the marginal term) or restricted to one class (conditional terms).  The
mixed discrepancy is the marginal term plus one conditional term per class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import GramMatrix, KernelSpec, MultiKernel, gram

__all__ = [
    "LabelVector",
    "MmdCoefficientMatrix",
    "marginal_coefficients",
    "class_coefficients",
    "combined_coefficients",
    "mmd_direct",
    "mixed_mmd",
]


@dataclass
class LabelVector:
    """State ids for one domain; provisional marks pseudo/dummy tags."""

    states: np.ndarray
    domain: str = "source"
    provisional: bool = False

    def __post_init__(self) -> None:
        self.states = np.asarray(self.states, dtype=np.int64)
        if self.states.ndim != 1:
            raise ValueError("states must be a 1-D vector")
        if len(self.states) and self.states.min() < 0:
            raise ValueError("state ids must be nonnegative")

    def __len__(self) -> int:
        return len(self.states)


def _states(labels) -> np.ndarray:
    arr = labels.states if isinstance(labels, LabelVector) else np.asarray(labels)
    return np.asarray(arr, dtype=np.int64)


@dataclass
class MmdCoefficientMatrix:
    """Signed-indicator outer product; class_index 0 is the marginal term."""

    values: np.ndarray
    class_index: int

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)


def marginal_coefficients(n_s: int, n_t: int) -> MmdCoefficientMatrix:
    """Whole-domain coefficient matrix: 1/n_s^2, 1/n_t^2, -1/(n_s n_t)."""
    if n_s < 1 or n_t < 1:
        raise ValueError("both domains need at least one sample")
    a = np.concatenate([np.full(n_s, 1.0 / n_s), np.full(n_t, -1.0 / n_t)])
    return MmdCoefficientMatrix(values=np.outer(a, a), class_index=0)


def class_coefficients(labels_s, labels_t, class_id: int) -> MmdCoefficientMatrix:
    """Coefficient matrix restricted to one class.

    class_id runs 1..K and selects state class_id - 1.  If either domain
    has no member of the class the matrix is zero, so early detection
    iterations with missing pseudo-label classes still proceed.
    """
    if class_id < 1:
        raise ValueError("class_id is 1-based")
    ys = _states(labels_s)
    yt = _states(labels_t)
    state = class_id - 1
    in_s = ys == state
    in_t = yt == state
    n_sk = int(in_s.sum())
    n_tk = int(in_t.sum())
    a = np.zeros(len(ys) + len(yt))
    if n_sk > 0 and n_tk > 0:
        a[: len(ys)][in_s] = 1.0 / n_sk
        a[len(ys):][in_t] = -1.0 / n_tk
    return MmdCoefficientMatrix(values=np.outer(a, a), class_index=class_id)


def combined_coefficients(labels_s, labels_t, n_classes: int) -> np.ndarray:
    """Marginal plus all per-class coefficient matrices, summed."""
    ys = _states(labels_s)
    yt = _states(labels_t)
    total = marginal_coefficients(len(ys), len(yt)).values.copy()
    for k in range(1, n_classes + 1):
        total += class_coefficients(ys, yt, k).values
    return total


def _pair_sum(spec, A: np.ndarray, B: np.ndarray) -> float:
    return float(gram(spec, A, B).sum())


def mmd_direct(spec: KernelSpec | MultiKernel, A, B) -> float:
    """Squared MMD by direct expansion of the kernel double sums."""
    Am = np.asarray(getattr(A, "values", A), dtype=np.float64)
    Bm = np.asarray(getattr(B, "values", B), dtype=np.float64)
    if Am.ndim == 1:
        Am = Am[:, None]
    if Bm.ndim == 1:
        Bm = Bm[:, None]
    if len(Am) == 0 or len(Bm) == 0:
        raise ValueError("both sample sets must be nonempty")
    if Am.shape[1] != Bm.shape[1]:
        raise ValueError("sample widths differ")
    if isinstance(spec, MultiKernel):
        return float(
            sum(w * mmd_direct(k, Am, Bm) for w, k in zip(spec.weights, spec.kernels))
        )
    na, nb = len(Am), len(Bm)
    return (
        _pair_sum(spec, Am, Am) / na**2
        + _pair_sum(spec, Bm, Bm) / nb**2
        - 2.0 * _pair_sum(spec, Am, Bm) / (na * nb)
    )


def mixed_mmd(
    kernel_matrix: GramMatrix,
    labels_s,
    labels_t,
    n_classes: int | None = None,
) -> tuple[float, list[float]]:
    """Marginal plus per-class MMD in trace form over one Gram matrix.

    Returns (total, per_term) where per_term[0] is the marginal value and
    per_term[k] the class-k value.
    """
    ys = _states(labels_s)
    yt = _states(labels_t)
    if len(ys) != kernel_matrix.n_s or len(yt) != kernel_matrix.n_t:
        raise ValueError("label counts do not match the Gram block sizes")
    if n_classes is None:
        n_classes = int(max(ys.max(), yt.max())) + 1
    terms = [_trace_term(kernel_matrix.values, marginal_coefficients(len(ys), len(yt)))]
    for k in range(1, n_classes + 1):
        terms.append(_trace_term(kernel_matrix.values, class_coefficients(ys, yt, k)))
    return float(sum(terms)), terms


def _trace_term(K: np.ndarray, coeff: MmdCoefficientMatrix) -> float:
    # tr(K C) = sum(K * C) for symmetric C
    return float(np.sum(K * coeff.values))
