"""Shared-subspace migration by minimizing regularized multi-kernel MMD.

The migration matrix W minimizes tr(W' K C K W) + lambda tr(W' W) subject
to W' K H K W = I, with K the multi-kernel Gram over stacked samples, C the
summed MMD coefficient matrix and H the centering matrix.  Stationarity
makes the columns of W generalized eigenvectors; writing A = K C K +
lambda I (positive definite) and B = K H K (positive semidefinite), the
problem is solved in the reciprocal form B w = mu A w so that B's null
space contributes mu = 0 instead of infinite eigenvalues.  The d largest
mu correspond to the d smallest nonzero objective values z = 1/mu.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .kernels import GramMatrix

__all__ = [
    "CenteringMatrix",
    "centering_matrix",
    "TransferModel",
    "solve_transfer",
    "embed",
]

RANK_TOL = 1e-9


@dataclass
class CenteringMatrix:
    """H = I - (1/n) e e'; symmetric, idempotent, rows sum to zero."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]


def centering_matrix(n: int) -> CenteringMatrix:
    if n < 2:
        raise ValueError("centering needs n >= 2")
    return CenteringMatrix(np.eye(n) - np.full((n, n), 1.0 / n))


@dataclass
class TransferModel:
    """Migration matrix and the eigenvalues that selected its columns.

    Columns are scaled so that W' B W = I with B = K H K; the recorded
    eigenvalues z (ascending, positive) satisfy W' A W = diag(z).
    The model is transductive: it is tied to the Gram it was solved on.
    """

    projection: np.ndarray  # (n_s + n_t, n_components)
    eigenvalues: np.ndarray  # (n_components,) ascending
    lambda_: float
    n_components: int
    n_s: int
    n_t: int
    kernel_hash: str | None = None

    def to_dict(self) -> dict:
        return {
            "projection": self.projection.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "lambda": self.lambda_,
            "n_components": self.n_components,
            "n_s": self.n_s,
            "n_t": self.n_t,
            "kernel_hash": self.kernel_hash,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TransferModel":
        return cls(
            projection=np.asarray(doc["projection"], dtype=np.float64),
            eigenvalues=np.asarray(doc["eigenvalues"], dtype=np.float64),
            lambda_=float(doc["lambda"]),
            n_components=int(doc["n_components"]),
            n_s=int(doc["n_s"]),
            n_t=int(doc["n_t"]),
            kernel_hash=doc.get("kernel_hash"),
        )


def solve_transfer(
    kernel_matrix: GramMatrix,
    coefficients: np.ndarray,
    lambda_: float,
    n_components: int,
    clamp: bool = False,
    kernel_hash: str | None = None,
) -> TransferModel:
    """Solve the constrained minimization as a symmetric-definite eigenproblem.

    coefficients is the summed MMD coefficient matrix (marginal plus all
    class terms).  With clamp=True, n_components is reduced to the number
    of usable directions instead of raising.
    """
    if not lambda_ > 0:
        raise ValueError("lambda must be > 0")
    K = kernel_matrix.values
    n = K.shape[0]
    if not 1 <= n_components <= n - 1:
        raise ValueError(f"n_components must lie in 1..{n - 1}")
    if coefficients.shape != K.shape:
        raise ValueError("coefficient matrix shape must match the Gram")
    if not (np.isfinite(K).all() and np.isfinite(coefficients).all()):
        raise ValueError("non-finite inputs")

    C = 0.5 * (coefficients + coefficients.T)
    H = centering_matrix(n).values
    A = K @ C @ K + lambda_ * np.eye(n)
    A = 0.5 * (A + A.T)
    B = K @ H @ K
    B = 0.5 * (B + B.T)

    # B w = mu A w with A positive definite; eigh factorizes A (Cholesky)
    # and returns mu ascending with eigenvectors satisfying W' A W = I.
    mu, vecs = scipy.linalg.eigh(B, A)
    mu_max = mu[-1]
    tol = RANK_TOL * mu_max
    available = int(np.count_nonzero(mu > tol)) if mu_max > 0 else 0
    if available < n_components:
        if not clamp:
            raise ValueError(
                f"requested {n_components} components but only {available} "
                f"directions have a nonzero eigenvalue"
            )
        if available == 0:
            raise ValueError("no usable directions: B has numerical rank 0")
        n_components = available

    # Largest mu first = smallest objective z = 1/mu first.
    order = np.arange(n - 1, n - 1 - n_components, -1)
    sel_mu = mu[order]
    W = vecs[:, order] / np.sqrt(sel_mu)  # rescale so W' B W = I
    z = 1.0 / sel_mu
    return TransferModel(
        projection=W,
        eigenvalues=z,
        lambda_=lambda_,
        n_components=n_components,
        n_s=kernel_matrix.n_s,
        n_t=kernel_matrix.n_t,
        kernel_hash=kernel_hash,
    )


def embed(model: TransferModel, kernel_matrix: GramMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Map stacked samples into the shared subspace: E = K W.

    Returns the source block (first n_s rows) and target block separately.
    The Gram must be the one the model was solved on.
    """
    if kernel_matrix.n_s != model.n_s or kernel_matrix.n_t != model.n_t:
        raise ValueError("Gram block sizes do not match the model")
    E = kernel_matrix.values @ model.projection
    return E[: model.n_s], E[model.n_s:]
