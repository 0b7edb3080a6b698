"""Multi-branch fusion network over windowed RSS features.

The normalized feature row (8 blocks of length n_paths) is split into its
eight blocks, one per statistic.  Each block runs through its own branch:
conv(1->4 channels, width 3, zero padding), ReLU, conv(4->8, width 3,
padding), ReLU, global average pool, flatten.  The eight pooled vectors
(8 channels each) are concatenated into 64 values, reduced by a dense+ReLU
layer to the fusion feature, and a final dense layer produces class logits.

Training is plain SGD with momentum on the softmax cross-entropy, with all
gradients derived by hand; a finite-difference check in the test suite
pins them down.  Forward evaluation and fusion are pure functions.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .features import FeatureMatrix

__all__ = [
    "N_BRANCHES",
    "TrainConfig",
    "FusionNet",
    "FusionFeatureMatrix",
    "init_network",
    "forward",
    "loss_and_grads",
    "train",
    "fuse",
]

N_BRANCHES = 8
KERNEL_WIDTH = 3
CONV1_CHANNELS = 4
CONV2_CHANNELS = 8
CONCAT_WIDTH = N_BRANCHES * CONV2_CHANNELS  # 64

PARAM_NAMES = (
    "conv1_w",
    "conv1_b",
    "conv2_w",
    "conv2_b",
    "dense1_w",
    "dense1_b",
    "dense2_w",
    "dense2_b",
)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    momentum: float = 0.9
    epochs: int = 40
    batch_size: int = 32

    def __post_init__(self) -> None:
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be >= 0")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass
class FusionNet:
    """All parameter tensors plus the shape constants they were built for."""

    conv1_w: np.ndarray  # (branches, 4, 1, 3)
    conv1_b: np.ndarray  # (branches, 4)
    conv2_w: np.ndarray  # (branches, 8, 4, 3)
    conv2_b: np.ndarray  # (branches, 8)
    dense1_w: np.ndarray  # (64, fused_dim)
    dense1_b: np.ndarray  # (fused_dim,)
    dense2_w: np.ndarray  # (fused_dim, n_states)
    dense2_b: np.ndarray  # (n_states,)
    n_paths: int
    n_states: int
    fused_dim: int
    seed: int

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "FusionNet":
        return dataclasses.replace(
            self, **{name: getattr(self, name).copy() for name in PARAM_NAMES}
        )

    def to_dict(self) -> dict:
        doc = {name: getattr(self, name).tolist() for name in PARAM_NAMES}
        doc.update(
            n_paths=self.n_paths,
            n_states=self.n_states,
            fused_dim=self.fused_dim,
            seed=self.seed,
            layout_version=1,
        )
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "FusionNet":
        if doc.get("layout_version") != 1:
            raise ValueError(f"unsupported model layout_version {doc.get('layout_version')!r}")
        tensors = {name: np.asarray(doc[name], dtype=np.float64) for name in PARAM_NAMES}
        return cls(
            **tensors,
            n_paths=int(doc["n_paths"]),
            n_states=int(doc["n_states"]),
            fused_dim=int(doc["fused_dim"]),
            seed=int(doc["seed"]),
        )


@dataclass
class FusionFeatureMatrix:
    """n rows of fusion features, optionally labelled with state ids."""

    values: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if not np.isfinite(self.values).all():
            raise ValueError("fusion features must be finite")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if len(self.labels) != len(self.values):
                raise ValueError("labels length must match row count")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_network(n_paths: int, n_states: int, fused_dim: int = 32, seed: int = 0) -> FusionNet:
    """Fresh network with Glorot-uniform weights and zero biases."""
    if n_paths < KERNEL_WIDTH:
        raise ValueError(f"n_paths must be >= {KERNEL_WIDTH}")
    if n_states < 2:
        raise ValueError("n_states must be >= 2")
    if fused_dim < 1:
        raise ValueError("fused_dim must be >= 1")
    rng = np.random.default_rng(seed)
    kw = KERNEL_WIDTH
    return FusionNet(
        conv1_w=_glorot(rng, (N_BRANCHES, CONV1_CHANNELS, 1, kw), 1 * kw, CONV1_CHANNELS * kw),
        conv1_b=np.zeros((N_BRANCHES, CONV1_CHANNELS)),
        conv2_w=_glorot(
            rng,
            (N_BRANCHES, CONV2_CHANNELS, CONV1_CHANNELS, kw),
            CONV1_CHANNELS * kw,
            CONV2_CHANNELS * kw,
        ),
        conv2_b=np.zeros((N_BRANCHES, CONV2_CHANNELS)),
        dense1_w=_glorot(rng, (CONCAT_WIDTH, fused_dim), CONCAT_WIDTH, fused_dim),
        dense1_b=np.zeros(fused_dim),
        dense2_w=_glorot(rng, (fused_dim, n_states), fused_dim, n_states),
        dense2_b=np.zeros(n_states),
        n_paths=n_paths,
        n_states=n_states,
        fused_dim=fused_dim,
        seed=seed,
    )


def _conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-branch 1-D convolution, zero padding 1, stride 1.

    x: (n, branches, c_in, length); w: (branches, c_out, c_in, 3);
    b: (branches, c_out).  Output: (n, branches, c_out, length).
    """
    xp = np.pad(x, ((0, 0), (0, 0), (0, 0), (1, 1)))
    win = sliding_window_view(xp, KERNEL_WIDTH, axis=3)
    return np.einsum("nbilw,boiw->nbol", win, w, optimize=True) + b[None, :, :, None]


def _conv_backward(
    dz: np.ndarray, x: np.ndarray, w: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of _conv_forward wrt weights, biases and input."""
    xp = np.pad(x, ((0, 0), (0, 0), (0, 0), (1, 1)))
    win_x = sliding_window_view(xp, KERNEL_WIDTH, axis=3)
    dw = np.einsum("nbol,nbilw->boiw", dz, win_x, optimize=True)
    db = dz.sum(axis=(0, 3))
    dzp = np.pad(dz, ((0, 0), (0, 0), (0, 0), (1, 1)))
    win_dz = sliding_window_view(dzp, KERNEL_WIDTH, axis=3)
    dx = np.einsum("nbomw,boiw->nbim", win_dz, w[..., ::-1], optimize=True)
    return dw, db, dx


def _forward_batch(net: FusionNet, X: np.ndarray, want_logits: bool) -> dict:
    """Run the whole network on a batch, keeping activations for backprop."""
    n = X.shape[0]
    if X.shape[1] != N_BRANCHES * net.n_paths:
        raise ValueError(
            f"input width {X.shape[1]} != {N_BRANCHES} * n_paths = {N_BRANCHES * net.n_paths}"
        )
    x = X.reshape(n, N_BRANCHES, 1, net.n_paths)
    z1 = _conv_forward(x, net.conv1_w, net.conv1_b)
    a1 = np.maximum(z1, 0.0)
    z2 = _conv_forward(a1, net.conv2_w, net.conv2_b)
    a2 = np.maximum(z2, 0.0)
    pooled = a2.mean(axis=3)  # (n, branches, c2)
    concat = pooled.reshape(n, CONCAT_WIDTH)
    pre1 = concat @ net.dense1_w + net.dense1_b
    fused = np.maximum(pre1, 0.0)
    cache = {"x": x, "z1": z1, "a1": a1, "z2": z2, "concat": concat, "pre1": pre1, "fused": fused}
    if want_logits:
        logits = fused @ net.dense2_w + net.dense2_b
        shifted = logits - logits.max(axis=1, keepdims=True)
        expv = np.exp(shifted)
        probs = expv / expv.sum(axis=1, keepdims=True)
        cache.update(logits=logits, log_probs=shifted - np.log(expv.sum(axis=1, keepdims=True)), probs=probs)
    return cache


def forward(
    net: FusionNet, row: np.ndarray, mode: str = "with_logits"
) -> tuple[np.ndarray, np.ndarray | None]:
    """Evaluate one feature row: (fusion feature, class probabilities).

    mode "features_only" skips the classifier head and returns None for
    the probabilities.
    """
    if mode not in ("with_logits", "features_only"):
        raise ValueError(f"unknown mode {mode!r}")
    row = np.asarray(row, dtype=np.float64).reshape(1, -1)
    if not np.isfinite(row).all():
        raise ValueError("input row must be finite")
    cache = _forward_batch(net, row, want_logits=mode == "with_logits")
    fused = cache["fused"][0]
    probs = cache["probs"][0] if mode == "with_logits" else None
    return fused, probs


def loss_and_grads(
    net: FusionNet, X: np.ndarray, y: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and its exact parameter gradients."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise ValueError("batch must be nonempty")
    if y.min() < 0 or y.max() >= net.n_states:
        raise ValueError(f"labels must lie in 0..{net.n_states - 1}")
    n = len(X)
    cache = _forward_batch(net, X, want_logits=True)
    loss = float(-cache["log_probs"][np.arange(n), y].mean())

    dlogits = cache["probs"].copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n

    fused = cache["fused"]
    g_dense2_w = fused.T @ dlogits
    g_dense2_b = dlogits.sum(axis=0)
    dfused = dlogits @ net.dense2_w.T
    dpre1 = dfused * (cache["pre1"] > 0)
    g_dense1_w = cache["concat"].T @ dpre1
    g_dense1_b = dpre1.sum(axis=0)
    dconcat = dpre1 @ net.dense1_w.T
    dpooled = dconcat.reshape(n, N_BRANCHES, CONV2_CHANNELS)
    length = net.n_paths
    da2 = np.repeat(dpooled[..., None], length, axis=3) / length
    dz2 = da2 * (cache["z2"] > 0)
    g_conv2_w, g_conv2_b, da1 = _conv_backward(dz2, cache["a1"], net.conv2_w)
    dz1 = da1 * (cache["z1"] > 0)
    g_conv1_w, g_conv1_b, _ = _conv_backward(dz1, cache["x"], net.conv1_w)

    grads = {
        "conv1_w": g_conv1_w,
        "conv1_b": g_conv1_b,
        "conv2_w": g_conv2_w,
        "conv2_b": g_conv2_b,
        "dense1_w": g_dense1_w,
        "dense1_b": g_dense1_b,
        "dense2_w": g_dense2_w,
        "dense2_b": g_dense2_b,
    }
    return loss, grads


def train(
    net: FusionNet,
    features: FeatureMatrix,
    cfg: TrainConfig = TrainConfig(),
    seed: int = 0,
) -> tuple[FusionNet, list[float]]:
    """SGD with momentum over seeded shuffled mini-batches.

    Returns a trained copy of the network and the per-epoch mean loss.
    """
    if features.labels is None:
        raise ValueError("training needs a labelled feature matrix")
    if not features.normalized:
        raise ValueError("training expects normalized features")
    X = features.values
    y = features.labels
    out = net.copy()
    velocity = {name: np.zeros_like(arr) for name, arr in out.params().items()}
    rng = np.random.default_rng(seed)
    n = len(X)
    history: list[float] = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = loss_and_grads(out, X[idx], y[idx])
            total += loss * len(idx)
            for name, g in grads.items():
                v = velocity[name]
                v *= cfg.momentum
                v -= cfg.learning_rate * g
                getattr(out, name)[...] += v
        history.append(total / n)
    return out, history


def fuse(net: FusionNet, features: FeatureMatrix) -> FusionFeatureMatrix:
    """Map every feature row to its fusion feature, carrying labels through."""
    if not features.normalized:
        raise ValueError("fusion expects normalized features")
    cache = _forward_batch(net, features.values, want_logits=False)
    labels = None if features.labels is None else features.labels.copy()
    return FusionFeatureMatrix(values=cache["fused"], labels=labels)
