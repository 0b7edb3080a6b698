import itertools
import math

import numpy as np
import pytest

from rss_sentinel.kernels import (
    KERNEL_KINDS,
    GramMatrix,
    KernelSpec,
    MultiKernel,
    default_multi_kernel,
    gram,
    kernel_eval,
    median_distance,
    median_gamma,
    multi_gram,
)


def brute_force_median(X):
    dists = [
        float(np.linalg.norm(X[i] - X[j]))
        for i, j in itertools.combinations(range(len(X)), 2)
    ]
    return float(np.median(dists))


def test_linear_kernel_dot_product():
    assert kernel_eval(KernelSpec("linear"), [1.0, 2.0], [3.0, 4.0]) == 11.0


def test_gaussian_kernel_value():
    # gamma=1, squared distance 1 -> e^-1
    v = kernel_eval(KernelSpec("gaussian", 1.0), [0.0, 0.0], [1.0, 0.0])
    assert v == pytest.approx(math.exp(-1.0), abs=1e-12)


def test_laplace_and_inverse_kernels_hand_values():
    # distance 2, gamma 4: laplace exp(-2*2); inverse-square 1/(4*4+1); inverse 1/(4*2+1)
    x, y = [0.0], [2.0]
    assert kernel_eval(KernelSpec("laplace", 4.0), x, y) == pytest.approx(math.exp(-4.0))
    assert kernel_eval(KernelSpec("inverse-square-distance", 4.0), x, y) == pytest.approx(1 / 17)
    assert kernel_eval(KernelSpec("inverse-distance", 4.0), x, y) == pytest.approx(1 / 9)


def test_self_similarity_is_one_for_distance_kernels():
    x = np.array([0.3, -1.2, 4.0])
    for kind in KERNEL_KINDS:
        if kind == "linear":
            continue
        assert kernel_eval(KernelSpec(kind, 2.5), x, x) == pytest.approx(1.0, abs=1e-12)


def test_kernel_eval_rejects_length_mismatch():
    with pytest.raises(ValueError, match="length"):
        kernel_eval(KernelSpec("linear"), [1.0], [1.0, 2.0])


def test_median_distance_examples():
    assert median_distance(np.array([[0.0], [1.0], [3.0]])) == 2.0
    assert median_distance(np.array([[0.0], [5.0]])) == 5.0


def test_median_distance_matches_brute_force():
    rng = np.random.default_rng(0)
    for n in (3, 6, 11):
        X = rng.normal(size=(n, 4))
        assert median_distance(X) == pytest.approx(brute_force_median(X), rel=1e-12)
    # duplicated rows change the pair multiset; the oracle still agrees
    X = rng.normal(size=(5, 3))
    doubled = np.vstack([X, X])
    assert median_distance(doubled) == pytest.approx(brute_force_median(doubled), rel=1e-12)


def test_median_distance_rejects_identical_rows():
    with pytest.raises(ValueError, match="identical"):
        median_distance(np.ones((4, 2)))


def test_median_gamma_modes():
    X = np.array([[0.0], [1.0], [3.0]])  # m = 2
    assert median_gamma(X, "gaussian") == pytest.approx(0.25)
    assert median_gamma(X, "laplace") == pytest.approx(0.25)
    assert median_gamma(X, "inverse-square-distance") == pytest.approx(0.25)
    assert median_gamma(X, "inverse-distance") == pytest.approx(0.5)
    for kind in KERNEL_KINDS[1:]:
        assert median_gamma(X, kind, "raw_median") == pytest.approx(2.0)
    with pytest.raises(ValueError, match="gamma_mode"):
        median_gamma(X, "gaussian", "sqrt")


def test_multi_gram_degenerate_weights_equal_single_gram():
    rng = np.random.default_rng(1)
    Xs, Xt = rng.normal(size=(4, 3)), rng.normal(size=(3, 3))
    specs = (KernelSpec("gaussian", 0.5), KernelSpec("linear"))
    mk = MultiKernel(kernels=specs, weights=(1.0, 0.0))
    stacked = np.vstack([Xs, Xt])
    assert np.allclose(multi_gram(mk, Xs, Xt).values, gram(specs[0], stacked), atol=1e-12)


def test_multi_gram_is_weighted_entrywise_sum():
    rng = np.random.default_rng(2)
    Xs, Xt = rng.uniform(size=(3, 2)), rng.uniform(size=(2, 2))
    specs = (KernelSpec("gaussian", 1.0), KernelSpec("linear"))
    mk = MultiKernel(kernels=specs, weights=(0.5, 0.5))
    got = multi_gram(mk, Xs, Xt)
    stacked = np.vstack([Xs, Xt])
    for i in range(5):
        for j in range(5):
            want = 0.5 * kernel_eval(specs[0], stacked[i], stacked[j]) + 0.5 * kernel_eval(
                specs[1], stacked[i], stacked[j]
            )
            assert got.values[i, j] == pytest.approx(want, abs=1e-12)


def test_multi_gram_block_structure_and_diagonal():
    rng = np.random.default_rng(3)
    Xs, Xt = rng.normal(size=(4, 3)), rng.normal(size=(2, 3))
    mk = MultiKernel(kernels=(KernelSpec("gaussian", 0.7),), weights=(1.0,))
    g = multi_gram(mk, Xs, Xt)
    assert g.n_s == 4 and g.n_t == 2 and g.n == 6
    assert np.allclose(np.diag(g.values), 1.0)
    assert np.abs(g.values - g.values.T).max() <= 1e-10
    assert np.allclose(g.values[:4, 4:], gram(mk.kernels[0], Xs, Xt), atol=1e-12)


def test_gaussian_and_laplace_grams_are_psd():
    rng = np.random.default_rng(4)
    for seed in range(6):
        n = int(rng.integers(3, 31))
        X = np.random.default_rng(seed).normal(size=(n, 5))
        for kind in ("gaussian", "laplace"):
            K = gram(KernelSpec(kind, 0.8), X)
            min_eig = np.linalg.eigvalsh(0.5 * (K + K.T)).min()
            assert min_eig >= -1e-8 * K.diagonal().max()


def test_multikernel_validation():
    spec = KernelSpec("gaussian", 1.0)
    with pytest.raises(ValueError, match="sum to 1"):
        MultiKernel(kernels=(spec,), weights=(0.7,))
    with pytest.raises(ValueError, match="nonnegative"):
        MultiKernel(kernels=(spec, spec), weights=(1.5, -0.5))
    with pytest.raises(ValueError, match="gamma"):
        KernelSpec("gaussian", 0.0)
    with pytest.raises(ValueError, match="unknown kernel kind"):
        KernelSpec("cubic", 1.0)
    # underscore and short aliases canonicalize
    assert KernelSpec("inverse_square", 1.0).kind == "inverse-square-distance"


def test_default_multi_kernel_uses_all_kinds_uniformly():
    rng = np.random.default_rng(5)
    X = rng.uniform(size=(10, 4))
    mk = default_multi_kernel(X)
    assert tuple(k.kind for k in mk.kernels) == KERNEL_KINDS
    assert all(w == pytest.approx(0.2) for w in mk.weights)
    assert mk.kernels[0].gamma is None
    again = MultiKernel.from_dict(mk.to_dict())
    assert again == mk
    assert again.config_hash() == mk.config_hash()


def test_gram_matrix_shape_validation():
    with pytest.raises(ValueError):
        GramMatrix(values=np.zeros((3, 3)), n_s=2, n_t=2)
    with pytest.raises(ValueError, match="width"):
        multi_gram(
            MultiKernel(kernels=(KernelSpec("linear"),), weights=(1.0,)),
            np.zeros((2, 3)),
            np.zeros((2, 4)),
        )
