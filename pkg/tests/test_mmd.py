import numpy as np
import pytest

from rss_sentinel.kernels import KERNEL_KINDS, KernelSpec, MultiKernel, default_multi_kernel, multi_gram
from rss_sentinel.mmd import (
    LabelVector,
    class_coefficients,
    combined_coefficients,
    marginal_coefficients,
    mixed_mmd,
    mmd_direct,
)


def signed_indicator(n_s, n_t, ys=None, yt=None, state=None):
    a = np.zeros(n_s + n_t)
    if state is None:
        a[:n_s] = 1.0 / n_s
        a[n_s:] = -1.0 / n_t
        return a
    in_s = np.asarray(ys) == state
    in_t = np.asarray(yt) == state
    if in_s.sum() == 0 or in_t.sum() == 0:
        return a
    a[:n_s][in_s] = 1.0 / in_s.sum()
    a[n_s:][in_t] = -1.0 / in_t.sum()
    return a


def test_marginal_one_one():
    m = marginal_coefficients(1, 1)
    assert np.allclose(m.values, [[1.0, -1.0], [-1.0, 1.0]])
    assert m.class_index == 0


def test_marginal_two_one():
    m = marginal_coefficients(2, 1).values
    assert np.allclose(m[:2, :2], 0.25)
    assert m[2, 2] == 1.0
    assert np.allclose(m[:2, 2], -0.5)
    assert np.allclose(m.sum(axis=1), 0.0)


def test_marginal_is_outer_product_and_psd():
    for n_s, n_t in [(1, 1), (3, 2), (5, 7)]:
        m = marginal_coefficients(n_s, n_t).values
        a = signed_indicator(n_s, n_t)
        assert np.allclose(m, np.outer(a, a), atol=1e-15)
        assert np.linalg.eigvalsh(m).min() >= -1e-12


def test_class_coefficients_single_members():
    m = class_coefficients([2], [2], class_id=3).values
    assert np.allclose(m, [[1.0, -1.0], [-1.0, 1.0]])


def test_class_coefficients_empty_class_is_zero():
    m = class_coefficients([0, 1], [0, 0], class_id=2).values
    assert np.allclose(m, 0.0)


def test_class_coefficients_outer_product_oracle():
    rng = np.random.default_rng(0)
    for trial in range(20):
        n_s, n_t = rng.integers(2, 10), rng.integers(2, 10)
        K = int(rng.integers(2, 4))
        ys = rng.integers(0, K, n_s)
        yt = rng.integers(0, K, n_t)
        for k in range(1, K + 1):
            got = class_coefficients(ys, yt, k).values
            a = signed_indicator(n_s, n_t, ys, yt, state=k - 1)
            assert np.allclose(got, np.outer(a, a), atol=1e-15)
            assert np.allclose(got.sum(axis=1), 0.0, atol=1e-12)


def test_mmd_direct_identical_sets_is_zero():
    rng = np.random.default_rng(1)
    A = rng.uniform(size=(5, 3))
    for kind in KERNEL_KINDS:
        spec = KernelSpec(kind, None if kind == "linear" else 1.0)
        assert abs(mmd_direct(spec, A, A)) <= 1e-12


def test_mmd_direct_linear_one_dimensional():
    # means 1 and 2 -> squared mean gap 1
    val = mmd_direct(KernelSpec("linear"), np.array([[0.0], [2.0]]), np.array([[1.0], [3.0]]))
    assert val == pytest.approx(1.0, abs=1e-12)


def test_mmd_direct_nonnegative_for_psd_kernels():
    rng = np.random.default_rng(2)
    for seed in range(10):
        r = np.random.default_rng(seed)
        A = r.normal(size=(r.integers(2, 8), 3))
        B = r.normal(size=(r.integers(2, 8), 3)) + 0.3
        for kind in ("gaussian", "laplace"):
            assert mmd_direct(KernelSpec(kind, 0.7), A, B) >= -1e-10


def test_mmd_direct_multikernel_is_weighted_sum():
    rng = np.random.default_rng(3)
    A, B = rng.uniform(size=(4, 2)), rng.uniform(size=(3, 2))
    mk = MultiKernel(
        kernels=(KernelSpec("linear"), KernelSpec("gaussian", 1.0)), weights=(0.3, 0.7)
    )
    want = 0.3 * mmd_direct(mk.kernels[0], A, B) + 0.7 * mmd_direct(mk.kernels[1], A, B)
    assert mmd_direct(mk, A, B) == pytest.approx(want, rel=1e-12)


def test_trace_form_matches_direct_marginal():
    rng = np.random.default_rng(4)
    for trial in range(8):
        r = np.random.default_rng(trial)
        n_s, n_t = int(r.integers(2, 20)), int(r.integers(2, 20))
        Xs = r.uniform(size=(n_s, 4))
        Xt = r.uniform(size=(n_t, 4)) + 0.25
        mk = default_multi_kernel(Xs)
        g = multi_gram(mk, Xs, Xt)
        total, terms = mixed_mmd(g, np.zeros(n_s, dtype=int), np.zeros(n_t, dtype=int), 1)
        direct = mmd_direct(mk, Xs, Xt)
        assert terms[0] == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_mixed_mmd_single_pseudo_class_structure():
    rng = np.random.default_rng(5)
    Xs, Xt = rng.uniform(size=(6, 3)), rng.uniform(size=(5, 3))
    ys = np.array([0, 0, 1, 1, 2, 2])
    yt = np.full(5, 1)  # every pseudo-label is class state 1
    g = multi_gram(default_multi_kernel(Xs), Xs, Xt)
    total, terms = mixed_mmd(g, ys, yt, 3)
    assert terms[1] == 0.0  # state 0 has no target members
    assert terms[2] != 0.0  # state 1 present on both sides
    assert terms[3] == 0.0
    assert total == pytest.approx(sum(terms))


def test_mixed_mmd_identical_domains_zero():
    rng = np.random.default_rng(6)
    X = rng.uniform(size=(8, 3))
    y = np.array([0, 0, 1, 1, 2, 2, 1, 0])
    g = multi_gram(default_multi_kernel(X), X, X)
    total, _ = mixed_mmd(g, y, y, 3)
    assert abs(total) <= 1e-10


def test_combined_coefficients_sum():
    ys = np.array([0, 1, 1])
    yt = np.array([1, 0])
    got = combined_coefficients(ys, yt, 2)
    want = marginal_coefficients(3, 2).values.copy()
    for k in (1, 2):
        want += class_coefficients(ys, yt, k).values
    assert np.allclose(got, want, atol=1e-15)


def test_label_vector_validation():
    lv = LabelVector(np.array([0, 1, 2]), domain="target", provisional=True)
    assert len(lv) == 3
    with pytest.raises(ValueError):
        LabelVector(np.array([-1, 0]))
    # label vectors are accepted by the coefficient builders
    m = class_coefficients(LabelVector(np.array([0])), LabelVector(np.array([0])), 1)
    assert np.allclose(m.values, [[1.0, -1.0], [-1.0, 1.0]])


def test_mixed_mmd_size_mismatch_rejected():
    rng = np.random.default_rng(7)
    X = rng.uniform(size=(4, 2))
    g = multi_gram(default_multi_kernel(X), X, X)
    with pytest.raises(ValueError, match="label counts"):
        mixed_mmd(g, np.zeros(3, dtype=int), np.zeros(4, dtype=int), 1)
