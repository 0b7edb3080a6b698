import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rss_sentinel.features import (
    FeatureMatrix,
    WindowingConfig,
    column_bounds,
    extract_windows,
    normalize,
    normalize_between,
)
from rss_sentinel.simulate import RssTrace


def one_path_trace(samples, states=None):
    arr = np.asarray(samples, dtype=float)[:, None]
    if states is None:
        states = np.zeros(len(arr), dtype=int)
    return RssTrace(rss=arr, states=np.asarray(states))


def test_eight_statistics_hand_computed():
    fm = extract_windows(one_path_trace([-50.0, -50.0, -48.0, -48.0]), WindowingConfig(4))
    # block order: mean, variance, max, min, range, median, mode, prob_above_mean
    expected = [-49.0, 1.0, -48.0, -50.0, 2.0, -49.0, -50.0, 0.5]
    assert fm.values.shape == (1, 8)
    assert np.allclose(fm.values[0], expected)


def test_constant_window_statistics():
    fm = extract_windows(one_path_trace([-60.0] * 6), WindowingConfig(6))
    mean, var, mx, mn, rng, med, mode, pam = fm.values[0]
    assert var == 0.0 and rng == 0.0 and pam == 0.0
    assert mean == mx == mn == med == mode == -60.0


def test_two_path_block_layout():
    rss = np.array([[1.0, 10.0], [3.0, 10.0]])
    trace = RssTrace(rss=rss, states=np.zeros(2, dtype=int))
    fm = extract_windows(trace, WindowingConfig(2))
    assert fm.values.shape == (1, 16)
    # means of path 0 and 1 first, then variances, then maxima
    assert np.allclose(fm.values[0, :2], [2.0, 10.0])
    assert np.allclose(fm.values[0, 2:4], [1.0, 0.0])
    assert np.allclose(fm.values[0, 4:6], [3.0, 10.0])


def test_mode_tie_breaks_to_smaller_value():
    fm = extract_windows(one_path_trace([-50.0, -48.0, -50.0, -48.0]), WindowingConfig(4))
    assert fm.values[0, 6] == -50.0


def test_window_labels_are_majority_with_tie_to_smallest():
    trace = one_path_trace(list(range(8)), states=[1, 1, 1, 2, 2, 2, 0, 0])
    fm = extract_windows(trace, WindowingConfig(4, stride=2))
    # windows: [1112] -> 1, [1222] -> 2, [2200] -> tie 0 vs 2 -> 0
    assert fm.labels.tolist() == [1, 2, 0]


def test_window_count_formula():
    for total, lwin, stride in [(100, 20, 20), (100, 20, 7), (21, 20, 1), (20, 20, 5)]:
        fm = extract_windows(one_path_trace(np.arange(total)), WindowingConfig(lwin, stride))
        assert fm.n_windows == (total - lwin) // stride + 1


def test_trace_shorter_than_window_rejected():
    with pytest.raises(ValueError, match="window"):
        extract_windows(one_path_trace([1.0, 2.0]), WindowingConfig(4))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-90, max_value=-20, allow_nan=False), min_size=4, max_size=24
    )
)
def test_order_statistics_invariants(samples):
    fm = extract_windows(one_path_trace(samples), WindowingConfig(len(samples)))
    mean, var, mx, mn, rng, med, mode, pam = fm.values[0]
    assert mn <= med <= mx
    assert rng == pytest.approx(mx - mn)
    assert var >= 0.0
    assert mode in samples
    assert 0.0 <= pam <= 1.0


def test_normalize_examples():
    out = normalize(FeatureMatrix(np.array([[1.0, 3.0, 5.0]])))
    assert np.allclose(out.values, [[0.0, 0.5, 1.0]])
    out = normalize(FeatureMatrix(np.array([[7.0, 7.0, 7.0]])))
    assert np.allclose(out.values, [[0.0, 0.0, 0.0]])
    out = normalize(FeatureMatrix(np.array([[-60.0, -50.0]])))
    assert np.allclose(out.values, [[0.0, 1.0]])


def test_normalize_preserves_labels_and_sets_flag():
    fm = FeatureMatrix(np.array([[0.0, 2.0], [1.0, 5.0]]), labels=np.array([0, 1]))
    out = normalize(fm)
    assert out.normalized
    assert out.labels.tolist() == [0, 1]
    with pytest.raises(ValueError, match="already"):
        normalize(out)


def test_normalize_empty_rejected():
    with pytest.raises(ValueError):
        normalize(FeatureMatrix(np.empty((0, 3))))


@settings(max_examples=40, deadline=None)
@given(
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=2, max_value=9),
    st.integers(min_value=0, max_value=2**31),
)
def test_normalized_rows_live_in_unit_interval(n_rows, n_cols, seed):
    rng = np.random.default_rng(seed)
    values = rng.normal(0, 10, (n_rows, n_cols))
    out = normalize(FeatureMatrix(values))
    assert (out.values >= 0.0).all() and (out.values <= 1.0).all()
    for i in range(n_rows):
        if values[i].max() > values[i].min():
            assert out.values[i].min() == 0.0
            assert out.values[i].max() == 1.0


def test_column_normalization_clips_with_source_bounds():
    src = FeatureMatrix(np.array([[0.0, 10.0], [4.0, 20.0]]))
    lo, hi = column_bounds(src)
    assert np.allclose(lo, [0.0, 10.0]) and np.allclose(hi, [4.0, 20.0])
    tgt = FeatureMatrix(np.array([[-2.0, 15.0], [6.0, 25.0]]))
    out = normalize_between(tgt, lo, hi)
    assert np.allclose(out.values, [[0.0, 0.5], [1.0, 1.0]])
    degenerate = normalize_between(FeatureMatrix(np.array([[3.0, 7.0]])), np.array([1.0, 7.0]), np.array([1.0, 7.0]))
    assert np.allclose(degenerate.values, [[0.0, 0.0]])


def test_windowing_config_validation():
    assert WindowingConfig(8).stride == 8
    with pytest.raises(ValueError):
        WindowingConfig(1)
    with pytest.raises(ValueError):
        WindowingConfig(4, stride=0)
