import numpy as np
import pytest

from rss_sentinel.simulate import (
    Area,
    DomainShift,
    EnvironmentSpec,
    simulate_schedule,
    simulate_trace,
)


def test_silence_matches_closed_form(single_path_env):
    # tx - 10*2*log10(10/1) = -30 - 20 = -50 dBm, no noise terms
    trace = simulate_trace(single_path_env, state=0, duration_s=5, seed=1)
    assert np.allclose(trace.rss, -50.0)


def test_offset_shift_is_additive(single_path_env):
    trace = simulate_trace(
        single_path_env, 0, 5, shift=DomainShift(offset_db=-5.0), seed=1
    )
    assert np.allclose(trace.rss, -55.0)


def test_intrusion_attenuation(single_path_env):
    trace = simulate_trace(single_path_env, state=1, duration_s=5, seed=1)
    assert np.allclose(trace.rss, -58.0)


def test_unaffected_path_ignores_intrusion():
    # area far away from the segment: zero-noise rss identical to silence
    env = EnvironmentSpec(
        ap_positions=((0.0, 0.0),),
        mp_positions=((10.0, 0.0),),
        areas=(Area((5.0, 8.0), 1.0),),
        shadowing_sigma_db=0.0,
        intrusion_sigma_db=0.0,
    )
    silent = simulate_trace(env, 0, 4, seed=3)
    intruded = simulate_trace(env, 1, 4, seed=3)
    assert np.array_equal(silent.rss, intruded.rss)


def test_determinism_bitwise(single_path_env):
    shift = DomainShift(offset_db=-2.0, extra_sigma_db=0.7)
    env = EnvironmentSpec(
        ap_positions=((0.0, 0.0), (3.0, 4.0)),
        mp_positions=((10.0, 0.0),),
        areas=(Area((5.0, 0.0), 1.0),),
        shadowing_sigma_db=1.3,
        intrusion_sigma_db=0.4,
    )
    a = simulate_trace(env, 1, 50, shift, seed=99)
    b = simulate_trace(env, 1, 50, shift, seed=99)
    assert np.array_equal(a.rss, b.rss)
    assert np.array_equal(a.states, b.states)


def test_schedule_concatenates_states(single_path_env):
    trace = simulate_schedule(single_path_env, [(0, 10), (1, 10)], seed=5)
    assert trace.duration_s == 20
    assert (trace.states[:10] == 0).all() and (trace.states[10:] == 1).all()
    assert np.array_equal(trace.timestamps, np.arange(20))


def test_single_segment_schedule_equals_trace(single_path_env):
    sched = simulate_schedule(single_path_env, [(0, 5)], seed=7)
    single = simulate_trace(single_path_env, 0, 5, seed=7)
    assert np.array_equal(sched.rss, single.rss)


def test_schedule_determinism(single_path_env):
    a = simulate_schedule(single_path_env, [(0, 4), (1, 3), (0, 2)], seed=11)
    b = simulate_schedule(single_path_env, [(0, 4), (1, 3), (0, 2)], seed=11)
    assert np.array_equal(a.rss, b.rss)


def test_path_count_is_product():
    env = EnvironmentSpec(
        ap_positions=((0.0, 0.0), (5.0, 0.0), (0.0, 5.0)),
        mp_positions=((1.0, 1.0), (4.0, 4.0)),
        areas=(Area((2.0, 2.0), 1.0),),
    )
    assert env.n_paths == 6
    assert env.n_states == 2
    trace = simulate_trace(env, 0, 3, seed=0)
    assert trace.rss.shape == (3, 6)


def test_environment_roundtrip():
    env = EnvironmentSpec(
        ap_positions=((0.0, 1.0),),
        mp_positions=((2.0, 3.0),),
        areas=(Area((1.0, 2.0), 0.5),),
        tx_power_dbm=-20.0,
        path_loss_exponent=2.5,
    )
    again = EnvironmentSpec.from_dict(env.to_dict())
    assert again == env


@pytest.mark.parametrize(
    "kwargs, match",
    [
        (dict(state=2, duration_s=5), "state"),
        (dict(state=0, duration_s=0), "duration"),
    ],
)
def test_simulate_trace_rejects_bad_args(single_path_env, kwargs, match):
    with pytest.raises(ValueError, match=match):
        simulate_trace(single_path_env, seed=0, **kwargs)


def test_schedule_rejects_empty(single_path_env):
    with pytest.raises(ValueError):
        simulate_schedule(single_path_env, [], seed=0)


def test_environment_validation():
    with pytest.raises(ValueError, match="AP"):
        EnvironmentSpec(ap_positions=(), mp_positions=((1.0, 1.0),), areas=())
    with pytest.raises(ValueError, match="coincide"):
        EnvironmentSpec(
            ap_positions=((1.0, 1.0),), mp_positions=((1.0, 1.0),), areas=()
        )
    with pytest.raises(ValueError, match="radius"):
        Area((0.0, 0.0), 0.0)
    with pytest.raises(ValueError):
        DomainShift(extra_sigma_db=-1.0)
