import math

import numpy as np
import pytest

from rss_sentinel.simulate import Area, EnvironmentSpec


@pytest.fixture
def single_path_env() -> EnvironmentSpec:
    """One AP at the origin, one MP 10 m away, one area on the segment."""
    return EnvironmentSpec(
        ap_positions=((0.0, 0.0),),
        mp_positions=((10.0, 0.0),),
        areas=(Area((5.0, 0.0), 1.0),),
        tx_power_dbm=-30.0,
        path_loss_exponent=2.0,
        ref_distance_m=1.0,
        shadowing_sigma_db=0.0,
        intrusion_atten_db=8.0,
        intrusion_sigma_db=0.0,
    )


def desk_environment() -> dict:
    """Default desk-scale deployment: 5 APs on a ring, 3 MPs near the center."""
    angles = np.linspace(0.3, 0.3 + 2 * math.pi, 6)[:5]
    return {
        "ap_positions": [
            [round(10 + 8 * math.cos(a), 4), round(6 + 8 * math.sin(a), 4)] for a in angles
        ],
        "mp_positions": [[9.2, 6.0], [10.8, 6.6], [10.2, 5.2]],
        "areas": [
            {"center": [10.57, 2.1], "radius": 2.19},
            {"center": [7.86, 4.43], "radius": 2.02},
            {"center": [12.56, 5.8], "radius": 2.03},
            {"center": [11.58, 4.76], "radius": 1.78},
        ],
        "tx_power_dbm": -30.0,
        "path_loss_exponent": 2.2,
        "ref_distance_m": 1.0,
        "shadowing_sigma_db": 0.7,
        "intrusion_atten_db": 11.0,
        "intrusion_sigma_db": 1.0,
    }


def small_pipeline_doc(seed: int = 42, windows_per_state: int = 12) -> dict:
    """A quick pipeline config document for functional tests."""
    return {
        "environment": desk_environment(),
        "windowing": {"window_len": 20},
        "fusion": {"fused_dim": 12, "train": {"epochs": 15}},
        "transfer": {"lambda": 0.1, "n_components": 4},
        "iteration": {"max_iterations": 3},
        "shift": {"offset_db": -4.0, "extra_sigma_db": 1.5},
        "windows_per_state": windows_per_state,
        "seeds": {
            "sim_offline": seed,
            "sim_online": seed + 1,
            "fusion": seed + 2,
            "classifier": seed + 3,
        },
    }
