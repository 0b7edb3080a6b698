"""Synthetic RSS trace generation for device-free intrusion scenarios.

Each access point (AP) to monitor point (MP) link is one propagation path;
with M APs and N MPs there are p = M * N paths.  The received power on a
path follows a log-distance model with log-normal shadowing.  A person
standing in an intrusion area adds a constant attenuation plus extra
Gaussian spread to every path whose AP-MP segment passes through the area.
Stage-to-stage drift ("offline" vs "online" collection) is modelled as a
global dBm offset plus added noise variance.

All randomness is seeded: each path gets an independent child stream of the
trace seed, so traces are reproducible sample-for-sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Area",
    "DomainShift",
    "EnvironmentSpec",
    "RssTrace",
    "NO_SHIFT",
    "simulate_trace",
    "simulate_schedule",
]


@dataclass(frozen=True)
class Area:
    """Circular intrusion area: centroid (meters) and radius (meters)."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"area radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class DomainShift:
    """Global drift between collection stages: dBm offset plus extra noise."""

    offset_db: float = 0.0
    extra_sigma_db: float = 0.0

    def __post_init__(self) -> None:
        if self.extra_sigma_db < 0:
            raise ValueError("extra_sigma_db must be >= 0")


NO_SHIFT = DomainShift()


@dataclass(frozen=True)
class EnvironmentSpec:
    """Static deployment geometry and propagation constants.

    State 0 is silence; state k (1..K-1) means a person inside areas[k-1].
    """

    ap_positions: tuple[tuple[float, float], ...]
    mp_positions: tuple[tuple[float, float], ...]
    areas: tuple[Area, ...]
    tx_power_dbm: float = -30.0
    path_loss_exponent: float = 2.0
    ref_distance_m: float = 1.0
    shadowing_sigma_db: float = 1.0
    intrusion_atten_db: float = 6.0
    intrusion_sigma_db: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "ap_positions", tuple(tuple(map(float, a)) for a in self.ap_positions)
        )
        object.__setattr__(
            self, "mp_positions", tuple(tuple(map(float, m)) for m in self.mp_positions)
        )
        object.__setattr__(
            self,
            "areas",
            tuple(a if isinstance(a, Area) else Area(tuple(a[0]), a[1]) for a in self.areas),
        )
        if not self.ap_positions:
            raise ValueError("environment needs at least one AP")
        if not self.mp_positions:
            raise ValueError("environment needs at least one MP")
        if self.path_loss_exponent < 1:
            raise ValueError("path_loss_exponent must be >= 1")
        if not self.ref_distance_m > 0:
            raise ValueError("ref_distance_m must be > 0")
        if self.shadowing_sigma_db < 0 or self.intrusion_sigma_db < 0:
            raise ValueError("noise sigmas must be >= 0")
        for ap in self.ap_positions:
            for mp in self.mp_positions:
                if math.dist(ap, mp) <= 0:
                    raise ValueError(f"AP {ap} and MP {mp} coincide; paths need positive length")

    @property
    def n_paths(self) -> int:
        return len(self.ap_positions) * len(self.mp_positions)

    @property
    def n_states(self) -> int:
        return 1 + len(self.areas)

    def path_endpoints(self, path_id: int) -> tuple[tuple[float, float], tuple[float, float]]:
        """(AP, MP) coordinates of a path; path_id = ap_index * N + mp_index."""
        n_mp = len(self.mp_positions)
        return self.ap_positions[path_id // n_mp], self.mp_positions[path_id % n_mp]

    def path_distances(self) -> np.ndarray:
        """AP-MP Euclidean distance per path, shape (n_paths,)."""
        return np.array(
            [math.dist(*self.path_endpoints(j)) for j in range(self.n_paths)]
        )

    def paths_through(self, state: int) -> np.ndarray:
        """Boolean mask of paths whose segment crosses the state's area."""
        mask = np.zeros(self.n_paths, dtype=bool)
        if state == 0:
            return mask
        area = self.areas[state - 1]
        for j in range(self.n_paths):
            ap, mp = self.path_endpoints(j)
            if _point_segment_distance(area.center, ap, mp) <= area.radius:
                mask[j] = True
        return mask

    def to_dict(self) -> dict:
        return {
            "ap_positions": [list(a) for a in self.ap_positions],
            "mp_positions": [list(m) for m in self.mp_positions],
            "areas": [{"center": list(a.center), "radius": a.radius} for a in self.areas],
            "tx_power_dbm": self.tx_power_dbm,
            "path_loss_exponent": self.path_loss_exponent,
            "ref_distance_m": self.ref_distance_m,
            "shadowing_sigma_db": self.shadowing_sigma_db,
            "intrusion_atten_db": self.intrusion_atten_db,
            "intrusion_sigma_db": self.intrusion_sigma_db,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EnvironmentSpec":
        areas = tuple(
            Area(tuple(a["center"]), float(a["radius"])) if isinstance(a, dict) else Area(tuple(a[0]), float(a[1]))
            for a in doc.get("areas", ())
        )
        return cls(
            ap_positions=tuple(tuple(p) for p in doc["ap_positions"]),
            mp_positions=tuple(tuple(p) for p in doc["mp_positions"]),
            areas=areas,
            tx_power_dbm=float(doc.get("tx_power_dbm", -30.0)),
            path_loss_exponent=float(doc.get("path_loss_exponent", 2.0)),
            ref_distance_m=float(doc.get("ref_distance_m", 1.0)),
            shadowing_sigma_db=float(doc.get("shadowing_sigma_db", 1.0)),
            intrusion_atten_db=float(doc.get("intrusion_atten_db", 6.0)),
            intrusion_sigma_db=float(doc.get("intrusion_sigma_db", 1.0)),
        )


@dataclass
class RssTrace:
    """Per-second RSS readings for every path, plus the true state timeline.

    Stored dense: ``rss[t, j]`` is the dBm reading of path ``j`` at second
    ``start_s + t``.  Every (timestamp, path) pair therefore appears exactly
    once and all paths share the same timestamp grid.
    """

    rss: np.ndarray  # (duration_s, n_paths) float64
    states: np.ndarray  # (duration_s,) int64, true state per second
    start_s: int = 0
    sample_rate_hz: float = 1.0

    def __post_init__(self) -> None:
        self.rss = np.asarray(self.rss, dtype=np.float64)
        self.states = np.asarray(self.states, dtype=np.int64)
        if self.rss.ndim != 2:
            raise ValueError("rss must be a (duration, n_paths) matrix")
        if len(self.states) != len(self.rss):
            raise ValueError("states length must match trace duration")

    @property
    def duration_s(self) -> int:
        return self.rss.shape[0]

    @property
    def n_paths(self) -> int:
        return self.rss.shape[1]

    @property
    def timestamps(self) -> np.ndarray:
        return self.start_s + np.arange(self.duration_s, dtype=np.int64)


def _point_segment_distance(point, seg_a, seg_b) -> float:
    """Minimum Euclidean distance from a point to the segment [seg_a, seg_b]."""
    p = np.asarray(point, dtype=float)
    a = np.asarray(seg_a, dtype=float)
    b = np.asarray(seg_b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.linalg.norm(p - (a + t * ab)))


def _path_rngs(seed: int, n_paths: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(n_paths)
    return [np.random.default_rng(c) for c in children]


def simulate_trace(
    env: EnvironmentSpec,
    state: int,
    duration_s: int,
    shift: DomainShift = NO_SHIFT,
    seed: int = 0,
    start_s: int = 0,
) -> RssTrace:
    """Simulate a constant-state segment at 1 Hz.

    Per path j and second t:
    rss = tx - 10*eta*log10(d_j/d0) + offset + N(0, sigma_sh^2 + extra^2)
          - [atten + N(0, sigma_intr^2)]   if the path crosses the active area.
    """
    if not 0 <= state < env.n_states:
        raise ValueError(f"state must be in 0..{env.n_states - 1}, got {state}")
    if duration_s < 1:
        raise ValueError(f"duration_s must be >= 1, got {duration_s}")

    base = env.tx_power_dbm - 10.0 * env.path_loss_exponent * np.log10(
        env.path_distances() / env.ref_distance_m
    )
    base = base + shift.offset_db
    sigma = math.hypot(env.shadowing_sigma_db, shift.extra_sigma_db)
    affected = env.paths_through(state)

    rss = np.empty((duration_s, env.n_paths))
    for j, rng in enumerate(_path_rngs(seed, env.n_paths)):
        col = base[j] + rng.normal(0.0, sigma, duration_s)
        if affected[j]:
            col -= env.intrusion_atten_db + rng.normal(0.0, env.intrusion_sigma_db, duration_s)
        rss[:, j] = col

    states = np.full(duration_s, state, dtype=np.int64)
    return RssTrace(rss=rss, states=states, start_s=start_s)


def simulate_schedule(
    env: EnvironmentSpec,
    schedule: list[tuple[int, int]],
    shift: DomainShift = NO_SHIFT,
    seed: int = 0,
) -> RssTrace:
    """Concatenate constant-state segments with a continuous timestamp grid.

    Segment i is generated with seed ``seed + i``, so a single-segment
    schedule reproduces ``simulate_trace`` with the same seed exactly.
    """
    if not schedule:
        raise ValueError("schedule must contain at least one (state, duration) pair")
    pieces = []
    t0 = 0
    for i, (state, duration) in enumerate(schedule):
        seg = simulate_trace(env, state, duration, shift, seed=seed + i, start_s=t0)
        pieces.append(seg)
        t0 += duration
    return RssTrace(
        rss=np.vstack([p.rss for p in pieces]),
        states=np.concatenate([p.states for p in pieces]),
        start_s=0,
    )
