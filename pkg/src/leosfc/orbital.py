"""Walker Delta constellation geometry on circular two-body orbits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

MU_EARTH = 398600.4418  # km^3/s^2
EARTH_RADIUS = 6371.0  # km
LIGHT_SPEED = 299792.458  # km/s


@dataclass(frozen=True)
class ConstellationConfig:
    """Walker Delta T/P/F constellation plus the simulation time grid.

    ``horizon=None`` means one orbital period.  ``v_threshold`` is the
    inter-plane relative-speed gate in km/s; ``inf`` disables it.
    """

    planes: int = 6
    per_plane: int = 10
    phasing: int = 1
    altitude: float = 550.0
    inclination: float = math.radians(53.0)
    earth_radius: float = EARTH_RADIUS
    mu_earth: float = MU_EARTH
    light_speed: float = LIGHT_SPEED
    occlusion_margin: float = 80.0
    v_threshold: float = math.inf
    dt: float = 10.0
    horizon: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.planes < 1 or self.per_plane < 1:
            raise ValueError("planes and per_plane must be positive")
        if not 0 <= self.phasing < max(self.planes, 1):
            raise ValueError(f"phasing must satisfy 0 <= F < P, got F={self.phasing}")
        if self.altitude <= 0:
            raise ValueError("altitude must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon is not None and self.horizon < self.dt:
            raise ValueError("horizon must be >= dt")
        if self.v_threshold < 0:
            raise ValueError("v_threshold must be nonnegative")

    @property
    def total_sats(self) -> int:
        return self.planes * self.per_plane

    @property
    def semi_major_axis(self) -> float:
        return self.earth_radius + self.altitude

    @property
    def period(self) -> float:
        return orbital_period(self)

    @property
    def sim_horizon(self) -> float:
        return self.period if self.horizon is None else float(self.horizon)

    @property
    def n_slots(self) -> int:
        # tolerance absorbs horizon/dt landing a hair below an integer
        return int(math.floor(self.sim_horizon / self.dt + 1e-9)) + 1

    def times(self) -> np.ndarray:
        return np.arange(self.n_slots) * self.dt


class SatelliteId(NamedTuple):
    plane: int
    slot: int

    def flat(self, per_plane: int) -> int:
        return self.plane * per_plane + self.slot

    @classmethod
    def from_flat(cls, flat: int, per_plane: int) -> "SatelliteId":
        return cls(*divmod(int(flat), per_plane))


class StateVector(NamedTuple):
    position: np.ndarray  # km, Earth-centered inertial
    velocity: np.ndarray  # km/s


def orbital_period(cfg: ConstellationConfig) -> float:
    a = cfg.earth_radius + cfg.altitude
    return 2.0 * math.pi * math.sqrt(a**3 / cfg.mu_earth)


def _angles(cfg: ConstellationConfig, planes, slots, t):
    n = 2.0 * math.pi / orbital_period(cfg)
    raan = 2.0 * math.pi * planes / cfg.planes
    u = (
        2.0 * math.pi * slots / cfg.per_plane
        + 2.0 * math.pi * cfg.phasing * planes / cfg.total_sats
        + n * t
    )
    return raan, u, n


def _kepler_frame(cfg, raan, u, n):
    a = cfg.semi_major_axis
    ci, si = math.cos(cfg.inclination), math.sin(cfg.inclination)
    cO, sO = np.cos(raan), np.sin(raan)
    cu, su = np.cos(u), np.sin(u)
    pos = a * np.stack([cO * cu - sO * su * ci, sO * cu + cO * su * ci, su * si], axis=-1)
    # d/du of the position, times du/dt = n
    vel = (a * n) * np.stack([-cO * su - sO * cu * ci, -sO * su + cO * cu * ci, cu * si], axis=-1)
    return pos, vel


def propagate(cfg: ConstellationConfig, sat: SatelliteId, t: float) -> StateVector:
    if t < 0:
        raise ValueError("t must be nonnegative")
    raan, u, n = _angles(cfg, sat.plane, sat.slot, t)
    pos, vel = _kepler_frame(cfg, np.asarray(raan), np.asarray(u), n)
    return StateVector(pos, vel)


def propagate_all(cfg: ConstellationConfig, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Positions and velocities of every satellite, rows in flat-id order."""
    flat = np.arange(cfg.total_sats)
    planes, slots = np.divmod(flat, cfg.per_plane)
    raan, u, n = _angles(cfg, planes, slots, t)
    return _kepler_frame(cfg, raan, u, n)


def relative_speed(a: StateVector, b: StateVector) -> float:
    return float(np.linalg.norm(np.asarray(a.velocity) - np.asarray(b.velocity)))
