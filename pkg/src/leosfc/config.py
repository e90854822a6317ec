"""Experiment configuration: YAML files, built-in profiles, hashing."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .orbital import EARTH_RADIUS, LIGHT_SPEED, MU_EARTH, ConstellationConfig
from .router import ALGORITHMS


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


DEFAULTS: dict = {
    "constellation": {
        "planes": 6,
        "per_plane": 10,
        "phasing": 1,
        "altitude_km": 550.0,
        "inclination_deg": 53.0,
        "earth_radius_km": EARTH_RADIUS,
        "mu_km3_s2": MU_EARTH,
        "light_speed_km_s": LIGHT_SPEED,
        "occlusion_margin_km": 80.0,
        "v_threshold_km_s": None,  # unbounded
        "dt_s": 10.0,
        "horizon_s": None,  # one orbital period
        "rng_seed": 0,
    },
    "scenario": {"seed": 0, "catalog_size": 60},
    "benchmark": {
        "chain_lengths": [5, 10, 15, 20, 25],
        "requests": 300,
        "algorithms": list(ALGORITHMS),
        "teg_window_s": 10.0,
        "seed": 0,
    },
    "stability": {"chain_lengths": [1, 2, 5, 10, 20], "n_paths": 500, "seed": 0},
}

PROFILES: dict[str, dict] = {
    "desk": {},
    "paper": {
        "constellation": {"planes": 12, "per_plane": 30, "dt_s": 1.0},
        "benchmark": {"algorithms": [a for a in ALGORITHMS if a != "teg"]},
    },
}


def _merge(base: dict, override: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        path = f"{where}.{key}" if where else key
        if key not in base:
            raise ConfigError(f"{path}: unknown field")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: expected a mapping")
            out[key] = _merge(base[key], value, path)
        else:
            out[key] = value
    return out


def constellation_from(section: dict) -> ConstellationConfig:
    def num(key, cast=float, positive=False, allow_none=False):
        value = section[key]
        if value is None and allow_none:
            return None
        try:
            value = cast(value)
        except (TypeError, ValueError):
            raise ConfigError(f"constellation.{key}: expected a number, got {section[key]!r}") from None
        if positive and not value > 0:
            raise ConfigError(f"constellation.{key}: must be > 0")
        return value

    planes = num("planes", int, positive=True)
    phasing = num("phasing", int)
    if not 0 <= phasing < planes:
        raise ConfigError(f"constellation.phasing: must satisfy 0 <= F < planes ({planes})")
    dt = num("dt_s", positive=True)
    horizon = num("horizon_s", allow_none=True)
    if horizon is not None and horizon < dt:
        raise ConfigError("constellation.horizon_s: must be >= dt_s")
    v_th = num("v_threshold_km_s", allow_none=True)
    if v_th is not None and v_th < 0:
        raise ConfigError("constellation.v_threshold_km_s: must be >= 0")
    return ConstellationConfig(
        planes=planes,
        per_plane=num("per_plane", int, positive=True),
        phasing=phasing,
        altitude=num("altitude_km", positive=True),
        inclination=math.radians(num("inclination_deg")),
        earth_radius=num("earth_radius_km", positive=True),
        mu_earth=num("mu_km3_s2", positive=True),
        light_speed=num("light_speed_km_s", positive=True),
        occlusion_margin=num("occlusion_margin_km"),
        v_threshold=math.inf if v_th is None else v_th,
        dt=dt,
        horizon=horizon,
        rng_seed=num("rng_seed", int),
    )


def config_hash(cfg: ConstellationConfig) -> str:
    """SHA-256 prefix of the canonical JSON form of a constellation."""
    fields = {k: float(v) if isinstance(v, (int, float)) else v for k, v in asdict(cfg).items()}
    canon = json.dumps(fields, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass
class ExperimentSpec:
    constellation: ConstellationConfig
    raw: dict
    out_dir: Path = Path("out")
    workers: int = 1
    timing: bool = False

    scenario_seed: int = 0
    catalog_size: int = 60
    chain_lengths: list[int] = field(default_factory=list)
    requests: int = 300
    algorithms: list[str] = field(default_factory=list)
    teg_window: float | None = 10.0
    benchmark_seed: int = 0
    t0_rule: str = "uniform-grid"

    stability_lengths: list[int] = field(default_factory=list)
    n_paths: int = 500
    stability_seed: int = 0

    @property
    def hash(self) -> str:
        return config_hash(self.constellation)


def load_spec(profile: str = "desk", path: str | Path | None = None, overrides: dict | None = None,
              out_dir: str | Path = "out", workers: int = 1, timing: bool = False) -> ExperimentSpec:
    if profile not in PROFILES:
        raise ConfigError(f"profile: unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    raw = _merge(DEFAULTS, PROFILES[profile])
    if path is not None:
        try:
            loaded = yaml.safe_load(Path(path).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        raw = _merge(raw, loaded)
    raw = _merge(raw, overrides or {})

    cfg = constellation_from(raw["constellation"])
    bench, stab, scen = raw["benchmark"], raw["stability"], raw["scenario"]
    for name in bench["algorithms"]:
        if name not in ALGORITHMS:
            raise ConfigError(f"benchmark.algorithms: unknown algorithm {name!r}")
    if int(bench["requests"]) < 1:
        raise ConfigError("benchmark.requests: must be >= 1")
    for where, lengths in (("benchmark", bench["chain_lengths"]), ("stability", stab["chain_lengths"])):
        if any(int(m) < 0 for m in lengths):
            raise ConfigError(f"{where}.chain_lengths: values must be >= 0")
    if int(scen["catalog_size"]) < 1:
        raise ConfigError("scenario.catalog_size: must be >= 1")
    if int(stab["n_paths"]) < 0:
        raise ConfigError("stability.n_paths: must be >= 0")
    window = bench["teg_window_s"]

    return ExperimentSpec(
        constellation=cfg,
        raw=raw,
        out_dir=Path(out_dir),
        workers=max(int(workers), 1),
        timing=timing,
        scenario_seed=int(scen["seed"]),
        catalog_size=int(scen["catalog_size"]),
        chain_lengths=[int(m) for m in bench["chain_lengths"]],
        requests=int(bench["requests"]),
        algorithms=list(bench["algorithms"]),
        teg_window=None if window is None else float(window),
        benchmark_seed=int(bench["seed"]),
        stability_lengths=[int(m) for m in stab["chain_lengths"]],
        n_paths=int(stab["n_paths"]),
        stability_seed=int(stab["seed"]),
    )


def dump_defaults(profile: str = "desk") -> str:
    return yaml.safe_dump(_merge(DEFAULTS, PROFILES[profile]), sort_keys=False)
