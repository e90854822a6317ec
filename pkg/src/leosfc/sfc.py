"""VNF catalogs, satellite deployments, SFC requests and realized end-to-end delay."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .orbital import ConstellationConfig

DEFAULT_DATA_BITS = 8e6


class InfeasibleRequest(Exception):
    """No valid satellite assignment exists (or a given path violates hosting)."""

    def __init__(self, message: str, stage: int | None = None):
        super().__init__(message)
        self.stage = stage


@dataclass(frozen=True)
class VnfSpec:
    id: int
    complexity: float  # GFLOPs
    d_in: float = DEFAULT_DATA_BITS  # bits; carried only, never enters a delay
    d_out: float = DEFAULT_DATA_BITS


@dataclass(frozen=True)
class SatelliteCompute:
    capacity: float  # GFLOPs/s
    hosted: frozenset[int] = frozenset()


@dataclass(frozen=True)
class Scenario:
    catalog: tuple[VnfSpec, ...]
    compute: tuple[SatelliteCompute, ...]  # indexed by flat satellite id
    seed: int = 0
    config_hash: str = ""
    _hosts: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        hosts: dict[int, list[int]] = {f.id: [] for f in self.catalog}
        for s, sat in enumerate(self.compute):
            for f in sat.hosted:
                hosts[f].append(s)
        object.__setattr__(self, "_hosts", {f: tuple(sorted(v)) for f, v in hosts.items()})

    @property
    def n_sats(self) -> int:
        return len(self.compute)

    def hosts(self, f: int) -> tuple[int, ...]:
        return self._hosts[f]

    def deployed_vnfs(self) -> list[int]:
        return [f for f, h in self._hosts.items() if h]

    def cp(self, s: int, f: int) -> float:
        return compute_delay(self.compute[s], self.catalog[f])

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "config_hash": self.config_hash,
                "catalog": [
                    {"id": f.id, "complexity_gflop": f.complexity, "d_in_bits": f.d_in, "d_out_bits": f.d_out}
                    for f in self.catalog
                ],
                "satellites": [
                    {"id": s, "capacity_gflops": c.capacity, "hosted": sorted(c.hosted)}
                    for s, c in enumerate(self.compute)
                ],
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        d = json.loads(text)
        catalog = tuple(
            VnfSpec(f["id"], f["complexity_gflop"], f["d_in_bits"], f["d_out_bits"]) for f in d["catalog"]
        )
        compute = tuple(
            SatelliteCompute(s["capacity_gflops"], frozenset(s["hosted"]))
            for s in sorted(d["satellites"], key=lambda s: s["id"])
        )
        return cls(catalog, compute, d.get("seed", 0), d.get("config_hash", ""))


@dataclass(frozen=True)
class SfcRequest:
    src: int
    dst: int
    chain: tuple[int, ...] = ()

    @property
    def M(self) -> int:
        return len(self.chain)

    def validate(self, scenario: Scenario) -> None:
        n = scenario.n_sats
        if not (0 <= self.src < n and 0 <= self.dst < n):
            raise ValueError(f"satellite id out of range [0, {n})")
        for f in self.chain:
            if not 0 <= f < len(scenario.catalog):
                raise ValueError(f"unknown vnf id {f}")

    def to_json(self) -> str:
        return json.dumps({"src": self.src, "dst": self.dst, "chain": list(self.chain)})

    @classmethod
    def from_dict(cls, d: dict) -> "SfcRequest":
        return cls(int(d["src"]), int(d["dst"]), tuple(int(f) for f in d.get("chain", ())))


@dataclass(frozen=True)
class RouteResult:
    path: tuple[int, ...]
    estimated: float
    realized: float
    breakdown: tuple[tuple[float, float], ...]  # per hop (tx, cp at the receiving satellite)
    algorithm: str = ""

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "path": list(self.path),
            "estimated_s": self.estimated,
            "realized_s": self.realized,
            "breakdown": [{"tx_s": tx, "cp_s": cp} for tx, cp in self.breakdown],
        }


def generate_scenario(cfg: ConstellationConfig, catalog_size: int = 60, seed: int = 0,
                      config_hash: str = "") -> Scenario:
    if catalog_size < 1:
        raise ValueError("catalog_size must be >= 1")
    rng = np.random.default_rng(seed)
    complexity = rng.uniform(1.0, 5.0, size=catalog_size)
    catalog = tuple(VnfSpec(i, float(c)) for i, c in enumerate(complexity))
    compute = []
    for _ in range(cfg.total_sats):
        capacity = float(rng.uniform(1.0, 2.0))
        # np.rint rounds half to even
        n_hosted = int(np.clip(np.rint(rng.normal(3.0, 0.75)), 0, catalog_size))
        hosted = rng.choice(catalog_size, size=n_hosted, replace=False)
        compute.append(SatelliteCompute(capacity, frozenset(int(f) for f in hosted)))
    return Scenario(catalog, tuple(compute), seed, config_hash)


def compute_delay(s: SatelliteCompute, f: VnfSpec) -> float:
    if f.id not in s.hosted:
        raise InfeasibleRequest(f"vnf {f.id} is not hosted on this satellite")
    return f.complexity / s.capacity


def check_feasible(scenario: Scenario, path: Sequence[int], request: SfcRequest) -> None:
    M = request.M
    if len(path) != M + 2:
        raise InfeasibleRequest(f"path length {len(path)} != M + 2 = {M + 2}")
    if path[0] != request.src or path[-1] != request.dst:
        raise InfeasibleRequest("path endpoints do not match the request")
    for k, f in enumerate(request.chain, start=1):
        if f not in scenario.compute[path[k]].hosted:
            raise InfeasibleRequest(f"stage {k}: satellite {path[k]} does not host vnf {f}", stage=k)


def hop_delay(tensor, u: int, v: int, t: float) -> float:
    if u == v:
        return 0.0
    return tensor.delay(u, v, tensor.slot_of(t))


def realized_delay(tensor, scenario: Scenario, path: Sequence[int], request: SfcRequest,
                   t0: float, algorithm: str = "", estimated: float = float("nan")) -> RouteResult:
    """Delay of a fixed route with each hop read at its own departure slot.

    Elapsed time is accumulated hop by hop; the shortest-path delay of hop
    ``k`` is taken from the slot at or before ``t0 + elapsed`` and held for
    the whole hop.
    """
    check_feasible(scenario, path, request)
    elapsed = 0.0
    breakdown = []
    for k in range(request.M + 1):
        u, v = path[k], path[k + 1]
        tx = hop_delay(tensor, u, v, t0 + elapsed)
        elapsed += tx
        cp = 0.0
        if k < request.M:
            cp = scenario.cp(v, request.chain[k])
            elapsed += cp
        breakdown.append((tx, cp))
    return RouteResult(tuple(int(s) for s in path), estimated, elapsed, tuple(breakdown), algorithm)


def read_requests(text: str) -> list[SfcRequest]:
    return [SfcRequest.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
