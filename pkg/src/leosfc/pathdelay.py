"""All-pairs shortest-path propagation delays over a snapshot series.

Two storage strategies share one lookup surface (``slot_of``, ``matrix``,
``delay``): :class:`DelayTensor` keeps every slot in memory, while
:class:`LazyDelayTensor` recomputes slots on demand for constellations where
the full tensor does not fit.  Time averages are produced either from a
materialized tensor or by streaming chunks through :class:`Moments`.
"""

from __future__ import annotations

import heapq
import math
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .orbital import ConstellationConfig
from .topology import SnapshotGraph, build_snapshot


def single_source_delays(g: SnapshotGraph, src: int) -> np.ndarray:
    """Dijkstra from ``src``; unreachable satellites get ``inf``."""
    dist = np.full(g.n_nodes, np.inf)
    dist[src] = 0.0
    adj = g.adjacency()
    heap = [(0.0, src)]
    done = np.zeros(g.n_nodes, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def all_pairs_delays(g: SnapshotGraph) -> np.ndarray:
    if len(g) == 0:
        out = np.full((g.n_nodes, g.n_nodes), np.inf)
        np.fill_diagonal(out, 0.0)
        return out
    d = dijkstra(g.to_csr(), directed=False)
    # the two directions sum the same links in different orders
    return np.minimum(d, d.T)


def _slot_index(t: float, dt: float, horizon: float, n_slots: int) -> int:
    tw = math.fmod(t, horizon)
    if tw < 0:
        tw += horizon
    k = int(math.floor(tw / dt + 1e-9))
    return min(k, n_slots - 1)


@dataclass(frozen=True, eq=False)
class DelayTensor:
    """Shortest-path delays, ``delays[u, v, k]`` in seconds at ``times[k]``.

    ``horizon`` is the wrap period for :meth:`slot_of`.
    """

    times: np.ndarray
    delays: np.ndarray
    dt: float
    horizon: float

    @property
    def n_nodes(self) -> int:
        return self.delays.shape[0]

    @property
    def n_slots(self) -> int:
        return self.delays.shape[2]

    def slot_of(self, t: float) -> int:
        return _slot_index(t, self.dt, self.horizon, self.n_slots)

    def matrix(self, k: int) -> np.ndarray:
        return self.delays[:, :, k]

    def delay(self, u: int, v: int, k: int) -> float:
        return float(self.delays[u, v, k])

    def series(self, u: int, v: int) -> np.ndarray:
        return self.delays[u, v, :]

    @cached_property
    def max_range(self) -> float:
        """Largest max-minus-min of any pair's delay series."""
        return float(np.max(self.delays.max(axis=2) - self.delays.min(axis=2)))

    def scaled(self, factor: float) -> "DelayTensor":
        return DelayTensor(self.times, self.delays * factor, self.dt, self.horizon)


class LazyDelayTensor:
    """Same lookups as :class:`DelayTensor`, computing slots on demand."""

    def __init__(self, cfg: ConstellationConfig, cache_slots: int = 64):
        self.cfg = cfg
        self.dt = cfg.dt
        self.horizon = cfg.sim_horizon
        self.n_slots = cfg.n_slots
        self.n_nodes = cfg.total_sats
        self.times = cfg.times()
        self._cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self._cache_slots = cache_slots

    def slot_of(self, t: float) -> int:
        return _slot_index(t, self.dt, self.horizon, self.n_slots)

    def matrix(self, k: int) -> np.ndarray:
        if k in self._cache:
            self._cache.move_to_end(k)
            return self._cache[k]
        m = all_pairs_delays(build_snapshot(self.cfg, float(self.times[k])))
        self._cache[k] = m
        if len(self._cache) > self._cache_slots:
            self._cache.popitem(last=False)
        return m

    def delay(self, u: int, v: int, k: int) -> float:
        return float(self.matrix(k)[u, v])

    @cached_property
    def max_range(self) -> float:
        # only needed for exact label pruning; a full pass is the price
        lo = np.full((self.n_nodes, self.n_nodes), np.inf)
        hi = np.zeros((self.n_nodes, self.n_nodes))
        for k in range(self.n_slots):
            m = all_pairs_delays(build_snapshot(self.cfg, float(self.times[k])))
            np.minimum(lo, m, out=lo)
            np.maximum(hi, m, out=hi)
        return float(np.max(hi - lo))


def build_tensor(series: Sequence[SnapshotGraph], horizon: float | None = None) -> DelayTensor:
    if not series:
        raise ValueError("empty snapshot series")
    times = np.array([g.t for g in series])
    dt = float(times[1] - times[0]) if len(times) > 1 else 1.0
    if horizon is None:
        horizon = float(times[-1] + dt)
    delays = np.stack([all_pairs_delays(g) for g in series], axis=2)
    return DelayTensor(times, delays, dt, float(horizon))


def tensor_for(cfg: ConstellationConfig) -> DelayTensor:
    from .topology import snapshot_series

    return build_tensor(snapshot_series(cfg), horizon=cfg.sim_horizon)


@dataclass(frozen=True, eq=False)
class AvgDelayMatrix:
    """Per-pair time mean and population std over the slots where the pair is connected."""

    mean: np.ndarray
    std: np.ndarray
    coverage: np.ndarray
    config_hash: str = ""

    @property
    def n_nodes(self) -> int:
        return self.mean.shape[0]

    def complete(self) -> bool:
        return bool(np.all(self.coverage == 1.0))


class Moments:
    """Per-pair count/mean/M2 over finite samples, mergeable in a fixed order."""

    def __init__(self, n: int):
        self.count = np.zeros((n, n))
        self.mean = np.zeros((n, n))
        self.m2 = np.zeros((n, n))
        self.total = 0

    @classmethod
    def from_block(cls, block: np.ndarray) -> "Moments":
        """Moments of a ``(slots, n, n)`` block."""
        m = cls(block.shape[1])
        finite = np.isfinite(block)
        m.count = finite.sum(axis=0).astype(float)
        vals = np.where(finite, block, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = np.where(m.count > 0, vals.sum(axis=0) / m.count, 0.0)
        dev = np.where(finite, block - mean, 0.0)
        m.mean = mean
        m.m2 = (dev * dev).sum(axis=0)
        m.total = block.shape[0]
        return m

    def merge(self, other: "Moments") -> "Moments":
        n = self.count + other.count
        delta = other.mean - self.mean
        with np.errstate(invalid="ignore", divide="ignore"):
            w = np.where(n > 0, other.count / n, 0.0)
            cross = np.where(n > 0, delta * delta * self.count * other.count / n, 0.0)
        out = Moments(self.mean.shape[0])
        out.count = n
        out.mean = self.mean + delta * w
        out.m2 = self.m2 + other.m2 + cross
        out.total = self.total + other.total
        return out

    def result(self, config_hash: str = "") -> AvgDelayMatrix:
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = np.where(self.count > 0, self.mean, np.inf)
            std = np.where(self.count > 0, np.sqrt(np.maximum(self.m2, 0.0) / self.count), np.nan)
        coverage = self.count / self.total if self.total else np.zeros_like(self.count)
        return AvgDelayMatrix(mean, std, coverage, config_hash)


def average_matrix(tensor: DelayTensor, config_hash: str = "") -> AvgDelayMatrix:
    block = np.moveaxis(tensor.delays, 2, 0)
    return Moments.from_block(block).result(config_hash)


# -- streaming over the constellation, for grids too large to materialize --

def _chunk_work(args):
    cfg, lo, hi, hop_u, hop_v, offsets = args
    times = cfg.times()[lo:hi]
    block = np.stack([all_pairs_delays(build_snapshot(cfg, float(t))) for t in times])
    moments = Moments.from_block(block)
    sums = None
    if hop_u is not None and len(offsets):
        hops = block[:, hop_u, hop_v]
        sums = np.add.reduceat(hops, offsets, axis=1) if hops.shape[1] else hops
    return moments, sums


def stream_constellation(
    cfg: ConstellationConfig,
    paths: Sequence[Sequence[int]] = (),
    workers: int = 1,
    chunk: int = 64,
    config_hash: str = "",
) -> tuple[AvgDelayMatrix, np.ndarray]:
    """Average matrix plus per-path summed-delay series, one slot at a time.

    Returns ``(avg, path_series)`` with ``path_series[p, k]`` the sum of hop
    delays of ``paths[p]`` at slot ``k``.  Chunk boundaries are fixed by
    ``chunk`` alone, so the result does not depend on ``workers``.
    """
    n_slots = cfg.n_slots
    if paths:
        hop_u = np.concatenate([np.asarray(p[:-1]) for p in paths]).astype(np.intp)
        hop_v = np.concatenate([np.asarray(p[1:]) for p in paths]).astype(np.intp)
        lengths = np.array([len(p) - 1 for p in paths])
        offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    else:
        hop_u = hop_v = None
        offsets = np.empty(0, dtype=np.intp)
    jobs = [
        (cfg, lo, min(lo + chunk, n_slots), hop_u, hop_v, offsets)
        for lo in range(0, n_slots, chunk)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_work, jobs))
    else:
        parts = [_chunk_work(j) for j in jobs]

    total = Moments(cfg.total_sats)
    for moments, _ in parts:
        total = total.merge(moments)
    if paths:
        series = np.concatenate([s for _, s in parts], axis=0).T
    else:
        series = np.empty((0, n_slots))
    return total.result(config_hash), series


# -- offline artifact --

AVG_HEADER = "u,v,mean_s,std_s,coverage"


class ConfigHashMismatch(ValueError):
    pass


def write_avg_csv(avg: AvgDelayMatrix, path: str | Path) -> None:
    n = avg.n_nodes
    lines = [f"# config_hash={avg.config_hash}", AVG_HEADER]
    for u in range(n):
        for v in range(n):
            lines.append(
                f"{u},{v},{float(avg.mean[u, v])!r},{float(avg.std[u, v])!r},{float(avg.coverage[u, v])!r}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def read_avg_hash(path: str | Path) -> str:
    with open(path) as fh:
        first = fh.readline().strip()
    if not first.startswith("# config_hash="):
        raise ValueError(f"{path}: missing config hash header")
    return first.split("=", 1)[1]


def read_avg_csv(path: str | Path, expect_hash: str | None = None) -> AvgDelayMatrix:
    found = read_avg_hash(path)
    if expect_hash is not None and found != expect_hash:
        raise ConfigHashMismatch(f"{path}: config hash {found} != expected {expect_hash}")
    data = np.genfromtxt(path, delimiter=",", comments="#", skip_header=2)
    data = np.atleast_2d(data)
    n = int(round(math.sqrt(len(data))))
    u = data[:, 0].astype(int)
    v = data[:, 1].astype(int)
    mean = np.zeros((n, n))
    std = np.zeros((n, n))
    cov = np.zeros((n, n))
    mean[u, v] = data[:, 2]
    std[u, v] = data[:, 3]
    cov[u, v] = data[:, 4]
    return AvgDelayMatrix(mean, std, cov, found)
