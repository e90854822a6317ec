"""Time-indexed inter-satellite link graphs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np
from scipy.sparse import csr_matrix

from .orbital import ConstellationConfig, StateVector, propagate_all


class Link(NamedTuple):
    u: int
    v: int
    distance: float  # km
    delay: float  # s


@dataclass(frozen=True, eq=False)
class SnapshotGraph:
    """Undirected ISL graph at one instant.

    Edges are stored as parallel arrays sorted by ``(u, v)`` with ``u < v``.
    """

    t: float
    n_nodes: int
    u: np.ndarray
    v: np.ndarray
    distance: np.ndarray
    delay: np.ndarray

    def __len__(self) -> int:
        return len(self.u)

    def links(self) -> Iterator[Link]:
        for a, b, d, w in zip(self.u, self.v, self.distance, self.delay):
            yield Link(int(a), int(b), float(d), float(w))

    def edge_keys(self) -> np.ndarray:
        return self.u.astype(np.int64) * self.n_nodes + self.v

    def degree(self) -> np.ndarray:
        return np.bincount(np.concatenate([self.u, self.v]), minlength=self.n_nodes)

    def adjacency(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n_nodes)]
        for link in self.links():
            adj[link.u].append((link.v, link.delay))
            adj[link.v].append((link.u, link.delay))
        return adj

    def to_csr(self) -> csr_matrix:
        # upper triangle only; csgraph routines are told directed=False
        return csr_matrix((self.delay, (self.u, self.v)), shape=(self.n_nodes, self.n_nodes))

    def without_link(self, index: int) -> "SnapshotGraph":
        keep = np.arange(len(self)) != index
        return SnapshotGraph(
            self.t, self.n_nodes, self.u[keep], self.v[keep], self.distance[keep], self.delay[keep]
        )

    def same_as(self, other: "SnapshotGraph", tol: float = 0.0) -> bool:
        return (
            self.n_nodes == other.n_nodes
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
            and bool(np.all(np.abs(self.delay - other.delay) <= tol))
        )


def line_of_sight(a: StateVector, b: StateVector, earth_radius: float, margin: float) -> bool:
    return bool(_clearance(np.asarray(a.position)[None], np.asarray(b.position)[None])[0] > earth_radius + margin)


def _clearance(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Minimum distance from the origin to each segment ``[pa[k], pb[k]]``."""
    d = pb - pa
    dd = np.einsum("ij,ij->i", d, d)
    s = np.where(dd > 0, -np.einsum("ij,ij->i", pa, d) / np.where(dd > 0, dd, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    closest = pa + s[:, None] * d
    return np.linalg.norm(closest, axis=1)


def _ring_pairs(cfg: ConstellationConfig) -> np.ndarray:
    P, N = cfg.planes, cfg.per_plane
    if N < 2:
        return np.empty((0, 2), dtype=np.int64)
    flat = np.arange(P * N)
    nxt = (flat // N) * N + (flat % N + 1) % N
    return np.stack([flat, nxt], axis=1)


def _nearest_pairs(cfg: ConstellationConfig, pos: np.ndarray) -> np.ndarray:
    """Nearest-neighbor proposals between every pair of adjacent planes."""
    P, N = cfg.planes, cfg.per_plane
    if P < 2:
        return np.empty((0, 2), dtype=np.int64)
    out = []
    by_plane = pos.reshape(P, N, 3)
    plane_pairs = [(i, (i + 1) % P) for i in range(P if P > 2 else 1)]
    for i, k in plane_pairs:
        diff = by_plane[i][:, None, :] - by_plane[k][None, :, :]
        dist2 = np.einsum("abk,abk->ab", diff, diff)
        # argmin returns the first minimum, i.e. the lowest flat id on ties
        fwd = np.argmin(dist2, axis=1)
        bwd = np.argmin(dist2, axis=0)
        js = np.arange(N)
        out.append(np.stack([i * N + js, k * N + fwd], axis=1))
        out.append(np.stack([i * N + bwd, k * N + js], axis=1))
    return np.concatenate(out)


def _canonical(pairs: np.ndarray, n: int) -> np.ndarray:
    pairs = np.sort(pairs, axis=1)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    keys = np.unique(pairs[:, 0].astype(np.int64) * n + pairs[:, 1])
    return np.stack(np.divmod(keys, n), axis=1)


def build_snapshot(cfg: ConstellationConfig, t: float) -> SnapshotGraph:
    if t < 0:
        raise ValueError("t must be nonnegative")
    n = cfg.total_sats
    pos, vel = propagate_all(cfg, t)

    ring = _canonical(_ring_pairs(cfg), n)
    cand = _canonical(_nearest_pairs(cfg, pos), n)
    if len(cand):
        a, b = cand[:, 0], cand[:, 1]
        visible = _clearance(pos[a], pos[b]) > cfg.earth_radius + cfg.occlusion_margin
        slow = np.linalg.norm(vel[a] - vel[b], axis=1) <= cfg.v_threshold
        cand = cand[visible & slow]

    pairs = _canonical(np.concatenate([ring, cand]), n) if len(ring) + len(cand) else ring
    u, v = pairs[:, 0], pairs[:, 1]
    distance = np.linalg.norm(pos[u] - pos[v], axis=1)
    return SnapshotGraph(float(t), n, u, v, distance, distance / cfg.light_speed)


def snapshot_series(cfg: ConstellationConfig) -> list[SnapshotGraph]:
    return [build_snapshot(cfg, float(t)) for t in cfg.times()]


def interplane_change_fraction(series: list[SnapshotGraph], per_plane: int) -> float:
    """Fraction of consecutive slot transitions whose inter-plane link set changes."""
    if len(series) < 2:
        return 0.0

    def inter(g):
        mask = (g.u // per_plane) != (g.v // per_plane)
        return set(g.edge_keys()[mask].tolist())

    sets = [inter(g) for g in series]
    changes = sum(a != b for a, b in zip(sets, sets[1:]))
    return changes / (len(sets) - 1)
