"""Independent reference computations used only by the tests."""

import itertools
import math

import numpy as np

from leosfc.sfc import realized_delay
from leosfc.topology import SnapshotGraph


def kepler_period(a_km, mu):
    # T^2 = 4 pi^2 a^3 / mu, written out separately from the package formula
    return math.sqrt(4.0 * math.pi**2 * a_km**3 / mu)


def floyd_warshall(g: SnapshotGraph) -> np.ndarray:
    n = g.n_nodes
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for u, v, w in zip(g.u, g.v, g.delay):
        d[u, v] = min(d[u, v], w)
        d[v, u] = min(d[v, u], w)
    for k in range(n):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return d


def random_graph(rng, n, p=0.3, connected=True) -> SnapshotGraph:
    pairs = {(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p}
    if connected:
        order = rng.permutation(n)
        for a, b in zip(order, order[1:]):
            pairs.add((min(a, b), max(a, b)))
    pairs = sorted(pairs)
    u = np.array([p[0] for p in pairs], dtype=np.int64)
    v = np.array([p[1] for p in pairs], dtype=np.int64)
    dist = rng.uniform(500.0, 5000.0, size=len(pairs))
    return SnapshotGraph(0.0, n, u, v, dist, dist / 299792.458)


def hop_count(g: SnapshotGraph, src: int) -> np.ndarray:
    adj = [[] for _ in range(g.n_nodes)]
    for a, b in zip(g.u, g.v):
        adj[a].append(b)
        adj[b].append(a)
    hops = np.full(g.n_nodes, np.inf)
    hops[src] = 0
    frontier = [src]
    while frontier:
        nxt = []
        for a in frontier:
            for b in adj[a]:
                if hops[b] == np.inf:
                    hops[b] = hops[a] + 1
                    nxt.append(b)
        frontier = nxt
    return hops


def enumerate_msg(request, scenario, matrix):
    """Best (cost, path) over every assignment, hops priced by ``matrix``."""
    stages = [scenario.hosts(f) for f in request.chain]
    best = None
    for mid in itertools.product(*stages):
        path = (request.src, *mid, request.dst)
        cost = 0.0
        for k in range(request.M + 1):
            u, v = path[k], path[k + 1]
            cost += 0.0 if u == v else float(matrix[u, v])
            if k < request.M:
                cost += scenario.catalog[request.chain[k]].complexity / scenario.compute[path[k + 1]].capacity
        if best is None or (cost, path) < best:
            best = (cost, path)
    return best


def enumerate_sequential(request, scenario, tensor, t0):
    """Best (realized delay, path) over every assignment with sequential hop timing."""
    stages = [scenario.hosts(f) for f in request.chain]
    best = None
    for mid in itertools.product(*stages):
        path = (request.src, *mid, request.dst)
        r = realized_delay(tensor, scenario, path, request, t0).realized
        if best is None or (r, path) < best:
            best = (r, path)
    return best
