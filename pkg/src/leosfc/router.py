"""SFC routing: multi-stage graph routing on average delays, plus baselines.

Satellite sequences are compared lexicographically on flat ids whenever two
candidates tie exactly; every router here is deterministic (``route_random``
given its seed).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .pathdelay import AvgDelayMatrix
from .sfc import InfeasibleRequest, RouteResult, Scenario, SfcRequest, hop_delay, realized_delay

ALGORITHMS = ("sa-msgr", "snapshot", "greedy-tx", "greedy-cp", "random", "teg")


@dataclass(frozen=True, eq=False)
class DelayProvider:
    """Static pairwise transmission delays used as MSG edge weights."""

    mode: str  # "average" or "snapshot"
    matrix: np.ndarray
    t0: float | None = None

    @classmethod
    def average(cls, avg: AvgDelayMatrix) -> "DelayProvider":
        return cls("average", avg.mean)

    @classmethod
    def snapshot(cls, tensor, t0: float) -> "DelayProvider":
        return cls("snapshot", tensor.matrix(tensor.slot_of(t0)), t0)

    def delay(self, u: int, v: int) -> float:
        return 0.0 if u == v else float(self.matrix[u, v])


class MsgNode(NamedTuple):
    kind: str  # src | in | out | dst
    stage: int
    sat: int


@dataclass(frozen=True, eq=False)
class MsgGraph:
    nodes: tuple[MsgNode, ...]
    out_edges: tuple[tuple[tuple[int, float], ...], ...]
    stages: tuple[tuple[int, ...], ...]

    @property
    def n_edges(self) -> int:
        return sum(len(e) for e in self.out_edges)

    @property
    def source(self) -> int:
        return 0

    @property
    def sink(self) -> int:
        return len(self.nodes) - 1


def stage_hosts(request: SfcRequest, scenario: Scenario) -> list[tuple[int, ...]]:
    """Candidate satellites per stage, ``[ (src,), hosts(f_1), ..., (dst,) ]``."""
    stages = [(request.src,)]
    for k, f in enumerate(request.chain, start=1):
        hosts = scenario.hosts(f)
        if not hosts:
            raise InfeasibleRequest(f"stage {k}: no satellite hosts vnf {f}", stage=k)
        stages.append(hosts)
    stages.append((request.dst,))
    return stages


def build_msg(request: SfcRequest, scenario: Scenario, provider: DelayProvider) -> MsgGraph:
    stages = stage_hosts(request, scenario)
    M = request.M
    nodes = [MsgNode("src", 0, request.src)]
    # ids of the nodes that emit transmission edges out of each stage
    emitters = [[0]]
    receivers = []
    for k in range(1, M + 1):
        ins, outs = [], []
        for s in stages[k]:
            ins.append(len(nodes))
            nodes.append(MsgNode("in", k, s))
            outs.append(len(nodes))
            nodes.append(MsgNode("out", k, s))
        receivers.append(ins)
        emitters.append(outs)
    receivers.append([len(nodes)])
    nodes.append(MsgNode("dst", M + 1, request.dst))

    out_edges: list[list[tuple[int, float]]] = [[] for _ in nodes]
    for k in range(M + 1):
        for a in emitters[k]:
            for b in receivers[k]:
                out_edges[a].append((b, provider.delay(nodes[a].sat, nodes[b].sat)))
    for k in range(1, M + 1):
        f = request.chain[k - 1]
        for a in receivers[k - 1]:
            out_edges[a].append((a + 1, scenario.cp(nodes[a].sat, f)))
    return MsgGraph(tuple(nodes), tuple(tuple(e) for e in out_edges), tuple(stages))


def _topological_order(g: MsgGraph) -> list[int]:
    indeg = [0] * len(g.nodes)
    for edges in g.out_edges:
        for b, _ in edges:
            indeg[b] += 1
    queue = deque(i for i, d in enumerate(indeg) if d == 0)
    order = []
    while queue:
        a = queue.popleft()
        order.append(a)
        for b, _ in g.out_edges[a]:
            indeg[b] -= 1
            if indeg[b] == 0:
                queue.append(b)
    if len(order) != len(g.nodes):
        raise ValueError("multi-stage graph has a cycle")
    return order


def dag_shortest_path(g: MsgGraph, stats: dict | None = None) -> tuple[tuple[int, ...], float]:
    """Shortest source-to-sink path as a satellite sequence and its total weight.

    ``stats["relaxations"]`` is incremented once per edge examined.
    """
    n = len(g.nodes)
    dist = [np.inf] * n
    prefix: list[tuple[int, ...] | None] = [None] * n
    dist[g.source] = 0.0
    prefix[g.source] = (g.nodes[g.source].sat,)
    relaxations = 0
    for a in _topological_order(g):
        if prefix[a] is None:
            continue
        for b, w in g.out_edges[a]:
            relaxations += 1
            nd = dist[a] + w
            node = g.nodes[b]
            cand = prefix[a] if node.kind == "out" else prefix[a] + (node.sat,)
            if nd < dist[b] or (nd == dist[b] and prefix[b] is not None and cand < prefix[b]):
                dist[b] = nd
                prefix[b] = cand
    if stats is not None:
        stats["relaxations"] = stats.get("relaxations", 0) + relaxations
    if prefix[g.sink] is None or not np.isfinite(dist[g.sink]):
        raise InfeasibleRequest("destination unreachable in the multi-stage graph")
    return prefix[g.sink], float(dist[g.sink])


def path_cost(provider: DelayProvider, scenario: Scenario, path, request: SfcRequest) -> float:
    """Left-to-right transmission plus compute sum with every hop priced by ``provider``."""
    total = 0.0
    for k in range(request.M + 1):
        total += provider.delay(path[k], path[k + 1])
        if k < request.M:
            total += scenario.cp(path[k + 1], request.chain[k])
    return total


def route_sa_msgr(request: SfcRequest, scenario: Scenario, avg: AvgDelayMatrix, tensor,
                  t0: float) -> RouteResult:
    if avg.config_hash and scenario.config_hash and avg.config_hash != scenario.config_hash:
        raise ValueError("average-delay matrix and scenario come from different configurations")
    path, est = dag_shortest_path(build_msg(request, scenario, DelayProvider.average(avg)))
    return realized_delay(tensor, scenario, path, request, t0, "sa-msgr", est)


def route_snapshot(request: SfcRequest, scenario: Scenario, tensor, t0: float) -> RouteResult:
    path, est = dag_shortest_path(build_msg(request, scenario, DelayProvider.snapshot(tensor, t0)))
    return realized_delay(tensor, scenario, path, request, t0, "snapshot", est)


def route_greedy_tx(request: SfcRequest, scenario: Scenario, tensor, t0: float) -> RouteResult:
    stages = stage_hosts(request, scenario)
    provider = DelayProvider.snapshot(tensor, t0)
    path = [request.src]
    for hosts in stages[1:-1]:
        cur = path[-1]
        path.append(min(hosts, key=lambda h: (provider.delay(cur, h), h)))
    path.append(request.dst)
    est = path_cost(provider, scenario, path, request)
    return realized_delay(tensor, scenario, path, request, t0, "greedy-tx", est)


def route_greedy_cp(request: SfcRequest, scenario: Scenario, tensor, t0: float) -> RouteResult:
    stages = stage_hosts(request, scenario)
    path = [request.src]
    for f, hosts in zip(request.chain, stages[1:-1]):
        path.append(min(hosts, key=lambda h: (scenario.cp(h, f), h)))
    path.append(request.dst)
    est = path_cost(DelayProvider.snapshot(tensor, t0), scenario, path, request)
    return realized_delay(tensor, scenario, path, request, t0, "greedy-cp", est)


def route_random(request: SfcRequest, scenario: Scenario, tensor, t0: float, seed: int = 0) -> RouteResult:
    stages = stage_hosts(request, scenario)
    rng = np.random.default_rng(seed)
    path = [request.src] + [hosts[int(rng.integers(len(hosts)))] for hosts in stages[1:-1]] + [request.dst]
    est = path_cost(DelayProvider.snapshot(tensor, t0), scenario, path, request)
    return realized_delay(tensor, scenario, path, request, t0, "random", est)


def route_teg(request: SfcRequest, scenario: Scenario, tensor, t0: float,
              window: float | None = 10.0) -> RouteResult:
    """Earliest-completion search over (stage, satellite) with time-indexed hop delays.

    Hops departing within ``window`` seconds of ``t0`` read the slot of their
    actual departure; later departures read the slot at ``t0 + window``.
    ``window=None`` never clamps, which makes the objective identical to
    :func:`realized_delay`.

    Slot-based hop delays can violate FIFO by at most the largest per-pair
    delay range ``R``, so a label at a state is discarded only when another
    label there is ahead by more than ``R`` times the hops still to go.  This
    keeps the search exact while leaving almost always one label per state.
    """
    stages = stage_hosts(request, scenario)
    M = request.M
    if window is not None and window < getattr(tensor, "dt", 0.0):
        raise ValueError("window must be at least one slot")
    spread = tensor.max_range
    horizon_end = None if window is None else t0 + window

    def hop(u, v, elapsed):
        t = t0 + elapsed
        if horizon_end is not None and t > horizon_end:
            t = horizon_end
        return hop_delay(tensor, u, v, t)

    labels = {request.src: [(0.0, (request.src,))]}
    for k in range(1, M + 2):
        remaining_hops = M + 1 - k
        slack = remaining_hops * spread + 1e-9
        f = request.chain[k - 1] if k <= M else None
        nxt: dict[int, list[tuple[float, tuple[int, ...]]]] = {}
        for v in stages[k]:
            cand = []
            for u, entries in labels.items():
                for elapsed, pre in entries:
                    e = elapsed + hop(u, v, elapsed)
                    if f is not None:
                        e += scenario.cp(v, f)
                    cand.append((e, pre + (v,)))
            cand.sort()
            if not cand or not np.isfinite(cand[0][0]):
                continue
            best = cand[0][0]
            kept = [cand[0]]
            for e, pre in cand[1:]:
                if e == kept[-1][0] or e - best > slack:
                    continue
                kept.append((e, pre))
            nxt[v] = kept
        if not nxt:
            raise InfeasibleRequest(f"stage {k}: no reachable satellite", stage=k)
        labels = nxt
    est, path = labels[request.dst][0]
    return realized_delay(tensor, scenario, path, request, t0, "teg", est)


def brute_force_assignments(request: SfcRequest, scenario: Scenario):
    """Every feasible satellite sequence, in lexicographic order."""
    stages = stage_hosts(request, scenario)
    for mid in itertools.product(*stages[1:-1]):
        yield (request.src, *mid, request.dst)


def route(algorithm: str, request: SfcRequest, scenario: Scenario, tensor, t0: float,
          avg: AvgDelayMatrix | None = None, seed: int = 0, window: float | None = 10.0) -> RouteResult:
    if algorithm == "sa-msgr":
        if avg is None:
            raise ValueError("sa-msgr needs the average-delay matrix")
        return route_sa_msgr(request, scenario, avg, tensor, t0)
    if algorithm == "snapshot":
        return route_snapshot(request, scenario, tensor, t0)
    if algorithm == "greedy-tx":
        return route_greedy_tx(request, scenario, tensor, t0)
    if algorithm == "greedy-cp":
        return route_greedy_cp(request, scenario, tensor, t0)
    if algorithm == "random":
        return route_random(request, scenario, tensor, t0, seed)
    if algorithm == "teg":
        return route_teg(request, scenario, tensor, t0, window)
    raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
