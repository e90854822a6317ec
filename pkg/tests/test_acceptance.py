"""The ten acceptance criteria, each at its stated tolerance.

Every test records one ``criterion N PASS|FAIL`` line (printed in the pytest
terminal summary) before asserting.  Criteria 5 and 6 stream the full
12x30, dt=1 s constellation over one orbital period and take a few minutes.
"""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_metric, random_scenario
from leosfc.config import load_spec
from leosfc.experiments import BENCHMARK_FILE, SUMMARY_FILE, cmd_benchmark, cmd_simulate
from leosfc.orbital import ConstellationConfig, SatelliteId, propagate, propagate_all
from leosfc.pathdelay import DelayTensor, single_source_delays, stream_constellation
from leosfc.router import DelayProvider, build_msg, dag_shortest_path, route_teg
from leosfc.sfc import SatelliteCompute, Scenario, SfcRequest, VnfSpec
from leosfc.stability import cv_quantiles, pairwise_cv, sample_paths, series_cv
from leosfc.topology import build_snapshot
from oracles import enumerate_msg, enumerate_sequential, floyd_warshall, random_graph

PATH_LENGTHS = (1, 2, 5, 10, 20)
PUBLISHED_PATH_CV = {1: 0.099, 2: 0.079, 5: 0.053, 10: 0.041, 20: 0.028}
PUBLISHED_PAIR_CV = {0.7: 0.198, 0.9: 0.295}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_01_geometry_invariants():
    start = time.perf_counter()
    cfg = ConstellationConfig(planes=6, per_plane=10, dt=10.0)
    a, N = cfg.semi_major_axis, cfg.per_plane
    chord = 2 * a * np.sin(np.pi / N)
    worst_r = worst_close = worst_chord = 0.0
    times = np.concatenate([cfg.times(), np.random.default_rng(1).uniform(0, 1e6, 200)])
    for t in times:
        pos, _ = propagate_all(cfg, float(t))
        worst_r = max(worst_r, np.max(np.abs(np.linalg.norm(pos, axis=1) - a)))
        nxt = pos.reshape(cfg.planes, N, 3)
        ring = np.linalg.norm(nxt - np.roll(nxt, -1, axis=1), axis=2)
        worst_chord = max(worst_chord, np.max(np.abs(ring - chord)))
    for t in times[::25]:
        for flat in range(cfg.total_sats):
            sat = SatelliteId.from_flat(flat, N)
            p0 = propagate(cfg, sat, float(t)).position
            p1 = propagate(cfg, sat, float(t) + cfg.period).position
            worst_close = max(worst_close, np.max(np.abs(p1 - p0)))
    elapsed = time.perf_counter() - start
    ok = worst_r < 1e-6 and worst_close < 1e-6 and worst_chord < 1e-6 and elapsed < 10
    record(1, ok, f"radius err {worst_r:.2e} km, closure err {worst_close:.2e} km, "
                  f"chord err {worst_chord:.2e} km, {elapsed:.1f}s")
    assert ok


def test_criterion_02_shortest_path_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    graphs = [random_graph(rng, int(rng.integers(2, 31)), float(rng.uniform(0.05, 0.5)),
                           connected=bool(rng.integers(2))) for _ in range(25)]
    for P, N in [(5, 6), (3, 10), (6, 5), (2, 12), (4, 7)] * 5:
        cfg = ConstellationConfig(planes=P, per_plane=N)
        graphs.append(build_snapshot(cfg, float(rng.uniform(0, cfg.period))))
    worst = 0.0
    mismatched_inf = 0
    for g in graphs:
        fw = floyd_warshall(g)
        for s in range(g.n_nodes):
            d = single_source_delays(g, s)
            mismatched_inf += int(np.sum(np.isinf(d) != np.isinf(fw[s])))
            fin = np.isfinite(fw[s])
            worst = max(worst, float(np.max(np.abs(d[fin] - fw[s][fin]), initial=0.0)))
    elapsed = time.perf_counter() - start
    ok = len(graphs) == 50 and worst <= 1e-12 and mismatched_inf == 0 and elapsed < 30
    record(2, ok, f"50 snapshots, max |dijkstra - floyd-warshall| {worst:.1e}s, {elapsed:.1f}s")
    assert ok


def test_criterion_03_msg_optimality_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    wrong = 0
    for _ in range(200):
        n = int(rng.integers(5, 30))
        sc = random_scenario(rng, n, 6, (1, 6))
        m = random_metric(rng, n)
        M = int(rng.integers(0, 4))
        src, dst = (int(x) for x in rng.integers(n, size=2))
        req = SfcRequest(src, dst, tuple(int(f) for f in rng.integers(6, size=M)))
        path, cost = dag_shortest_path(build_msg(req, sc, DelayProvider("average", m)))
        if (cost, path) != enumerate_msg(req, sc, m):
            wrong += 1
    elapsed = time.perf_counter() - start
    ok = wrong == 0 and elapsed < 30
    record(3, ok, f"200 requests, {wrong} differ from exhaustive enumeration, {elapsed:.1f}s")
    assert ok


def test_criterion_04_teg_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    wrong = 0
    trials = 300
    for _ in range(trials):
        n = int(rng.integers(2, 13))
        slots = int(rng.integers(1, 5))
        dt = 0.5
        delays = np.stack([random_metric(rng, n) * rng.uniform(5, 40) for _ in range(slots)], axis=2)
        tensor = DelayTensor(np.arange(slots) * dt, delays, dt, slots * dt)
        base = random_scenario(rng, n, 3, (1, 5))
        sc = Scenario(tuple(VnfSpec(f.id, float(rng.uniform(0, 0.6))) for f in base.catalog), base.compute)
        M = int(rng.integers(0, 3))
        src, dst = (int(x) for x in rng.integers(n, size=2))
        req = SfcRequest(src, dst, tuple(int(f) for f in rng.integers(3, size=M)))
        t0 = float(rng.uniform(0, slots * dt))
        res = route_teg(req, sc, tensor, t0, window=None)
        best, _ = enumerate_sequential(req, sc, tensor, t0)
        wrong += int(res.realized != best)
    elapsed = time.perf_counter() - start
    ok = wrong == 0 and elapsed < 60
    record(4, ok, f"{trials} instances (T<=12, M<=2, <=4 slots), {wrong} differ from sequential search, "
                  f"{elapsed:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def paper_stream():
    """Pairwise statistics and path series for the 12x30, dt=1 s constellation."""
    spec = load_spec("paper")
    cfg = spec.constellation
    paths = {m: sample_paths(cfg.total_sats, m, spec.n_paths, seed=[spec.stability_seed, m]) for m in PATH_LENGTHS}
    flat = [p for m in PATH_LENGTHS for p in paths[m]]
    start = time.perf_counter()
    avg, series = stream_constellation(cfg, flat, workers=1, config_hash=spec.hash)
    elapsed = time.perf_counter() - start
    cvs, i = {}, 0
    for m in PATH_LENGTHS:
        cvs[m] = np.array([series_cv(s) for s in series[i:i + spec.n_paths]])
        i += spec.n_paths
    return avg, cvs, elapsed, cfg


def _path_cv_desk():
    spec = load_spec("desk")
    cfg = spec.constellation
    start = time.perf_counter()
    paths = [p for m in PATH_LENGTHS for p in sample_paths(cfg.total_sats, m, spec.n_paths,
                                                           seed=[spec.stability_seed, m])]
    _, series = stream_constellation(cfg, paths)
    avgs = [float(np.nanmean([series_cv(s) for s in series[k * spec.n_paths:(k + 1) * spec.n_paths]]))
            for k in range(len(PATH_LENGTHS))]
    return avgs, time.perf_counter() - start


@pytest.mark.slow
def test_criterion_05_path_cv_trend(paper_stream):
    _, cvs, elapsed, cfg = paper_stream
    avgs = [float(np.nanmean(cvs[m])) for m in PATH_LENGTHS]
    excluded = sum(int(np.sum(~np.isfinite(cvs[m]))) for m in PATH_LENGTHS)
    decreasing = all(a > b for a, b in zip(avgs, avgs[1:]))
    halved = avgs[-1] < 0.5 * avgs[0]
    desk, desk_s = _path_cv_desk()
    desk_ok = all(a > b for a, b in zip(desk, desk[1:])) and desk_s < 300
    ok = decreasing and halved and desk_ok
    ours = ", ".join(f"M={m}: {a:.4f} (published {PUBLISHED_PATH_CV[m]})" for m, a in zip(PATH_LENGTHS, avgs))
    record(5, ok, f"{cfg.planes}x{cfg.per_plane} dt={cfg.dt:g}s avg path CV {ours}; "
                  f"M20/M1={avgs[-1] / avgs[0]:.3f}; excluded {excluded}; "
                  f"desk {' > '.join(f'{a:.4f}' for a in desk)} in {desk_s:.0f}s; stream {elapsed:.0f}s")
    assert ok


@pytest.mark.slow
def test_criterion_06_pair_cv_quantiles(paper_stream):
    avg, _, _, cfg = paper_stream
    pairs = pairwise_cv(avg)
    q70, q90 = cv_quantiles(pairs, [0.7, 0.9])
    ok = q70 <= 0.30 and q90 <= 0.45
    record(6, ok, f"{len(pairs)} pairs: 70th pct CV {q70:.4f} (published {PUBLISHED_PAIR_CV[0.7]}, bound 0.30), "
                  f"90th pct CV {q90:.4f} (published {PUBLISHED_PAIR_CV[0.9]}, bound 0.45)")
    assert ok


@pytest.fixture(scope="module")
def desk_benchmarks(tmp_path_factory):
    """Two full desk-profile benchmark runs, one and two workers."""
    runs = []
    for workers in (1, 2):
        out = tmp_path_factory.mktemp(f"bench_w{workers}")
        spec = load_spec("desk", out_dir=out, workers=workers)
        cmd_simulate(spec, snapshots=False)
        records, summary = cmd_benchmark(spec)
        runs.append((out, records, summary))
    return runs


def _batch(records, M):
    by_alg = {}
    for r in records:
        if r["M"] == M and r["status"] == "ok":
            by_alg.setdefault(r["algorithm"], []).append(r["realized_s"])
    return {a: np.array(v) for a, v in by_alg.items()}


def _iqr(x):
    q1, q3 = np.percentile(x, [25, 75])
    return q3 - q1


@pytest.mark.slow
def test_criterion_07_mean_ordering(desk_benchmarks):
    _, records, _ = desk_benchmarks[0]
    b = _batch(records, 15)
    mean = {a: float(v.mean()) for a, v in b.items()}
    best_greedy = min(mean["greedy-tx"], mean["greedy-cp"])
    checks = {
        "teg<=sa": mean["teg"] <= mean["sa-msgr"],
        "sa<=snapshot": mean["sa-msgr"] <= mean["snapshot"],
        "snapshot<greedy": mean["snapshot"] < best_greedy,
        "greedy<random": best_greedy < mean["random"],
        "sa within 15% of teg": mean["sa-msgr"] <= 1.15 * mean["teg"],
    }
    ok = all(checks.values()) and all(len(v) == 300 for v in b.values())
    means = ", ".join(f"{a} {m:.4f}s" for a, m in mean.items())
    failed = [k for k, v in checks.items() if not v]
    record(7, ok, f"desk M=15, 300 requests: {means}" + (f"; failed: {', '.join(failed)}" if failed else ""))
    assert ok


@pytest.mark.slow
def test_criterion_08_iqr(desk_benchmarks):
    _, records, _ = desk_benchmarks[0]
    b = _batch(records, 15)
    sa, snap = _iqr(b["sa-msgr"]), _iqr(b["snapshot"])
    ok = sa < snap
    record(8, ok, f"desk M=15, 300 requests: IQR sa-msgr {sa:.4f}s, snapshot {snap:.4f}s")
    assert ok


def test_criterion_09_linear_relaxations():
    rng = np.random.default_rng(9)
    n, s_max, n_vnfs = 80, 6, 50
    hosted = [set() for _ in range(n)]
    for f in range(n_vnfs):
        for s in rng.choice(n, size=s_max, replace=False):
            hosted[s].add(f)
    sc = Scenario(tuple(VnfSpec(f, float(rng.uniform(1, 5))) for f in range(n_vnfs)),
                  tuple(SatelliteCompute(float(rng.uniform(1, 2)), frozenset(h)) for h in hosted))
    m = random_metric(rng, n)
    Ms = np.arange(10, 51)
    counts = []
    for M in Ms:
        chain = tuple(int(f) for f in rng.choice(n_vnfs, size=M, replace=False))
        stats = {}
        dag_shortest_path(build_msg(SfcRequest(0, 1, chain), sc, DelayProvider("average", m)), stats)
        counts.append(stats["relaxations"])
    counts = np.array(counts, dtype=float)
    slope, icpt = np.polyfit(Ms, counts, 1)
    r2 = 1 - np.sum((counts - (slope * Ms + icpt)) ** 2) / np.sum((counts - counts.mean()) ** 2)
    ok = r2 > 0.99
    record(9, ok, f"S_max={s_max}, M=10..50: relaxations ~ {slope:.1f}*M + {icpt:.1f}, R^2={r2:.6f}")
    assert ok


@pytest.mark.slow
def test_criterion_10_determinism(desk_benchmarks):
    (a, _, _), (b, _, _) = desk_benchmarks
    same = {name: (a / name).read_bytes() == (b / name).read_bytes()
            for name in ("avg_delay.csv", "scenario.json", "requests.jsonl", BENCHMARK_FILE, SUMMARY_FILE)}
    ok = all(same.values())
    record(10, ok, "workers=1 vs workers=2: " + ", ".join(f"{k} {'identical' if v else 'DIFFERENT'}"
                                                       for k, v in same.items()))
    assert ok

