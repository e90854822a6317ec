"""Offline simulation, stability study and routing benchmark drivers.

Every file written here is produced in a canonical order so that repeated
runs with the same configuration and seeds are byte-identical, whatever the
worker count.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import multiprocessing as mp
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentSpec
from .pathdelay import (
    AvgDelayMatrix,
    ConfigHashMismatch,
    LazyDelayTensor,
    build_tensor,
    read_avg_csv,
    read_avg_hash,
    stream_constellation,
    write_avg_csv,
)
from .router import ALGORITHMS, route
from .sfc import InfeasibleRequest, Scenario, SfcRequest, generate_scenario
from .stability import cv_quantiles, pairwise_cv, path_report, sample_paths, series_cv
from .topology import build_snapshot, snapshot_series

log = logging.getLogger(__name__)

AVG_FILE = "avg_delay.csv"
SNAPSHOT_FILE = "snapshots.csv"
SCENARIO_FILE = "scenario.json"
REQUESTS_FILE = "requests.jsonl"
BENCHMARK_FILE = "benchmark.csv"
SUMMARY_FILE = "benchmark_summary.csv"

BENCHMARK_HEADER = ["request_id", "algorithm", "M", "estimated_s", "realized_s", "route_us", "path", "status"]
SUMMARY_HEADER = [
    "algorithm", "M", "n", "excluded", "mean_s", "std_s", "median_s",
    "q1_s", "q3_s", "iqr_s", "whisker_lo_s", "whisker_hi_s",
]

# published values, reported next to ours in the stability summary
REFERENCE_PAIR_QUANTILES = {0.5: 0.125, 0.7: 0.198, 0.9: 0.295}
REFERENCE_PATH_CV = {1: 0.099, 2: 0.079, 5: 0.053, 10: 0.041, 20: 0.028}

EAGER_TENSOR_BYTES = 1.5e9


class MissingArtifact(FileNotFoundError):
    pass


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def delay_tensor(spec: ExperimentSpec):
    cfg = spec.constellation
    if cfg.total_sats**2 * cfg.n_slots * 8 <= EAGER_TENSOR_BYTES:
        return build_tensor(snapshot_series(cfg), horizon=cfg.sim_horizon)
    return LazyDelayTensor(cfg, cache_slots=256)


# -- simulate --

def cmd_simulate(spec: ExperimentSpec, snapshots: bool = True) -> AvgDelayMatrix:
    out = spec.out_dir
    out.mkdir(parents=True, exist_ok=True)
    avg_path = out / AVG_FILE
    if avg_path.exists():
        try:
            avg = read_avg_csv(avg_path, expect_hash=spec.hash)
        except (ConfigHashMismatch, ValueError):
            log.info("config hash changed, rebuilding %s", avg_path)
        else:
            log.info("reusing %s", avg_path)
            return avg

    cfg = spec.constellation
    t = time.perf_counter()
    avg, _ = stream_constellation(cfg, workers=spec.workers, config_hash=spec.hash)
    log.info("averaged %d slots x %d satellites in %.1fs", cfg.n_slots, cfg.total_sats, time.perf_counter() - t)
    write_avg_csv(avg, avg_path)
    if snapshots:
        write_snapshots(spec, out / SNAPSHOT_FILE)
    return avg


def write_snapshots(spec: ExperimentSpec, path: Path) -> None:
    cfg = spec.constellation
    with open(path, "w") as fh:
        fh.write(f"# config_hash={spec.hash}\n")
        fh.write("t_s,u,v,distance_km\n")
        for t in cfg.times():
            g = build_snapshot(cfg, float(t))
            t_txt = _fmt(t)
            fh.writelines(f"{t_txt},{u},{v},{_fmt(d)}\n" for u, v, d in zip(g.u, g.v, g.distance))


def load_avg(spec: ExperimentSpec) -> AvgDelayMatrix:
    path = spec.out_dir / AVG_FILE
    if not path.exists():
        raise MissingArtifact(f"{path} not found; run `leosfc simulate` with the same configuration first")
    found = read_avg_hash(path)
    if found != spec.hash:
        raise MissingArtifact(
            f"{path} was built for config {found}, current config is {spec.hash}; rerun `leosfc simulate`"
        )
    return read_avg_csv(path, expect_hash=spec.hash)


# -- stability --

@dataclass
class StabilityResult:
    quantiles: dict[float, float]
    reports: dict  # M -> PathStabilityReport
    n_pairs: int


def cmd_stability(spec: ExperimentSpec) -> StabilityResult:
    avg = load_avg(spec)
    out = spec.out_dir
    cfg = spec.constellation

    pairs = pairwise_cv(avg)
    _write_csv(
        out / "pair_cv.csv",
        ["u", "v", "mean_s", "std_s", "cv"],
        ([p.u, p.v, _fmt(p.mean), _fmt(p.std), _fmt(p.cv)] for p in pairs),
    )
    fractions = sorted(REFERENCE_PAIR_QUANTILES)
    quantiles = dict(zip(fractions, cv_quantiles(pairs, fractions))) if pairs else {}

    paths_by_m = {
        m: sample_paths(cfg.total_sats, m, spec.n_paths, seed=[spec.stability_seed, m])
        for m in spec.stability_lengths
    }
    flat = [p for m in spec.stability_lengths for p in paths_by_m[m]]
    _, series = stream_constellation(cfg, flat, workers=spec.workers)
    cvs_by_m = {}
    i = 0
    for m in spec.stability_lengths:
        cvs_by_m[m] = [series_cv(s) for s in series[i:i + spec.n_paths]]
        i += spec.n_paths

    finite = [c for cvs in cvs_by_m.values() for c in cvs if np.isfinite(c)]
    grid = np.linspace(0.0, max(finite) if finite else 1.0, 100)
    reports = {m: path_report(m, cvs_by_m[m], grid) for m in spec.stability_lengths}

    for m, cvs in cvs_by_m.items():
        _write_csv(out / f"path_cv_M{m}.csv", ["path_id", "cv"], ([k, _fmt(c)] for k, c in enumerate(cvs)))
    _write_csv(
        out / "cv_cdf.csv",
        ["M", "x", "F"],
        ([m, _fmt(x), _fmt(f)] for m, r in reports.items() for x, f in zip(r.grid, r.cdf)),
    )
    rows = [["pair_cv_quantile", p, _fmt(q), REFERENCE_PAIR_QUANTILES[p]] for p, q in quantiles.items()]
    rows += [
        ["path_average_cv", m, _fmt(r.average_cv) if len(r.cvs) else "nan", REFERENCE_PATH_CV.get(m, "")]
        for m, r in reports.items()
    ]
    _write_csv(out / "stability_summary.csv", ["table", "key", "value", "reference_value"], rows)
    return StabilityResult(quantiles, reports, len(pairs))


# -- benchmark --

def make_requests(spec: ExperimentSpec, scenario: Scenario, n_slots: int, dt: float):
    """Seeded requests per chain length: ``(request_id, M, request, t0)``."""
    deployed = np.array(scenario.deployed_vnfs())
    out = []
    rid = 0
    for m in spec.chain_lengths:
        for i in range(spec.requests):
            rng = np.random.default_rng([spec.benchmark_seed, m, i])
            src, dst = (int(x) for x in rng.choice(scenario.n_sats, size=2, replace=False))
            if m > len(deployed):
                chain = tuple(int(x) for x in rng.choice(len(scenario.catalog), size=m, replace=False))
            else:
                chain = tuple(int(x) for x in rng.choice(deployed, size=m, replace=False))
            t0 = float(rng.integers(n_slots)) * dt
            out.append((rid, m, SfcRequest(src, dst, chain), t0))
            rid += 1
    return out


_STATE: dict = {}


def _route_one(job):
    rid, m, request, t0 = job
    spec, scenario, tensor, avg = _STATE["spec"], _STATE["scenario"], _STATE["tensor"], _STATE["avg"]
    rows = []
    for alg in spec.algorithms:
        start = time.perf_counter()
        try:
            res = route(alg, request, scenario, tensor, t0, avg=avg,
                        seed=[spec.benchmark_seed, m, rid], window=spec.teg_window)
        except InfeasibleRequest:
            rows.append((rid, alg, m, None, None, None, None))
            continue
        us = (time.perf_counter() - start) * 1e6
        rows.append((rid, alg, m, res.estimated, res.realized, us, res.path))
    return rows


def load_or_make_scenario(spec: ExperimentSpec) -> Scenario:
    path = spec.out_dir / SCENARIO_FILE
    if path.exists():
        scenario = Scenario.from_json(path.read_text())
        if (scenario.config_hash == spec.hash and scenario.seed == spec.scenario_seed
                and len(scenario.catalog) == spec.catalog_size):
            return scenario
    scenario = generate_scenario(spec.constellation, spec.catalog_size, spec.scenario_seed, spec.hash)
    path.write_text(scenario.to_json() + "\n")
    return scenario


def summarize(records: list[dict]) -> list[dict]:
    """Box-plot statistics per (algorithm, M) over feasible records."""
    out = []
    ms = sorted({r["M"] for r in records})
    algs = [a for a in ALGORITHMS if any(r["algorithm"] == a for r in records)]
    for m in ms:
        for a in algs:
            sel = [r for r in records if r["M"] == m and r["algorithm"] == a]
            vals = np.array([r["realized_s"] for r in sel if r["status"] == "ok"], dtype=float)
            excluded = len(sel) - len(vals)
            if len(vals) == 0:
                out.append({"algorithm": a, "M": m, "n": 0, "excluded": excluded})
                continue
            q1, med, q3 = np.percentile(vals, [25, 50, 75])
            iqr = q3 - q1
            lo = vals[vals >= q1 - 1.5 * iqr].min()
            hi = vals[vals <= q3 + 1.5 * iqr].max()
            out.append({
                "algorithm": a, "M": m, "n": len(vals), "excluded": excluded,
                "mean_s": vals.mean(), "std_s": vals.std(), "median_s": med,
                "q1_s": q1, "q3_s": q3, "iqr_s": iqr, "whisker_lo_s": lo, "whisker_hi_s": hi,
            })
    return out


def cmd_benchmark(spec: ExperimentSpec, tensor=None) -> tuple[list[dict], list[dict]]:
    out = spec.out_dir
    out.mkdir(parents=True, exist_ok=True)
    avg = load_avg(spec)
    scenario = load_or_make_scenario(spec)
    if tensor is None:
        tensor = delay_tensor(spec)
    jobs = make_requests(spec, scenario, tensor.n_slots, tensor.dt)

    with open(out / REQUESTS_FILE, "w") as fh:
        for rid, m, req, t0 in jobs:
            fh.write(json.dumps({"request_id": rid, "M": m, "src": req.src, "dst": req.dst,
                                 "chain": list(req.chain), "t0_s": t0}) + "\n")

    _STATE.update(spec=spec, scenario=scenario, tensor=tensor, avg=avg)
    try:
        if spec.workers > 1:
            ctx = mp.get_context("fork")
            with ProcessPoolExecutor(max_workers=spec.workers, mp_context=ctx) as pool:
                results = list(pool.map(_route_one, jobs, chunksize=8))
        else:
            results = [_route_one(j) for j in jobs]
    finally:
        _STATE.clear()

    records = []
    for rows in results:
        for rid, alg, m, est, real, us, path in rows:
            records.append({
                "request_id": rid, "algorithm": alg, "M": m,
                "estimated_s": est, "realized_s": real, "route_us": us,
                "path": path, "status": "ok" if path is not None else "infeasible",
            })

    def row(r):
        if r["status"] != "ok":
            return [r["request_id"], r["algorithm"], r["M"], "", "", "", "", r["status"]]
        us = f"{r['route_us']:.1f}" if spec.timing else ""
        return [r["request_id"], r["algorithm"], r["M"], _fmt(r["estimated_s"]), _fmt(r["realized_s"]),
                us, " ".join(map(str, r["path"])), r["status"]]

    _write_csv(out / BENCHMARK_FILE, BENCHMARK_HEADER, (row(r) for r in records))
    summary = summarize(records)
    _write_csv(
        out / SUMMARY_FILE,
        SUMMARY_HEADER,
        ([s["algorithm"], s["M"], s["n"], s["excluded"]] + [_fmt(s[k]) if k in s else "" for k in SUMMARY_HEADER[4:]]
         for s in summary),
    )
    return records, summary


# -- single route --

def cmd_route(spec: ExperimentSpec, request: SfcRequest, algorithm: str = "sa-msgr",
              t0: float = 0.0, tensor=None):
    avg = load_avg(spec)
    scenario = load_or_make_scenario(spec)
    request.validate(scenario)
    if tensor is None:
        tensor = delay_tensor(spec)
    return route(algorithm, request, scenario, tensor, t0, avg=avg, seed=spec.benchmark_seed,
                 window=spec.teg_window)
