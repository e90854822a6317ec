#!/usr/bin/env python
"""Stability study: pairwise CV quantiles and average path CV against chain length.

Runs the offline simulation if the artifact is missing, then prints a table
with the published reference values next to ours.

    python scripts/run_stability.py --profile desk --out out/desk
    python scripts/run_stability.py --profile paper --out out/paper   # a few minutes
"""

import argparse
import logging
from pathlib import Path

from leosfc.config import load_spec
from leosfc.experiments import REFERENCE_PAIR_QUANTILES, REFERENCE_PATH_CV, cmd_simulate, cmd_stability


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", default="desk", choices=["desk", "paper"])
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, default=Path("out/stability"))
    ap.add_argument("--paths", type=int, default=None, help="random paths per chain length")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    overrides = {"stability": {}}
    if args.paths is not None:
        overrides["stability"]["n_paths"] = args.paths
    if args.seed is not None:
        overrides["stability"]["seed"] = args.seed
    spec = load_spec(args.profile, args.config, overrides, args.out, args.workers)
    cmd_simulate(spec, snapshots=False)
    res = cmd_stability(spec)

    print(f"\n{res.n_pairs} satellite pairs, {spec.n_paths} paths per chain length")
    print(f"{'fraction':>9} {'cv':>8} {'reference':>10}")
    for p, q in res.quantiles.items():
        print(f"{p:>9.0%} {q:>8.4f} {REFERENCE_PAIR_QUANTILES[p]:>10.3f}")
    print(f"\n{'M':>3} {'avg cv':>8} {'reference':>10} {'excluded':>9}")
    for m, r in res.reports.items():
        ref = REFERENCE_PATH_CV.get(m)
        print(f"{m:>3} {r.average_cv:>8.4f} {ref if ref is not None else float('nan'):>10.3f} {r.excluded:>9}")


if __name__ == "__main__":
    main()
