#!/usr/bin/env python
"""Routing benchmark: mean and IQR of realized SFC delay per algorithm and chain length.

    python scripts/run_benchmark.py --out out/bench
    python scripts/run_benchmark.py --chain-lengths 15 --requests 300 --workers 2
"""

import argparse
import logging
from pathlib import Path

from leosfc.config import load_spec
from leosfc.experiments import cmd_benchmark, cmd_simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", default="desk", choices=["desk", "paper"])
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, default=Path("out/bench"))
    ap.add_argument("--chain-lengths", type=lambda s: [int(x) for x in s.split(",")])
    ap.add_argument("--requests", type=int)
    ap.add_argument("--algorithms", type=lambda s: s.split(","))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    bench = {k: v for k, v in (("chain_lengths", args.chain_lengths), ("requests", args.requests),
                               ("algorithms", args.algorithms), ("seed", args.seed)) if v is not None}
    spec = load_spec(args.profile, args.config, {"benchmark": bench}, args.out, args.workers)
    cmd_simulate(spec, snapshots=False)
    _, summary = cmd_benchmark(spec)

    print(f"\n{'M':>3} {'algorithm':<10} {'n':>4} {'mean_s':>9} {'median_s':>9} {'iqr_s':>8}")
    for s in summary:
        if s["n"]:
            print(f"{s['M']:>3} {s['algorithm']:<10} {s['n']:>4} {s['mean_s']:>9.4f} "
                  f"{s['median_s']:>9.4f} {s['iqr_s']:>8.4f}")
        else:
            print(f"{s['M']:>3} {s['algorithm']:<10}    0 (all {s['excluded']} infeasible)")


if __name__ == "__main__":
    main()
