#!/usr/bin/env python
"""How well do the time-average and the t0 snapshot predict the delays a request sees?

For random pairs and start times, compares both predictors with the delay
actually read at t0 + lag, for a range of lags.  The snapshot predictor is
exact at lag 0 and decays toward the average as the lag approaches the
time scale over which inter-plane links rewire.
"""

import argparse

import numpy as np

from leosfc.config import load_spec
from leosfc.experiments import delay_tensor
from leosfc.pathdelay import average_matrix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", default="desk", choices=["desk", "paper"])
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--lags", default="0,10,30,60,120,300,600", help="seconds, comma separated")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = load_spec(args.profile)
    if spec.constellation.total_sats ** 2 * spec.constellation.n_slots * 8 > 1.5e9:
        raise SystemExit("needs the materialized tensor; use the desk profile or a coarser dt")
    tensor = delay_tensor(spec)
    avg = average_matrix(tensor).mean
    rng = np.random.default_rng(args.seed)
    n = tensor.n_nodes
    u = rng.integers(n, size=args.samples)
    v = (u + 1 + rng.integers(n - 1, size=args.samples)) % n
    k0 = rng.integers(tensor.n_slots, size=args.samples)

    print(f"{'lag_s':>6} {'mae_avg_ms':>11} {'mae_snap_ms':>12} {'snap_better':>12}")
    for lag in (float(x) for x in args.lags.split(",")):
        k = np.array([tensor.slot_of(tensor.times[a] + lag) for a in k0])
        truth = tensor.delays[u, v, k]
        e_avg = np.abs(avg[u, v] - truth)
        e_snap = np.abs(tensor.delays[u, v, k0] - truth)
        print(f"{lag:>6.0f} {1e3 * e_avg.mean():>11.3f} {1e3 * e_snap.mean():>12.3f} "
              f"{np.mean(e_snap < e_avg):>12.1%}")


if __name__ == "__main__":
    main()
