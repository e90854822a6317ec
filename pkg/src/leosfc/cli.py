"""Command line entry point: ``leosfc {simulate,stability,benchmark,route}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_spec
from .experiments import MissingArtifact, cmd_benchmark, cmd_route, cmd_simulate, cmd_stability
from .router import ALGORITHMS
from .sfc import InfeasibleRequest, SfcRequest

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_MISSING = 0, 2, 3, 4


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML file overriding the profile defaults")
    common.add_argument("--profile", choices=["desk", "paper"], default="desk")
    common.add_argument("--out", type=Path, default=Path("out"), help="artifact directory")
    common.add_argument("--seed", type=int, help="seed for scenario, requests and path sampling")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="leosfc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="build the average-delay artifact")
    s.add_argument("--no-snapshots", action="store_true", help="skip the per-slot edge list")

    s = sub.add_parser("stability", parents=[common], help="pairwise and path CV study")
    s.add_argument("--chain-lengths", type=_int_list)
    s.add_argument("--paths", type=int, dest="n_paths")

    s = sub.add_parser("benchmark", parents=[common], help="compare routing algorithms")
    s.add_argument("--algorithms", type=_str_list)
    s.add_argument("--chain-lengths", type=_int_list)
    s.add_argument("--requests", type=int)
    s.add_argument("--timing", action="store_true", help="record wall-clock routing time (not reproducible)")

    s = sub.add_parser("route", parents=[common], help="route one request")
    s.add_argument("--request", required=True, help="JSON object or path to a JSON file")
    s.add_argument("--algorithm", choices=ALGORITHMS, default="sa-msgr")
    s.add_argument("--t0", type=float, default=0.0)
    return p


def _overrides(args) -> dict:
    o: dict = {}
    if args.seed is not None:
        o["scenario"] = {"seed": args.seed}
        o["benchmark"] = {"seed": args.seed}
        o["stability"] = {"seed": args.seed}
    chain = getattr(args, "chain_lengths", None)
    if args.command == "benchmark":
        b = o.setdefault("benchmark", {})
        if chain:
            b["chain_lengths"] = chain
        if args.algorithms:
            b["algorithms"] = args.algorithms
        if args.requests is not None:
            b["requests"] = args.requests
    if args.command == "stability":
        st = o.setdefault("stability", {})
        if chain:
            st["chain_lengths"] = chain
        if args.n_paths is not None:
            st["n_paths"] = args.n_paths
    return o


def _read_request(text: str) -> SfcRequest:
    path = Path(text)
    raw = path.read_text() if not text.lstrip().startswith("{") and path.exists() else text
    try:
        return SfcRequest.from_dict(json.loads(raw))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"request: {exc}") from None


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        spec = load_spec(args.profile, args.config, _overrides(args), args.out, args.workers,
                         timing=getattr(args, "timing", False))
        if args.command == "simulate":
            cmd_simulate(spec, snapshots=not args.no_snapshots)
            print(f"wrote {spec.out_dir / 'avg_delay.csv'} (config {spec.hash})")
        elif args.command == "stability":
            res = cmd_stability(spec)
            for p, q in res.quantiles.items():
                print(f"pairs with cv <= {q:.4f}: {p:.0%}")
            for m, r in res.reports.items():
                print(f"M={m:<3d} average path cv {r.average_cv:.4f}")
        elif args.command == "benchmark":
            _, summary = cmd_benchmark(spec)
            for s in summary:
                if s["n"]:
                    print(f"M={s['M']:<3d} {s['algorithm']:<10s} mean {s['mean_s']:.4f}s "
                          f"iqr {s['iqr_s']:.4f}s (n={s['n']}, excluded={s['excluded']})")
        elif args.command == "route":
            request = _read_request(args.request)
            try:
                res = cmd_route(spec, request, args.algorithm, args.t0)
            except ValueError as exc:
                raise ConfigError(f"request: {exc}") from None
            print(json.dumps(res.to_dict(), indent=1))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleRequest as exc:
        print(json.dumps({"error": "infeasible", "stage": exc.stage, "message": str(exc)}))
        return EXIT_INFEASIBLE
    except MissingArtifact as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_MISSING
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
