"""Command-line entry point.

Exit codes: 0 success, 1 an experiment verdict failed, 2 bad usage or
invalid parameters, 3 a state space above the enumeration cap was refused.
Results print as a short summary; --out writes the data table as CSV and
--json the full report, both atomically.
"""

from __future__ import annotations

import argparse
import inspect
import json
import os
import sys

from ._version import __version__
from .experiments import REGISTRY
from .statespace import StateCapExceeded

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2
EXIT_CAP = 3

FORCE_FAIL_ENV = "SHUFFLECUT_FORCE_FAIL"


def _k_value(text: str):
    return text if text == "half" else int(text)


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--out", metavar="CSV", help="write the data table here")
    sp.add_argument("--json", metavar="JSON", dest="json_out",
                    help="write the full report here")
    sp.add_argument("--config", metavar="FILE",
                    help="JSON file of parameters; explicit flags win")
    sp.add_argument("--threads", type=int, default=None,
                    help="worker thread budget (kernels here are single threaded)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="shufflecut",
        description="Experiments on adjacent-transposition shuffles and "
                    "their particle projections.")
    p.add_argument("--version", action="version",
                   version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    sub.add_parser("list-experiments", help="print available experiments")

    sp = sub.add_parser("tv-upper-curve",
                        help="coupling upper bound on distance to uniform")
    sp.add_argument("--model", choices=("at", "sep"))
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=_k_value)
    sp.add_argument("--times", type=float, nargs="+")
    sp.add_argument("--replicas", type=int)
    sp.add_argument("--coupling", choices=("grand", "corner"))
    sp.add_argument("--mode", choices=("exact", "mc"))
    sp.add_argument("--seed", type=int)
    _add_common(sp)

    sp = sub.add_parser("area-audit",
                        help="corner census and area supermartingale audit")
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=_k_value)
    sp.add_argument("--times", type=float, nargs="+")
    sp.add_argument("--replicas", type=int)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--seed", type=int)
    _add_common(sp)

    sp = sub.add_parser("cutoff-profile",
                        help="mixing-time window statistics across sizes")
    sp.add_argument("--n", type=int, nargs="+", dest="ns")
    sp.add_argument("--k", type=_k_value)
    sp.add_argument("--eps-levels", type=float, nargs=3, dest="eps_levels")
    sp.add_argument("--rtol", type=float)
    _add_common(sp)

    sp = sub.add_parser("separation-profile",
                        help="separation distance from the top configuration")
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=_k_value)
    sp.add_argument("--times", type=float, nargs="+")
    _add_common(sp)

    sp = sub.add_parser("three-phase-schedule",
                        help="censored three-phase protocol")
    sp.add_argument("--n", type=int)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--replicas", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--mode", choices=("exact", "mc"))
    _add_common(sp)

    sp = sub.add_parser("wilson-sandwich",
                        help="exact worst-start distance between its bounds")
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=_k_value)
    sp.add_argument("--points", type=int)
    sp.add_argument("--t-lo", type=float, dest="t_lo")
    sp.add_argument("--t-hi", type=float, dest="t_hi")
    _add_common(sp)
    return p


def _gather_params(args: argparse.Namespace, func) -> dict:
    accepted = set(inspect.signature(func).parameters)
    merged: dict = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ValueError("config must be a JSON object")
        unknown = sorted(set(cfg) - accepted)
        if unknown:
            raise ValueError(f"config keys not understood: {', '.join(unknown)}")
        merged.update(cfg)
    skip = {"command", "out", "json_out", "config", "threads"}
    for key, val in vars(args).items():
        if key in skip or val is None:
            continue
        merged[key] = val
    if merged.get("k") == "half" and "ns" not in accepted:
        n = merged.get("n", inspect.signature(func).parameters["n"].default)
        merged["k"] = int(n) // 2
    return merged


def _apply_threads(threads: int | None) -> None:
    if threads is None:
        return
    if threads < 1:
        raise ValueError("threads must be at least 1")
    import numba

    available = len(os.sched_getaffinity(0))
    numba.set_num_threads(max(1, min(threads, available)))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list-experiments":
        for name in REGISTRY:
            print(name)
        return EXIT_OK
    func = REGISTRY[args.command]
    try:
        _apply_threads(args.threads)
        params = _gather_params(args, func)
        report = func(**params)
    except StateCapExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if os.environ.get(FORCE_FAIL_ENV):
        report.add_verdict("forced-failure", False,
                           f"injected via {FORCE_FAIL_ENV} for exit-code tests")
    if args.out:
        report.to_csv(args.out)
    if args.json_out:
        report.to_json(args.json_out)
    print("\n".join(report.summary_lines()))
    return EXIT_OK if report.passed else EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
