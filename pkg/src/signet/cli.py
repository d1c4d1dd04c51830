"""Command line front end.

Four subcommands share one scenario file format: ``simulate`` writes a
trajectory CSV, ``classify`` writes a convergence report, ``analyze`` dumps
the transition-matrix bundle at one time, and ``verify`` runs the check
suite. Exit codes are a stable contract: 0 success, 1 check failure,
2 usage or parse error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys

import numpy as np

from ._jsonfmt import dumps
from .dynamics import classify, simulate
from .errors import InternalConsistencyError, SignetError
from .scenario_io import parse_scenario
from .transition import lifted_transition
from .verify import (
    ScenarioSpec,
    registered_checks,
    run_suite,
    suite_workers,
    write_results_jsonl,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

# Suite run by ``signet verify`` when no config file is given: algebraic
# identities on a broad corpus, the integral oracles on a light-weight one,
# and the convergence statements on forced-balance corpora either way.
DEFAULT_SUITE = {
    "groups": [
        {
            "name": "identities",
            "count": 200,
            "seed_base": 0,
            "spec": {
                "sign_policy": "free",
                "connectivity": "strong-union",
                "n_range": [2, 6],
                "m_range": [1, 4],
                "weight_range": [0.5, 3.0],
                "tau_min": 0.3,
                "dwell_range": [0.3, 1.0],
                "horizon": 10.0,
            },
            "checks": [
                "split-identity",
                "decomposition",
                "even-odd-sum",
                "envelope-bound",
                "norm-bound",
                "substochastic",
                "block-symmetry",
                "semigroup",
                "gauge-similarity",
                "window-union",
            ],
        },
        {
            "name": "integral-oracles",
            "count": 20,
            "seed_base": 1000,
            "spec": {
                "sign_policy": "free",
                "connectivity": "strong-union",
                "n_range": [2, 4],
                "m_range": [1, 3],
                "weight_range": [0.3, 1.2],
                "tau_min": 0.3,
                "dwell_range": [0.3, 0.8],
                "horizon": 4.0,
            },
            "checks": ["series-oracle", "volterra-identity", "derivative-identities"],
        },
        {
            "name": "balanced-convergence",
            "count": 25,
            "seed_base": 2000,
            "spec": {
                "sign_policy": "balanced-forced",
                "connectivity": "strong-union",
                "n_range": [2, 5],
                "m_range": [1, 4],
                "weight_range": [1.0, 3.0],
                "tau_min": 0.4,
                "dwell_range": [0.4, 1.0],
                "horizon": 400.0,
            },
            "checks": [
                "balanced-limit",
                "even-odd-limits",
                "rate-fit",
                "classifier-consistency",
                "window-union",
            ],
        },
        {
            "name": "unbalanced-convergence",
            "count": 25,
            "seed_base": 3000,
            "spec": {
                "sign_policy": "unbalanced-forced",
                "connectivity": "strong-union",
                "n_range": [2, 5],
                "m_range": [1, 4],
                "weight_range": [1.0, 3.0],
                "tau_min": 0.4,
                "dwell_range": [0.4, 1.0],
                "horizon": 400.0,
            },
            "checks": [
                "unbalanced-decay",
                "even-odd-limits",
                "rate-fit",
                "classifier-consistency",
                "lifted-joint-connectivity",
            ],
        },
    ],
}


def _say(args, message: str):
    if not args.quiet:
        print(message)


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


class SignetUsageError(SignetError, ValueError):
    pass


def cmd_simulate(args) -> int:
    parsed = parse_scenario(args.scenario)
    signal = parsed.signal
    trajectory = simulate(
        signal, parsed.x0, signal.t0, signal.horizon, parsed.sample_dt
    )
    with _output(args.out) as fh:
        trajectory.write_csv(fh)
    final = trajectory.states[-1]
    bound = float(np.abs(parsed.x0).max(initial=0.0))
    peak = float(np.abs(trajectory.states).max(initial=0.0))
    _say(args, f"samples: {len(trajectory.times)}")
    _say(args, "final state: " + " ".join(format(v, ".17g") for v in final))
    _say(args, f"peak magnitude {peak:.6g} within initial bound {bound:.6g}: "
               f"{'yes' if peak <= bound + 1e-9 else 'NO'}")
    return EXIT_OK


def cmd_classify(args) -> int:
    parsed = parse_scenario(args.scenario)
    tols = parsed.tolerances
    tol_limit = args.tol if args.tol is not None else tols["tol_limit"]
    tol_zero = args.tol if args.tol is not None else tols["tol_zero"]
    report = classify(
        parsed.signal,
        parsed.signal.t0,
        tol_limit=tol_limit,
        tol_zero=tol_zero,
        x0=parsed.x0,
    )
    with _output(args.out) as fh:
        fh.write(dumps(report.to_json_dict(), indent=2) + "\n")
    _say(args, f"verdict: {report.verdict}")
    _say(args, f"graph-side verdict: {report.graph_verdict}")
    if report.inconsistency:
        _say(args, f"INCONSISTENT: {report.inconsistency}")
    if report.reason:
        _say(args, f"reason: {report.reason}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.t is None:
        raise SignetUsageError("analyze requires --t")
    parsed = parse_scenario(args.scenario)
    bundle = lifted_transition(parsed.signal, parsed.signal.t0, args.t)
    with _output(args.out) as fh:
        fh.write(dumps(bundle.to_report(), indent=2) + "\n")
    residuals = bundle.residuals()
    _say(args, "residuals: " + "  ".join(f"{k}={v:.3e}" for k, v in residuals.items()))
    return EXIT_OK


def _load_suite_config(path):
    if path is None:
        return DEFAULT_SUITE
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _build_specs(group: dict, seed_shift: int):
    known = {"name", "count", "seed_base", "spec", "checks"}
    unknown = set(group) - known
    if unknown:
        raise SignetUsageError(f"unknown suite group key(s) {sorted(unknown)}")
    raw = dict(group.get("spec", {}))
    for key in ("n_range", "m_range", "weight_range", "dwell_range"):
        if key in raw:
            raw[key] = tuple(raw[key])
    base = int(group.get("seed_base", 0)) + seed_shift
    return [ScenarioSpec(seed=base + k, **raw) for k in range(int(group["count"]))]


def cmd_verify(args) -> int:
    config = _load_suite_config(args.scenario)
    known = {"groups", "tolerances", "workers"}
    unknown = set(config) - known
    if unknown:
        raise SignetUsageError(f"unknown suite config key(s) {sorted(unknown)}")
    tolerances = {k: dict(v) for k, v in config.get("tolerances", {}).items()}
    if args.tol is not None:
        for check in registered_checks():
            tolerances.setdefault(check, {})["default"] = args.tol
    workers = suite_workers(config.get("workers"))
    seed_shift = args.seed if args.seed is not None else 0

    all_results = []
    combined = {"total": 0, "passed": 0, "failed": 0, "skipped": 0, "failures": []}
    for group in config.get("groups", []):
        specs = _build_specs(group, seed_shift)
        results, summary = run_suite(
            specs, checks=group.get("checks"), tolerances=tolerances, workers=workers
        )
        all_results.extend(results)
        for key in ("total", "passed", "failed", "skipped"):
            combined[key] += summary[key]
        combined["failures"].extend(summary["failures"])
        _say(
            args,
            f"group {group.get('name', '?')}: {summary['passed']} passed, "
            f"{summary['failed']} failed, {summary['skipped']} skipped",
        )
    with _output(args.out) as fh:
        write_results_jsonl(all_results, combined, fh)
    _say(
        args,
        f"total: {combined['passed']} passed, {combined['failed']} failed, "
        f"{combined['skipped']} skipped",
    )
    return EXIT_OK if combined["failed"] == 0 else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signet",
        description="Opinion dynamics on switching signed digraphs: "
        "simulate, classify, analyze, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, needs_scenario in (
        ("simulate", cmd_simulate, True),
        ("classify", cmd_classify, True),
        ("analyze", cmd_analyze, True),
        ("verify", cmd_verify, False),
    ):
        p = sub.add_parser(name)
        p.add_argument(
            "--scenario",
            required=needs_scenario,
            help="scenario file" if needs_scenario else "suite config file (optional)",
        )
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--t", type=float, help="analysis time (analyze)")
        p.add_argument("--seed", type=int, help="seed offset (verify)")
        p.add_argument("--tol", type=float, help="tolerance override")
        p.add_argument("--quiet", action="store_true", help="suppress summaries")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except OSError as exc:
        print(f"signet: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InternalConsistencyError as exc:
        print(f"signet: internal consistency check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except (SignetError, ValueError) as exc:
        print(f"signet: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
