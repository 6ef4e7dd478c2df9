"""Command-line front end.

Subcommands: ``gen`` writes a scenario file, ``schedule`` runs a scheduling
algorithm, ``certify`` checks the approximation guarantee by exhaustive
search, ``bounds`` reports the error-variance limits, and ``fuzz`` drives
the property fuzzers. Every command reads and writes JSON; output files are
written atomically. All randomness flows through an explicit --seed.

Exit codes: 0 success, 1 internal numeric failure, 2 invalid configuration
or flags, 3 size cap exceeded, 4 certified guarantee or fuzzed property
violated (an implementation-bug signal).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from contextlib import contextmanager

import numpy as np

from .analysis import (
    brute_force_opt,
    certify_ratio,
    error_lower_bound,
    fuzz_monotonicity,
    fuzz_supermodularity,
    min_sensors_for_error,
)
from .errors import (
    BatchSchedError,
    EnumerationCapExceeded,
    GuaranteeViolated,
    InvalidArgument,
    OracleCapExceeded,
    PropertyViolated,
)
from .model import (
    ModelKind,
    Schedule,
    load_scenario,
    model_fingerprint,
    random_scenario,
    save_scenario,
    write_text_atomic,
)
from .objective import batch_error_trace, build_evaluator, objective_logdet
from .scheduler import GreedyOptions, greedy_schedule

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_VIOLATION = 4

ALGORITHMS = ("greedy", "lazy-greedy", "brute", "random", "empty")


class _ConfigError(Exception):
    """Scenario file missing, unparseable, or invalid."""


class _Timer:
    def __init__(self):
        self.timings: dict[str, float] = {}

    @contextmanager
    def time(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = time.perf_counter() - start


def _load_model(path: str):
    try:
        return load_scenario(path)
    except FileNotFoundError:
        raise _ConfigError(f"scenario file not found: {path}") from None
    except BatchSchedError as exc:
        raise _ConfigError(str(exc)) from exc


def _write_report(path: str, payload: dict) -> None:
    write_text_atomic(path, json.dumps(payload, indent=2) + "\n")


def _trace_payload(trace) -> list[dict]:
    return [
        {"time_index": e.time_index, "sensor": e.sensor, "gain": e.gain, "objective": e.objective}
        for e in trace.entries
    ]


def _trace_csv(trace) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["time_index", "sensor", "gain", "objective"])
    for e in trace.entries:
        writer.writerow([e.time_index, e.sensor, repr(e.gain), repr(e.objective)])
    return buffer.getvalue()


def _random_schedule(model, seed: int) -> Schedule:
    rng = np.random.default_rng(seed)
    slots = []
    for r in model.budgets:
        if r:
            picked = rng.choice(model.sensor_count, size=r, replace=False)
            slots.append(tuple(sorted(int(i) for i in picked)))
        else:
            slots.append(())
    return Schedule(selections=tuple(slots))


def cmd_gen(args) -> int:
    model = random_scenario(
        seed=args.seed, n=args.n, m=args.m, K=args.K, r=args.r, kind=args.kind
    )
    save_scenario(model, args.out)
    print(f"wrote scenario {model_fingerprint(model)[:12]} to {args.out}")
    return EXIT_OK


def cmd_schedule(args) -> int:
    if args.csv is not None and args.algorithm not in ("greedy", "lazy-greedy"):
        raise InvalidArgument("--csv requires a greedy algorithm with a trace")
    timer = _Timer()
    with timer.time("load"):
        model = _load_model(args.config)
    with timer.time("build"):
        ev = build_evaluator(model)

    trace = None
    with timer.time("solve"):
        if args.algorithm in ("greedy", "lazy-greedy"):
            opts = GreedyOptions(lazy=(args.algorithm == "lazy-greedy"))
            schedule, trace = greedy_schedule(ev, model, opts)
            objective = objective_logdet(ev, schedule)
        elif args.algorithm == "brute":
            schedule, objective = brute_force_opt(ev, model)
        elif args.algorithm == "random":
            if args.seed is None:
                raise InvalidArgument("--seed is required for --algorithm random")
            schedule = _random_schedule(model, args.seed)
            objective = objective_logdet(ev, schedule)
        else:  # empty
            schedule = Schedule.empty(model.horizon)
            objective = objective_logdet(ev, schedule)

    report = {
        "fingerprint": model_fingerprint(model),
        "algorithm": args.algorithm,
        "schedule": schedule.to_lists(),
        "objective": objective,
    }
    if args.seed is not None:
        report["seed"] = args.seed
    if trace is not None:
        report["start_objective"] = trace.start_objective
        report["trace"] = _trace_payload(trace)
        report["gain_evaluations"] = trace.gain_evaluations
    report["timings"] = timer.timings
    with timer.time("write"):
        _write_report(args.out, report)
    if args.csv is not None:
        write_text_atomic(args.csv, _trace_csv(trace))
    print(f"{args.algorithm}: objective {objective:.9g}, schedule {schedule.to_lists()}")
    return EXIT_OK


def cmd_certify(args) -> int:
    timer = _Timer()
    with timer.time("load"):
        model = _load_model(args.config)
    with timer.time("build"):
        ev = build_evaluator(model)
    try:
        with timer.time("solve"):
            cert = certify_ratio(ev, model)
    except GuaranteeViolated as exc:
        payload = {
            "fingerprint": model_fingerprint(model),
            "violation": str(exc),
            "details": exc.details,
            "timings": timer.timings,
        }
        _write_report(args.out, payload)
        print(f"guarantee violated: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    payload = cert.to_dict()
    payload["timings"] = timer.timings
    with timer.time("write"):
        _write_report(args.out, payload)
    print(f"ratio {cert.ratio:.9g} (greedy {cert.greedy_value:.9g}, opt {cert.opt_value:.9g})")
    return EXIT_OK


def cmd_bounds(args) -> int:
    timer = _Timer()
    with timer.time("load"):
        model = _load_model(args.config)
    with timer.time("build"):
        ev = build_evaluator(model)
    with timer.time("solve"):
        report = {
            "fingerprint": model_fingerprint(model),
            "lower_bound": error_lower_bound(model),
        }
        if args.alpha is not None:
            report["min_sensors"] = min_sensors_for_error(model, args.alpha)
        schedule, _ = greedy_schedule(ev, model)
        report["trace_greedy"] = batch_error_trace(ev, schedule)
        report["trace_empty"] = batch_error_trace(ev, Schedule.empty(model.horizon))
    report["timings"] = timer.timings
    with timer.time("write"):
        _write_report(args.out, report)
    print(f"lower bound {report['lower_bound']:.9g}, greedy trace {report['trace_greedy']:.9g}")
    return EXIT_OK


def cmd_fuzz(args) -> int:
    timer = _Timer()
    with timer.time("load"):
        model = _load_model(args.config)
    fuzzer = fuzz_monotonicity if args.property == "mono" else fuzz_supermodularity
    try:
        with timer.time("solve"):
            report = fuzzer(model, args.trials, args.seed)
    except PropertyViolated as exc:
        payload = {
            "fingerprint": model_fingerprint(model),
            "property": args.property,
            "violation": str(exc),
            "counterexample": exc.counterexample,
            "timings": timer.timings,
        }
        if args.out is not None:
            _write_report(args.out, payload)
        else:
            print(json.dumps(payload, indent=2))
        print(f"property violated: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    payload = report.to_dict()
    payload["timings"] = timer.timings
    if args.out is not None:
        _write_report(args.out, payload)
    else:
        print(json.dumps(payload, indent=2))
    print(
        f"{report.property_name}: {report.effective_trials}/{report.trials} trials, "
        f"max excess {report.max_excess}"
    )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="batchsched",
        description="Sensor scheduling for minimum-variance batch state estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random scenario file")
    gen.add_argument("--n", type=int, required=True, help="state dimension")
    gen.add_argument("--m", type=int, required=True, help="number of sensors")
    gen.add_argument("--K", type=int, required=True, help="number of measurement times")
    gen.add_argument("--r", type=int, required=True, help="per-time sensor budget")
    gen.add_argument(
        "--kind",
        choices=[k.value for k in ModelKind],
        default=ModelKind.DISCRETE_INVARIANT.value,
    )
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=cmd_gen)

    sched = sub.add_parser("schedule", help="run a scheduling algorithm on a scenario")
    sched.add_argument("--config", required=True)
    sched.add_argument("--algorithm", choices=ALGORITHMS, default="greedy")
    sched.add_argument("--out", required=True)
    sched.add_argument("--seed", type=int, default=None, help="required for --algorithm random")
    sched.add_argument("--csv", default=None, help="also write the greedy trace as CSV")
    sched.set_defaults(handler=cmd_schedule)

    cert = sub.add_parser("certify", help="certify the greedy guarantee by brute force")
    cert.add_argument("--config", required=True)
    cert.add_argument("--out", required=True)
    cert.set_defaults(handler=cmd_certify)

    bounds = sub.add_parser("bounds", help="report error-variance limits")
    bounds.add_argument("--config", required=True)
    bounds.add_argument("--out", required=True)
    bounds.add_argument("--alpha", type=float, default=None, help="target total error variance")
    bounds.set_defaults(handler=cmd_bounds)

    fuzz = sub.add_parser("fuzz", help="fuzz a structural property of the objective")
    fuzz.add_argument("--config", required=True)
    fuzz.add_argument("--property", choices=("mono", "super"), required=True)
    fuzz.add_argument("--trials", type=int, required=True)
    fuzz.add_argument("--seed", type=int, required=True)
    fuzz.add_argument("--out", default=None)
    fuzz.set_defaults(handler=cmd_fuzz)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except _ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OracleCapExceeded, EnumerationCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except BatchSchedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
