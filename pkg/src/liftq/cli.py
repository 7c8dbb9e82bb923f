"""Command-line front end.

    liftq run --schema S --data D (--query NAME | --plan F) [--no-opt]
              [--phases p1,p2,...] [--explain] [--stats] [--out F]
    liftq explain --schema S (--query NAME | --plan F)
    liftq bench --join-n N --seed S [--no-opt]

Results go to stdout as JSON; plans and statistics requested alongside a
``run`` go to stderr so stdout stays machine-readable.
Exit codes: 0 ok, 2 usage, 3 parse/typing/data error, 4 evaluation error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .data import gen_join_benchmark, load_data, load_descriptor, root_consts, value_to_json
from .errors import EvaluationError, IterationLimitExceeded, QueryError
from .interp import CostCounters, interpret
from .optimizer import DEFAULT_PHASE_ORDER, make_pipeline, optimize
from .plan import parse_plan, print_plan
from .queries import NAMED_QUERIES

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_RUNTIME = 4


class UsageError(Exception):
    pass


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _pipeline(phases):
    if phases is None:
        return None
    names = [n.strip() for n in phases.split(",") if n.strip()]
    try:
        return make_pipeline(names)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _build_query(args, descriptor, values):
    roots = root_consts(descriptor, values)
    if args.query is not None:
        return NAMED_QUERIES[args.query](descriptor.registry, roots)
    return parse_plan(_read(args.plan), descriptor.registry, roots=roots)


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--query", choices=sorted(NAMED_QUERIES), help="built-in query name")
    src.add_argument("--plan", metavar="F", help="file holding a plan S-expression")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="liftq", description="Optimize and run reified collection queries.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a query and print the result as JSON")
    run.add_argument("--schema", required=True, metavar="F", help="descriptor JSON")
    run.add_argument("--data", required=True, metavar="F", help="data JSON")
    _add_source(run)
    run.add_argument("--no-opt", action="store_true", help="skip optimization")
    run.add_argument("--phases", metavar="P1,P2,...",
                     help=f"phase order (default: {','.join(DEFAULT_PHASE_ORDER)})")
    run.add_argument("--explain", action="store_true",
                     help="print the plan before and after optimization to stderr")
    run.add_argument("--stats", action="store_true",
                     help="print cost counters and wall time to stderr")
    run.add_argument("--out", metavar="F", help="write the result here instead of stdout")

    explain = sub.add_parser("explain", help="print a plan before and after optimization")
    explain.add_argument("--schema", required=True, metavar="F", help="descriptor JSON")
    _add_source(explain)
    explain.add_argument("--phases", metavar="P1,P2,...", help="phase order")

    bench = sub.add_parser("bench", help="run the equi-join benchmark")
    bench.add_argument("--join-n", type=int, required=True, metavar="N")
    bench.add_argument("--seed", type=int, required=True, metavar="S")
    bench.add_argument("--no-opt", action="store_true", help="skip optimization")
    return parser


def cmd_run(args, out, err):
    pipeline = _pipeline(args.phases)
    descriptor = load_descriptor(_read(args.schema))
    values = load_data(descriptor, _read(args.data))
    query = _build_query(args, descriptor, values)
    plan = query if args.no_opt else optimize(query, pipeline)
    if args.explain:
        err.write(f"before:\n{print_plan(query)}\n\nafter:\n{print_plan(plan)}\n")
    counters = CostCounters()
    start = time.perf_counter()
    result = interpret(plan, counters=counters)
    elapsed = time.perf_counter() - start
    text = json.dumps(value_to_json(result, plan.tag), indent=2) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror}") from None
    else:
        out.write(text)
    if args.stats:
        err.write(json.dumps({**counters.as_dict(), "seconds": elapsed}) + "\n")
    return EXIT_OK


def cmd_explain(args, out, err):
    pipeline = _pipeline(args.phases)
    descriptor = load_descriptor(_read(args.schema))
    query = _build_query(args, descriptor, None)
    out.write(f"before:\n{print_plan(query)}\n\nafter:\n{print_plan(optimize(query, pipeline))}\n")
    return EXIT_OK


def cmd_bench(args, out, err):
    if args.join_n < 1:
        raise UsageError("--join-n must be positive")
    descriptor, values = gen_join_benchmark(args.join_n, args.seed)
    query = NAMED_QUERIES["equijoin"](descriptor.registry, root_consts(descriptor, values))
    start = time.perf_counter()
    plan = query if args.no_opt else optimize(query)
    optimized_at = time.perf_counter()
    counters = CostCounters()
    result = interpret(plan, counters=counters)
    done = time.perf_counter()
    report = {
        "n": args.join_n,
        "seed": args.seed,
        "optimized": not args.no_opt,
        **counters.as_dict(),
        "resultSize": len(result),
        "optimizeSeconds": optimized_at - start,
        "evalSeconds": done - optimized_at,
    }
    out.write(json.dumps(report, indent=2) + "\n")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "explain": cmd_explain, "bench": cmd_bench}


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        err.write(f"liftq: {exc}\n")
        return EXIT_USAGE
    except (EvaluationError, IterationLimitExceeded) as exc:
        err.write(f"liftq: evaluation failed: {exc}\n")
        return EXIT_RUNTIME
    except QueryError as exc:
        err.write(f"liftq: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
