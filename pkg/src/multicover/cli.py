"""Command-line entry point: ``multicover {gen,solve,verify,bench,cutting}``.

Exit codes: 0 success, 1 infeasible or deficient cover, 2 input error,
3 internal or budget failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .cutting import build_cutting, decay_statistics, shallow_cell_count, verify_cutting
from .errors import InfeasibleError, InputError, MultiCoverError
from .generators import KINDS, GeneratorSpec, generate
from .geometry import write_svg
from .harness import (
    METHODS,
    BenchSuite,
    aggregate,
    bench,
    dumps_solution,
    parse_params,
    run_method,
    solution_dict,
)
from .instance import CoverSolution, dumps_instance, is_feasible_cover, load_instance
from .lp import build_lp

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _load(path):
    try:
        return load_instance(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def cmd_gen(args):
    if args.spec:
        spec = GeneratorSpec.from_dict(_read_json(args.spec))
    else:
        spec = GeneratorSpec(kind=args.kind, n=args.n, m=args.m, d_max=args.d_max, d_min=args.d_min,
                             density=args.density, repetition_allowed=args.repetition, seed=args.seed)
    _write(args.out, dumps_instance(generate(spec)))
    return EXIT_OK


def cmd_solve(args):
    inst = _load(args.instance)
    params = parse_params(args.params)
    if args.dump_lp:
        build_lp(inst).dump(args.dump_lp)
    cover, rec = run_method(inst, args.method, args.seed, params)
    if not rec.feasible:
        raise MultiCoverError("solver returned an infeasible cover")
    _write(args.out, dumps_solution(solution_dict(inst, cover, args.method, args.seed, rec.optimal)))
    if args.results:
        with open(args.results, "a", encoding="utf-8") as fh:
            fh.write(rec.to_json() + "\n")
    if args.out not in (None, "-"):
        print(rec.to_json())
    return EXIT_OK


def cmd_verify(args):
    inst = _load(args.instance)
    data = _read_json(args.solution)
    chosen = data.get("chosen") if isinstance(data, dict) else data
    if not isinstance(chosen, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in chosen):
        raise InputError("solution must hold a list of integer range ids under 'chosen'")
    report = is_feasible_cover(inst, CoverSolution.of(chosen))
    out = {"feasible": report.feasible, "size": len(chosen),
           "deficits": {str(k): v for k, v in sorted(report.deficits.items())}}
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_bench(args):
    if args.suite:
        suite = BenchSuite.from_dict(_read_json(args.suite))
    else:
        spec = GeneratorSpec(kind=args.kind, n=args.n, m=args.m, d_max=args.d_max, d_min=args.d_min,
                             density=args.density, repetition_allowed=args.repetition)
        methods = args.methods.split(",") if args.methods else list(METHODS)
        suite = BenchSuite([spec], methods, list(range(args.seed, args.seed + args.seeds)),
                           {m: parse_params(args.params) for m in methods})
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            records, _ = bench(suite, fh)
    else:
        records, _ = bench(suite)
    print(json.dumps(aggregate(records), indent=1, sort_keys=True))
    return EXIT_OK


def cmd_cutting(args):
    inst = _load(args.instance)
    if not inst.is_geometric:
        raise InputError("cutting needs a halfplane instance")
    H = [inst.halfplane(i) for i in inst.range_ids]
    cut = build_cutting(H, args.r, seed=args.seed, points=inst.coords)
    check = verify_cutting(cut, H, args.r)
    out = {**cut.summary(), "verified": check.ok, "reason": check.reason}
    if args.k is not None:
        count, bound = shallow_cell_count(cut, H, args.k)
        out.update({"k": args.k, "shallow_cells": count, "shallow_bound": bound})
    if args.decay:
        out["decay"] = decay_statistics(H, args.r, range(args.seed, args.seed + args.decay)).to_dict()
    if args.svg:
        write_svg(args.svg, cut.cells, cut.to_frame(inst.coords), cut.box)
    _write(args.out, json.dumps(out, indent=1, sort_keys=True) + "\n")
    return EXIT_OK if check.ok else EXIT_INTERNAL


def build_parser():
    p = argparse.ArgumentParser(prog="multicover", description="Geometric set multi-cover solvers.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def gen_flags(q):
        q.add_argument("--kind", choices=KINDS, default="abstract-random")
        q.add_argument("--n", type=int, default=20)
        q.add_argument("--m", type=int, default=15)
        q.add_argument("--d-max", type=int, default=2)
        q.add_argument("--d-min", type=int, default=1)
        q.add_argument("--density", type=float, default=0.5)
        q.add_argument("--repetition", action="store_true")

    g = sub.add_parser("gen", help="generate a random instance")
    gen_flags(g)
    g.add_argument("--spec", help="generator spec as a JSON file (overrides the flags)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("instance")
    s.add_argument("--method", choices=METHODS, default="vc")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--params", help="key=value,... (delta_star, alpha, c, C_u, kappa, blend, profile, ...)")
    s.add_argument("--out", help="solution file (default: stdout)")
    s.add_argument("--results", help="append the result record to this JSONL file")
    s.add_argument("--dump-lp", help="write the LP as sparse triplets")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution against an instance")
    v.add_argument("instance")
    v.add_argument("solution")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run a benchmark grid")
    b.add_argument("--suite", help="suite JSON: generators, methods, seeds, params")
    gen_flags(b)
    b.add_argument("--methods", help="comma-separated methods (default: all)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--seeds", type=int, default=5, help="number of consecutive seeds")
    b.add_argument("--params")
    b.add_argument("--out", help="JSONL file for the per-run records")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("cutting", help="build and inspect a cutting of an instance's halfplanes")
    c.add_argument("instance")
    c.add_argument("--r", type=float, default=8.0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--k", type=float, help="report cells of depth at most k")
    c.add_argument("--decay", type=int, default=0, help="excess statistics over this many seeds")
    c.add_argument("--svg")
    c.add_argument("--out")
    c.set_defaults(func=cmd_cutting)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MultiCoverError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
