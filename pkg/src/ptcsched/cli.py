"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 invalid or infeasible input,
3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .filtering import RULE_SETS
from .instance import GenConfig, InstanceError, generate_instance, load_instance, save_instance
from .schedule import schedule_to_dict
from .solver import INFEASIBLE, SolverConfig, solve

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _InputError(Exception):
    pass


def _range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(",")
    try:
        lo_i, hi_i = int(lo), int(hi or lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI integers, got {text!r}") from None
    if lo_i > hi_i:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo_i, hi_i


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _InputError(str(exc)) from None


def cmd_solve(args) -> int:
    try:
        inst = load_instance(_read(args.instance))
    except InstanceError as exc:
        raise _InputError(f"{args.instance}: {exc}") from None
    cfg = SolverConfig(
        rules=args.rules,
        aggregation=args.agg,
        time_limit=args.time_limit,
        warm_start=args.warm,
        node_limit=args.node_limit,
    )
    res = solve(inst, cfg)
    payload = {
        "instance": args.instance,
        "algorithm": cfg.label,
        "status": res.status,
        "flowtime": res.flowtime,
        "disqualifications": res.disqualifications,
        "nodes": res.stats.nodes,
        "fails": res.stats.fails,
        "time_s": round(res.stats.wall_time, 3),
        "schedule": schedule_to_dict(res.schedule) if res.schedule else None,
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_INPUT if res.status == INFEASIBLE else EXIT_OK


def cmd_generate(args) -> int:
    cfg = GenConfig(
        n_jobs=args.n, machines=args.m, families=args.f,
        proc=args.proc, setup=args.setup, gamma=args.gamma,
        density=args.density, seed=args.seed,
    )
    try:
        inst = generate_instance(cfg)
    except InstanceError as exc:
        raise _InputError(str(exc)) from None
    _emit(save_instance(inst), args.out)
    return EXIT_OK


def _load_configs(path: str) -> list[SolverConfig]:
    try:
        raw = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if isinstance(raw, dict):
        raw = raw.get("algorithms", [])
    if not isinstance(raw, list) or not raw:
        raise _InputError(f"{path}: expected a non-empty list of algorithms")
    configs = []
    for entry in raw:
        try:
            if isinstance(entry, str):
                configs.append(SolverConfig.from_label(entry))
            elif isinstance(entry, dict):
                configs.append(
                    SolverConfig(
                        rules=entry.get("rules", "A"),
                        aggregation=entry.get("agg", "lex"),
                        warm_start=bool(entry.get("warm", False)),
                        time_limit=float(entry.get("time_limit", 300.0)),
                    )
                )
            else:
                raise ValueError(f"bad algorithm entry {entry!r}")
        except ValueError as exc:
            raise _InputError(f"{path}: {exc}") from None
    return configs


def cmd_bench(args) -> int:
    try:
        instances = bench.load_instance_dir(args.directory)
    except InstanceError as exc:
        raise _InputError(str(exc)) from None
    configs = _load_configs(args.configs)
    records = bench.run_suite(instances, configs, time_limit=args.time_limit, workers=args.jobs)
    _emit(bench.write_csv(records), args.out)
    return EXIT_OK


def _records(path: str) -> list[bench.RunRecord]:
    try:
        return bench.read_csv(_read(path))
    except ValueError as exc:
        raise _InputError(f"{path}: {exc}") from None


def cmd_rank(args) -> int:
    try:
        scores = bench.borda_ranking(_records(args.results))
    except ValueError as exc:
        raise _InputError(str(exc)) from None
    sys.stdout.write(bench.format_ranking(scores))
    return EXIT_OK


def cmd_contingency(args) -> int:
    try:
        table = bench.contingency_by_label(_records(args.results), args.a, args.b)
    except ValueError as exc:
        raise _InputError(str(exc)) from None
    sys.stdout.write(bench.format_contingency(table, args.a, args.b))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ptcsched", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one instance file")
    p.add_argument("instance")
    p.add_argument("--rules", choices=sorted(RULE_SETS), default="A")
    p.add_argument("--agg", choices=("lex", "sum"), default="lex")
    p.add_argument("--warm", action="store_true", help="start from the heuristics' best schedule")
    p.add_argument("--time-limit", type=float, default=300.0, metavar="S")
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="generate a random instance")
    p.add_argument("--n", type=int, required=True, help="number of jobs")
    p.add_argument("--m", type=int, required=True, help="number of machines")
    p.add_argument("--f", type=int, required=True, help="number of families")
    p.add_argument("--density", type=float, default=0.6, help="qualification probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--proc", type=_range, default=(1, 10), metavar="LO,HI")
    p.add_argument("--setup", type=_range, default=(0, 5), metavar="LO,HI")
    p.add_argument("--gamma", type=_range, default=(20, 60), metavar="LO,HI")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="run algorithms over a directory of instances")
    p.add_argument("directory")
    p.add_argument("--configs", required=True, help="JSON list of algorithm labels or objects")
    p.add_argument("--out")
    p.add_argument("--time-limit", type=float, default=None, metavar="S")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("rank", help="Borda ranking of a results CSV")
    p.add_argument("results")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("contingency", help="status contingency table of two algorithms")
    p.add_argument("results")
    p.add_argument("--a", required=True, metavar="LABEL")
    p.add_argument("--b", required=True, metavar="LABEL")
    p.set_defaults(func=cmd_contingency)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"ptcsched: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - last resort
        logging.getLogger(__name__).debug("internal error", exc_info=True)
        print(f"ptcsched: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
