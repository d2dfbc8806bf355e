"""Experiment harness: batch runs, CSV reports, Borda ranking, contingency tables."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .instance import Instance, InstanceError, load_instance
from .solver import INFEASIBLE, OPT, SAT, UNK, SolverConfig, solve

log = logging.getLogger(__name__)

STATUSES = (OPT, SAT, UNK)
CSV_COLUMNS = ("instance", "algorithm", "status", "flowtime", "disq", "time_s", "nodes", "fails")
NO_SOLUTION = "none"


@dataclass(frozen=True)
class RunRecord:
    instance: str
    algorithm: str
    status: str
    flowtime: int | None = None
    disq: int | None = None
    time_s: float = 0.0
    nodes: int = 0
    fails: int = 0
    infeasible: bool = False

    @property
    def objective(self) -> tuple[int, int] | None:
        if self.flowtime is None:
            return None
        return (self.flowtime, self.disq)


@dataclass(frozen=True)
class BordaScore:
    algorithm: str
    score: Fraction


def _run_one(name: str, inst: Instance, cfg: SolverConfig) -> RunRecord:
    try:
        res = solve(inst, cfg)
    except Exception:  # recorded, the suite goes on
        log.exception("instance %s, algorithm %s failed", name, cfg.label)
        return RunRecord(name, cfg.label, UNK)
    st = res.stats
    if res.status == INFEASIBLE:
        return RunRecord(name, cfg.label, OPT, None, None, st.wall_time, st.nodes, st.fails, True)
    if res.status == UNK:
        return RunRecord(name, cfg.label, UNK, None, None, st.wall_time, st.nodes, st.fails)
    return RunRecord(
        name, cfg.label, res.status, res.flowtime, res.disqualifications,
        st.wall_time, st.nodes, st.fails,
    )


def run_suite(
    instances: Sequence[tuple[str, Instance]],
    configs: Sequence[SolverConfig],
    time_limit: float | None = None,
    workers: int = 1,
) -> list[RunRecord]:
    """One record per (instance, algorithm), sorted by instance then label."""
    if time_limit is not None:
        configs = [replace(cfg, time_limit=time_limit) for cfg in configs]
    tasks = [(name, inst, cfg) for name, inst in instances for cfg in configs]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, *zip(*tasks)))
    else:
        records = [_run_one(*task) for task in tasks]
    return sorted(records, key=lambda r: (r.instance, r.algorithm))


def load_instance_dir(directory: str | Path) -> list[tuple[str, Instance]]:
    """Every ``*.json`` instance of a directory, named by file stem."""
    out = []
    for path in sorted(Path(directory).glob("*.json")):
        try:
            out.append((path.stem, load_instance(path.read_text(encoding="utf-8"))))
        except InstanceError as exc:
            raise InstanceError(f"{path.name}: {exc}") from None
    return out


def _cell(value) -> str:
    return "" if value is None else str(value)


def write_csv(records: Iterable[RunRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in sorted(records, key=lambda r: (r.instance, r.algorithm)):
        if r.infeasible:
            ft = disq = NO_SOLUTION
        else:
            ft, disq = _cell(r.flowtime), _cell(r.disq)
        writer.writerow([r.instance, r.algorithm, r.status, ft, disq, f"{r.time_s:.3f}", r.nodes, r.fails])
    return out.getvalue()


def read_csv(text: str) -> list[RunRecord]:
    rows = csv.DictReader(io.StringIO(text))
    if rows.fieldnames is None or tuple(rows.fieldnames) != CSV_COLUMNS:
        raise ValueError(f"expected CSV columns {','.join(CSV_COLUMNS)}")
    records = []
    for lineno, row in enumerate(rows, start=2):
        status = row["status"]
        if status not in STATUSES:
            raise ValueError(f"line {lineno}: unknown status {status!r}")
        infeasible = row["flowtime"] == NO_SOLUTION
        ft = None if infeasible or row["flowtime"] == "" else int(row["flowtime"])
        disq = None if infeasible or row["disq"] == "" else int(row["disq"])
        records.append(
            RunRecord(
                row["instance"], row["algorithm"], status, ft, disq,
                float(row["time_s"] or 0), int(row["nodes"] or 0), int(row["fails"] or 0),
                infeasible,
            )
        )
    return records


def _answer_key(r: RunRecord) -> tuple:
    # status first, then the (flow time, disqualifications) pair
    return (STATUSES.index(r.status), r.objective or ())


def _by_instance(records: Iterable[RunRecord]) -> dict[str, dict[str, RunRecord]]:
    table: dict[str, dict[str, RunRecord]] = {}
    for r in records:
        table.setdefault(r.instance, {})[r.algorithm] = r
    return table


def fractional_ranks(keys: Sequence) -> list[Fraction]:
    """Rank 1 for the smallest key; tied keys share the mean of their ranks."""
    order = sorted(range(len(keys)), key=lambda i: keys[i])
    ranks = [Fraction(0)] * len(keys)
    pos = 0
    while pos < len(order):
        end = pos
        while end + 1 < len(order) and keys[order[end + 1]] == keys[order[pos]]:
            end += 1
        mean = Fraction(pos + 1 + end + 1, 2)
        for i in order[pos:end + 1]:
            ranks[i] = mean
        pos = end + 1
    return ranks


def borda_ranking(records: Iterable[RunRecord]) -> list[BordaScore]:
    """Sum of per-instance fractional ranks; lower is better.

    Raises:
        ValueError: when some (instance, algorithm) pair has no record.
    """
    table = _by_instance(records)
    algorithms = sorted({a for row in table.values() for a in row})
    scores = {a: Fraction(0) for a in algorithms}
    for name, row in sorted(table.items()):
        missing = [a for a in algorithms if a not in row]
        if missing:
            raise ValueError(f"instance {name}: no record for {', '.join(missing)}")
        ranks = fractional_ranks([_answer_key(row[a]) for a in algorithms])
        for a, rank in zip(algorithms, ranks):
            scores[a] += rank
    return sorted((BordaScore(a, s) for a, s in scores.items()), key=lambda b: (b.score, b.algorithm))


def contingency(records_a: Iterable[RunRecord], records_b: Iterable[RunRecord]) -> list[list[int]]:
    """3x3 counts, rows by status under A, columns by status under B (OPT, SAT, UNK)."""
    a = {r.instance: r.status for r in records_a}
    b = {r.instance: r.status for r in records_b}
    if set(a) != set(b):
        raise ValueError(f"instance sets differ: {sorted(set(a) ^ set(b))}")
    table = [[0] * 3 for _ in STATUSES]
    for name, status in a.items():
        table[STATUSES.index(status)][STATUSES.index(b[name])] += 1
    return table


def contingency_by_label(records: Iterable[RunRecord], label_a: str, label_b: str) -> list[list[int]]:
    records = list(records)
    ra = [r for r in records if r.algorithm == label_a]
    rb = [r for r in records if r.algorithm == label_b]
    if not ra or not rb:
        raise ValueError(f"no records for {label_a if not ra else label_b}")
    return contingency(ra, rb)


def _fmt_score(score: Fraction) -> str:
    return str(score.numerator) if score.denominator == 1 else f"{float(score):.1f}"


def format_ranking(scores: Iterable[BordaScore]) -> str:
    lines = [f"{'Algorithm':<10} {'Score':>8}"]
    lines += [f"{s.algorithm:<10} {_fmt_score(s.score):>8}" for s in scores]
    return "\n".join(lines) + "\n"


def format_contingency(table: list[list[int]], label_a: str, label_b: str) -> str:
    width = max(len(label_a), 4)
    lines = [f"{label_a:<{width}} | {label_b}", f"{'':<{width}} | " + " ".join(f"{s:>5}" for s in STATUSES)]
    for status, row in zip(STATUSES, table):
        lines.append(f"{status:<{width}} | " + " ".join(f"{c:>5}" for c in row))
    return "\n".join(lines) + "\n"
