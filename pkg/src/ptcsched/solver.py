"""Exact branch-and-bound for flow time, then disqualifications.

Search: depth first.  A node holds one left-packed prefix per machine;
machines are filled in index order.  A child either appends one job of a
family (SPT order, then id) to the open machine, or closes it.  Jobs of a
family are interchangeable, so a prefix is a sequence of family labels.
Only left-packed schedules are explored: inserting idle time never repairs
a qualification gap and strictly increases the flow time.

Every node carries a :class:`~ptcsched.filtering.DomainStore`; a propagation
failure prunes the node.  The global flow-time upper bound comes from the
incumbent, which is how the cost-based rules cut.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable

from . import filtering
from .filtering import INF, DomainStore, Failure
from .heuristics import qualification_centric, scheduling_centric
from .instance import Instance
from .schedule import Schedule, ScheduledJob, count_disqualifications, flowtime, left_pack

OPT, SAT, UNK, INFEASIBLE = "OPT", "SAT", "UNK", "INFEASIBLE"

_RULE_LETTER = {v: ("_" if k == "none" else k) for k, v in filtering.RULE_SETS.items()}


@dataclass(frozen=True)
class SolverConfig:
    rules: frozenset[int] = filtering.RULE_SETS["A"]
    aggregation: str = "lex"
    time_limit: float = 300.0
    warm_start: bool = False
    node_limit: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", filtering.rule_set(self.rules))
        if self.aggregation not in ("lex", "sum"):
            raise ValueError(f"aggregation must be 'lex' or 'sum', got {self.aggregation!r}")

    @property
    def label(self) -> str:
        """Five-letter name: model, heuristic, rules, aggregation, priority."""
        rules = _RULE_LETTER.get(self.rules)
        if rules is None:
            rules = "R" + "".join(map(str, sorted(self.rules)))
        return "N" + ("H" if self.warm_start else "_") + rules + (
            "L" if self.aggregation == "lex" else "S"
        ) + "F"

    @classmethod
    def from_label(cls, label: str, **kwargs) -> SolverConfig:
        if len(label) != 5 or label[0] != "N" or label[4] != "F":
            raise ValueError(f"unsupported algorithm label {label!r}")
        if label[1] not in "H_" or label[3] not in "LS":
            raise ValueError(f"unsupported algorithm label {label!r}")
        return cls(
            rules=filtering.rule_set(label[2]),
            aggregation="lex" if label[3] == "L" else "sum",
            warm_start=label[1] == "H",
            **kwargs,
        )


@dataclass
class Stats:
    nodes: int = 0
    fails: int = 0
    wall_time: float = 0.0
    phase_nodes: list[int] = field(default_factory=list)


@dataclass
class SolveResult:
    status: str
    schedule: Schedule | None = None
    flowtime: int | None = None
    disqualifications: int | None = None
    stats: Stats = field(default_factory=Stats)

    @property
    def objective(self) -> tuple[int, int] | None:
        if self.flowtime is None:
            return None
        return (self.flowtime, self.disqualifications)


class _Stop(Exception):
    pass


class _Search:
    """One depth-first search over left-packed schedules.

    ``mode`` selects the objective: ``"ft"`` minimizes flow time, ``"disq"``
    minimizes disqualifications among schedules with flow time ``ft_cap``,
    ``"sum"`` minimizes ``weight * flowtime + disqualifications``.
    """

    def __init__(self, inst: Instance, cfg: SolverConfig, stats: Stats, deadline: float):
        self.inst = inst
        self.cfg = cfg
        self.stats = stats
        self.deadline = deadline
        self.M = inst.machines
        self.F = inst.n_families
        self.N = inst.n_jobs
        fams = inst.families
        self.proc = [f.proc for f in fams]
        self.setup = [f.setup for f in fams]
        self.gamma = [f.gamma for f in fams]
        self.qual = [[m + 1 in fams[f].qualified for f in range(self.F)] for m in range(self.M)]
        self.qual_pairs = [(f, m) for f in range(self.F) for m in range(self.M) if self.qual[m][f]]
        self.order = sorted(range(self.F), key=lambda f: (self.proc[f], f))
        self.weight = inst.max_disqualifications() + 1
        self.mode = "ft"
        self.ft_cap = INF
        self.best_key: tuple | None = None
        self.best_seqs: list[list[int]] | None = None

    # -- state ----------------------------------------------------------

    def _reset(self) -> None:
        self.seqs: list[list[int]] = [[] for _ in range(self.M)]
        self.end = [0] * self.M
        self.prefix_ft = [0] * self.M
        self.last_start = [[-1] * self.F for _ in range(self.M)]
        self.remaining = [fam.jobs for fam in self.inst.families]
        self.left = self.N
        self.cur = 0

    def _start_time(self, m: int, f: int) -> int | None:
        seq = self.seqs[m]
        start = self.end[m]
        if seq and seq[-1] != f:
            start += self.setup[f]
        if start - max(self.last_start[m][f], 0) > self.gamma[f]:
            return None
        return start

    def _disq(self) -> int:
        T = max(self.end)
        return sum(
            1 for f, m in self.qual_pairs
            if T - max(self.last_start[m][f], 0) > self.gamma[f]
        )

    def _certain_disq(self) -> int:
        """Pairs already lost whatever the completion of the node."""
        T = max(self.end)
        n = 0
        for f, m in self.qual_pairs:
            ref = max(self.last_start[m][f], 0)
            if m < self.cur or self.remaining[f] == 0:
                if T - ref > self.gamma[f]:
                    n += 1
            elif self.end[m] - ref > self.gamma[f]:
                n += 1
        return n

    # -- bounds ---------------------------------------------------------

    def _key(self, ft: int, d: int) -> tuple:
        if self.mode == "sum":
            return (self.weight * ft + d,)
        if self.mode == "disq":
            return (d,)
        return (ft, d)

    def _ft_ub(self) -> int:
        """Largest total flow time a strictly better leaf could have."""
        if self.best_key is None:
            return self.ft_cap
        if self.mode == "ft":
            return min(self.ft_cap, self.best_key[0] - 1)
        if self.mode == "disq":
            return self.ft_cap
        return (self.best_key[0] - 1 - self._certain_disq()) // self.weight

    def _bound_prunes(self, store: DomainStore) -> bool:
        if self.best_key is None or self.mode == "ft":
            return False
        d = self._certain_disq()
        if self.mode == "disq":
            return d >= self.best_key[0]
        return self.weight * store.total_lb + d >= self.best_key[0]

    def _tick(self) -> None:
        self.stats.nodes += 1
        if self.cfg.node_limit is not None and self.stats.nodes > self.cfg.node_limit:
            raise _Stop
        if self.stats.nodes % 256 == 0 and time.perf_counter() > self.deadline:
            raise _Stop

    # -- search ---------------------------------------------------------

    def root_store(self) -> DomainStore:
        store = DomainStore(self.inst)
        store.total_ub = min(store.total_ub, self._ft_ub())
        return filtering.propagate(store, self.cfg.rules)

    def run(self, mode: str, ft_cap: int = INF) -> bool:
        """Search to completion; False if a limit interrupted it."""
        self.mode = mode
        self.ft_cap = ft_cap
        self._reset()
        try:
            self._tick()
            store = self.root_store()
        except Failure:
            self.stats.fails += 1
            return True
        except _Stop:
            return False
        try:
            self._dfs(store)
        except _Stop:
            return False
        return True

    def offer(self, seqs: list[list[int]], ft: int, d: int) -> None:
        key = self._key(ft, d)
        if self.mode == "disq" and ft != self.ft_cap:
            return
        if self.best_key is None or key < self.best_key:
            self.best_key = key
            self.best_seqs = [list(s) for s in seqs]

    def _children(self) -> list[int]:
        """Family indices to append, with -1 standing for "close the machine"."""
        m = self.cur
        kids = []
        for f in self.order:
            if self.remaining[f] and self.qual[m][f]:
                kids.append(f)
        if m < self.M - 1:
            share = -(-(self.left + len(self.seqs[m])) // (self.M - m))
            if len(self.seqs[m]) >= share:
                kids.insert(0, -1)
            else:
                kids.append(-1)
        return kids

    def _dfs(self, store: DomainStore) -> None:
        if self.left == 0:
            self.offer(self.seqs, sum(self.prefix_ft), self._disq())
            return
        m = self.cur
        for f in self._children():
            if f < 0:
                self._close_child(store, m)
            else:
                self._append_child(store, m, f)

    def _propagate_child(self, child: DomainStore) -> bool:
        try:
            self._tick()
            child.total_ub = min(child.total_ub, self._ft_ub())
            filtering.propagate(child, self.cfg.rules)
        except Failure:
            self.stats.fails += 1
            return False
        if self._bound_prunes(child):
            self.stats.fails += 1
            return False
        return True

    def _append_child(self, store: DomainStore, m: int, f: int) -> None:
        a = store.assigned[m][f]
        if a >= store.njf_ub[m][f] or sum(store.assigned[m]) >= store.nj_ub[m]:
            return
        start = self._start_time(m, f)
        if start is None:
            return
        saved = (self.end[m], self.prefix_ft[m], self.last_start[m][f])
        end = start + self.proc[f]
        self.seqs[m].append(f)
        self.end[m] = end
        self.prefix_ft[m] += end
        self.last_start[m][f] = start
        self.remaining[f] -= 1
        self.left -= 1
        child = store.copy()
        child.assign(m, f)
        child.ft_lb[m] = max(child.ft_lb[m], self.prefix_ft[m])
        if self._propagate_child(child):
            self._dfs(child)
        self.left += 1
        self.remaining[f] += 1
        self.end[m], self.prefix_ft[m], self.last_start[m][f] = saved
        self.seqs[m].pop()

    def _close_child(self, store: DomainStore, m: int) -> None:
        size = len(self.seqs[m])
        if store.nj_lb[m] > size:
            return
        child = store.copy()
        child.nj_ub[m] = size
        for f in range(self.F):
            child.njf_ub[m][f] = min(child.njf_ub[m][f], child.assigned[m][f])
        child.ft_ub[m] = min(child.ft_ub[m], self.prefix_ft[m])
        self.cur += 1
        if self._propagate_child(child):
            self._dfs(child)
        self.cur -= 1


def _warm_start(inst: Instance) -> list[Schedule]:
    return [s for s in (scheduling_centric(inst), qualification_centric(inst)) if s is not None]


def _result(inst: Instance, status: str, seqs, stats: Stats) -> SolveResult:
    if seqs is None:
        return SolveResult(status, stats=stats)
    sched = left_pack(inst, [[f + 1 for f in s] for s in seqs])
    return SolveResult(status, sched, flowtime(sched), count_disqualifications(inst, sched)[0], stats)


def _seqs_of(schedule: Schedule) -> list[list[int]]:
    return [[f - 1 for f in seq] for seq in schedule.sequences()]


def solve_lex(inst: Instance, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Minimize flow time, then disqualifications among flow-time optima."""
    t0 = time.perf_counter()
    stats = Stats()
    search = _Search(inst, cfg, stats, t0 + cfg.time_limit)
    if cfg.warm_start:
        for sched in _warm_start(inst):
            search.offer(_seqs_of(sched), flowtime(sched), count_disqualifications(inst, sched)[0])
    # phase 1: flow time
    done = search.run("ft")
    stats.phase_nodes.append(stats.nodes)
    if search.best_seqs is None:
        stats.wall_time = time.perf_counter() - t0
        return SolveResult(INFEASIBLE if done else UNK, stats=stats)
    if not done:
        stats.wall_time = time.perf_counter() - t0
        return _result(inst, SAT, search.best_seqs, stats)
    # phase 2: disqualifications at optimal flow time
    ft_opt, d = search.best_key
    search.best_key = (d,)
    done = search.run("disq", ft_cap=ft_opt)
    stats.phase_nodes.append(stats.nodes - stats.phase_nodes[0])
    stats.wall_time = time.perf_counter() - t0
    return _result(inst, OPT if done else SAT, search.best_seqs, stats)


def solve_weighted(inst: Instance, cfg: SolverConfig = SolverConfig(aggregation="sum")) -> SolveResult:
    """Minimize ``W * flowtime + disqualifications`` with ``W`` above any loss count."""
    t0 = time.perf_counter()
    stats = Stats()
    search = _Search(inst, cfg, stats, t0 + cfg.time_limit)
    search.mode = "sum"
    if cfg.warm_start:
        for sched in _warm_start(inst):
            search.offer(_seqs_of(sched), flowtime(sched), count_disqualifications(inst, sched)[0])
    done = search.run("sum")
    stats.phase_nodes.append(stats.nodes)
    stats.wall_time = time.perf_counter() - t0
    if search.best_seqs is None:
        return SolveResult(INFEASIBLE if done else UNK, stats=stats)
    return _result(inst, OPT if done else SAT, search.best_seqs, stats)


def solve(inst: Instance, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    if cfg.aggregation == "sum":
        return solve_weighted(inst, cfg)
    return solve_lex(inst, cfg)


def aggregation_weight(inst: Instance) -> int:
    return inst.max_disqualifications() + 1


def lower_bound_lex(store: DomainStore) -> int:
    """Flow-time lower bound of a propagated node."""
    return max(store.total_lb, sum(store.ft_lb))


def root_store(inst: Instance, rules: Iterable[int] | str = "A", ft_ub: int = INF) -> DomainStore:
    """Propagated store of the search root under a flow-time upper bound."""
    store = DomainStore(inst)
    store.total_ub = ft_ub
    return filtering.propagate(store, filtering.rule_set(rules))


def brute_force_solve(inst: Instance, cap: int = 8) -> tuple[int, int] | None:
    """Exact lexicographic optimum by full enumeration (test oracle).

    Enumerates every job-to-machine count split and every distinct family
    order on each machine, left-packed; None when no schedule is
    qualification-feasible.
    """
    from itertools import product

    from .relaxation import _distinct_permutations
    from .schedule import check_validity

    if inst.n_jobs > cap:
        raise ValueError(f"{inst.n_jobs} jobs exceed the enumeration cap {cap}")
    M = inst.machines
    per_family = []
    for fam in inst.families:
        splits = []
        for combo in product(range(fam.jobs + 1), repeat=M):
            if sum(combo) == fam.jobs and all(
                c == 0 or m + 1 in fam.qualified for m, c in enumerate(combo)
            ):
                splits.append(combo)
        per_family.append(splits)
    best = None
    for split in product(*per_family):
        orders = []
        for m in range(M):
            counts = {fam.id: split[i][m] for i, fam in enumerate(inst.families) if split[i][m]}
            orders.append(list(_distinct_permutations(counts)) if counts else [()])
        for seqs in product(*orders):
            sched = left_pack(inst, [list(s) for s in seqs])
            if check_validity(inst, sched):
                continue
            key = (flowtime(sched), count_disqualifications(inst, sched)[0])
            if best is None or key < best:
                best = key
    return best
