"""Bounds store over the machine flow times and job counts, and cost-based rules.

Rules (numbering used throughout the package):

1. ``flowtime_m >= FT*(A_m)``.
2. ``flowtime_m >= FT*(A_m + E)`` where ``E`` holds the cheapest (SPT)
   not-yet-assigned jobs, with zero setup, needed to reach ``lb(nbJobs_m)``.
3. ``ub(nbJobs_{f,m})`` shrinks to the largest count ``k`` with
   ``FT*(A_m + k-a jobs of f) <= ub(flowtime_m)``.
4. ``ub(nbJobs_m)`` shrinks to the largest total whose SPT zero-setup
   completion of ``A_m`` stays within ``ub(flowtime_m)``.

Every operator only raises lower bounds and lowers upper bounds, so
:func:`propagate` reaches the same fixpoint in any application order.
"""

from __future__ import annotations

import random
from typing import Callable, Iterable

from . import relaxation
from .instance import Instance

# Upper bound meaning "unbounded"; far above any reachable flow time.
INF = 2**62

RULE_SETS: dict[str, frozenset[int]] = {
    "none": frozenset(),
    "L": frozenset({2}),
    "F": frozenset({3}),
    "M": frozenset({4}),
    "A": frozenset({2, 3, 4}),
}

_ft = relaxation.kernel.min_flowtime


class Failure(Exception):
    """The store has an empty domain: the current node cannot be extended."""


def rule_set(name: str | Iterable[int]) -> frozenset[int]:
    if isinstance(name, str):
        key = "none" if name in ("", "_", "none") else name
        try:
            return RULE_SETS[key]
        except KeyError:
            raise ValueError(f"unknown rule set {name!r}") from None
    rules = frozenset(name)
    if not rules <= {1, 2, 3, 4}:
        raise ValueError(f"unknown rules {sorted(rules - {1, 2, 3, 4})}")
    return rules


class DomainStore:
    """Bounds for one search node.  Machines and families are 0-based here.

    ``assigned[m][f]`` is the number of jobs of ``f`` decided on ``m``.
    Count bounds of unqualified ``(f, m)`` pairs are fixed to 0.
    """

    __slots__ = (
        "proc", "setup", "n", "spt", "qualified", "assigned",
        "ft_lb", "ft_ub", "nj_lb", "nj_ub", "njf_lb", "njf_ub",
        "total_lb", "total_ub",
    )

    def __init__(self, inst: Instance):
        M, F = inst.machines, inst.n_families
        N = inst.n_jobs
        self.proc = tuple(fam.proc for fam in inst.families)
        self.setup = tuple(fam.setup for fam in inst.families)
        self.n = tuple(fam.jobs for fam in inst.families)
        self.spt = tuple(sorted(range(F), key=lambda f: (self.proc[f], f)))
        self.qualified = tuple(
            tuple(f for f in range(F) if m + 1 in inst.families[f].qualified) for m in range(M)
        )
        self.assigned = [[0] * F for _ in range(M)]
        self.ft_lb = [0] * M
        self.ft_ub = [INF] * M
        self.nj_lb = [0] * M
        self.nj_ub = [N] * M
        self.njf_lb = [[0] * F for _ in range(M)]
        self.njf_ub = [
            [self.n[f] if f in self.qualified[m] else 0 for f in range(F)] for m in range(M)
        ]
        self.total_lb = 0
        self.total_ub = INF

    def copy(self) -> DomainStore:
        new = object.__new__(DomainStore)
        new.proc, new.setup, new.n = self.proc, self.setup, self.n
        new.spt, new.qualified = self.spt, self.qualified
        new.assigned = [row[:] for row in self.assigned]
        new.ft_lb, new.ft_ub = self.ft_lb[:], self.ft_ub[:]
        new.nj_lb, new.nj_ub = self.nj_lb[:], self.nj_ub[:]
        new.njf_lb = [row[:] for row in self.njf_lb]
        new.njf_ub = [row[:] for row in self.njf_ub]
        new.total_lb, new.total_ub = self.total_lb, self.total_ub
        return new

    @property
    def machines(self) -> int:
        return len(self.assigned)

    def snapshot(self) -> tuple:
        """Hashable view of every bound, for comparing stores."""
        return (
            tuple(map(tuple, self.assigned)),
            tuple(self.ft_lb), tuple(self.ft_ub),
            tuple(self.nj_lb), tuple(self.nj_ub),
            tuple(map(tuple, self.njf_lb)), tuple(map(tuple, self.njf_ub)),
            self.total_lb, self.total_ub,
        )

    def assign(self, m: int, f: int, k: int = 1) -> None:
        self.assigned[m][f] += k

    def set_flowtime_ub(self, m: int, ub: int) -> None:
        self.ft_ub[m] = min(self.ft_ub[m], ub)

    def unassigned(self, f: int) -> int:
        return self.n[f] - sum(row[f] for row in self.assigned)

    def check(self) -> None:
        """Raise :class:`Failure` if some lower bound exceeds its upper bound."""
        if self.total_lb > self.total_ub:
            raise Failure("flowtime")
        for m in range(self.machines):
            if self.ft_lb[m] > self.ft_ub[m]:
                raise Failure(f"flowtime_{m}")
            if self.nj_lb[m] > self.nj_ub[m] or sum(self.assigned[m]) > self.nj_ub[m]:
                raise Failure(f"nbJobs_{m}")
            lb, ub, a = self.njf_lb[m], self.njf_ub[m], self.assigned[m]
            for f in range(len(a)):
                if lb[f] > ub[f] or a[f] > ub[f]:
                    raise Failure(f"nbJobs_{f},{m}")

    # jobs for FT* evaluation -------------------------------------------

    def _assigned_columns(self, m: int):
        proc, setup, count = [], [], []
        for f, c in enumerate(self.assigned[m]):
            if c:
                proc.append(self.proc[f])
                setup.append(self.setup[f])
                count.append(c)
        return proc, setup, count

    def available(self, m: int, f: int) -> int:
        """Jobs of ``f`` that may still join machine ``m``."""
        a = self.assigned[m][f]
        return max(0, min(self.njf_ub[m][f] - a, self.unassigned(f)))

    def _spt_extras(self, m: int, k: int):
        """Cheapest ``k`` extra jobs for ``m`` as zero-setup ``(proc, count)`` pairs."""
        out = []
        for f in self.spt:
            if k <= 0:
                break
            take = min(k, self.available(m, f))
            if take:
                out.append((self.proc[f], take))
                k -= take
        return out, k

    def extended_flowtime(self, m: int, k: int) -> int | None:
        """FT* of ``A_m`` plus ``k`` SPT zero-setup extras; None if fewer remain."""
        extras, missing = self._spt_extras(m, k)
        if missing > 0:
            return None
        proc, setup, count = self._assigned_columns(m)
        for p, c in extras:
            proc.append(p)
            setup.append(0)
            count.append(c)
        return _ft(proc, setup, count)

    def family_flowtime(self, m: int, f: int, k: int) -> int:
        """FT* of ``A_m`` with the count of ``f`` raised to ``k``."""
        proc, setup, count = [], [], []
        for g, c in enumerate(self.assigned[m]):
            if g == f:
                c = k
            if c:
                proc.append(self.proc[g])
                setup.append(self.setup[g])
                count.append(c)
        return _ft(proc, setup, count)


def _raise_ft_lb(store: DomainStore, m: int, value: int) -> bool:
    if value > store.ft_ub[m]:
        raise Failure(f"flowtime_{m}: {value} > {store.ft_ub[m]}")
    if value > store.ft_lb[m]:
        store.ft_lb[m] = value
        return True
    return False


def rule_flowtime_assigned(store: DomainStore, m: int) -> bool:
    """Rule 1.  Returns True when ``lb(flowtime_m)`` moved."""
    if not any(store.assigned[m]):
        return False
    return _raise_ft_lb(store, m, _ft(*store._assigned_columns(m)))


def rule_flowtime_extended(store: DomainStore, m: int) -> bool:
    """Rule 2; reduces to rule 1 when no extra job is required."""
    k = store.nj_lb[m] - sum(store.assigned[m])
    if k <= 0:
        return rule_flowtime_assigned(store, m)
    value = store.extended_flowtime(m, k)
    if value is None:
        raise Failure(f"nbJobs_{m}: not enough jobs left to reach {store.nj_lb[m]}")
    return _raise_ft_lb(store, m, value)


def _largest_within(lo: int, hi: int, ok: Callable[[int], bool]) -> int:
    """Largest ``k`` in ``[lo, hi]`` with ``ok(k)``, given ``ok(lo)`` and monotone ``ok``."""
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def rule_max_family_jobs(store: DomainStore, f: int, m: int) -> bool:
    """Rule 3 on ``nbJobs_{f,m}``, by dichotomy over the count."""
    ub_ft = store.ft_ub[m]
    if ub_ft >= INF or f not in store.qualified[m]:
        return False
    a = store.assigned[m][f]
    hi = store.njf_ub[m][f]
    if hi <= a:
        return False
    if store.family_flowtime(m, f, hi) <= ub_ft:
        return False
    if store.family_flowtime(m, f, a) > ub_ft:
        raise Failure(f"flowtime_{m}: assigned jobs alone exceed {ub_ft}")
    store.njf_ub[m][f] = _largest_within(
        a, hi - 1, lambda k: store.family_flowtime(m, f, k) <= ub_ft
    )
    return True


def rule_max_machine_jobs(store: DomainStore, m: int) -> bool:
    """Rule 4 on ``nbJobs_m``, by dichotomy over the number of extras."""
    ub_ft = store.ft_ub[m]
    if ub_ft >= INF:
        return False
    size = sum(store.assigned[m])
    room = sum(store.available(m, f) for f in store.spt)
    hi = min(store.nj_ub[m] - size, room)
    if hi < 0:
        raise Failure(f"nbJobs_{m}: {size} assigned > {store.nj_ub[m]}")
    if store.extended_flowtime(m, hi) <= ub_ft:
        if size + hi < store.nj_ub[m]:
            store.nj_ub[m] = size + hi
            return True
        return False
    if store.extended_flowtime(m, 0) > ub_ft:
        raise Failure(f"flowtime_{m}: assigned jobs alone exceed {ub_ft}")
    k = _largest_within(0, hi - 1, lambda k: store.extended_flowtime(m, k) <= ub_ft)
    store.nj_ub[m] = size + k
    return True


def tighten_sums(store: DomainStore) -> bool:
    """One pass of the linking sums over counts and flow times.

    Counts per family sum to ``n_f`` across machines, counts per machine sum
    to ``nbJobs_m``, machine totals sum to N, machine flow times sum to the
    global flow time.
    """
    changed = False
    M = store.machines
    F = len(store.n)
    a, lb, ub = store.assigned, store.njf_lb, store.njf_ub
    for m in range(M):
        for f in range(F):
            if lb[m][f] < a[m][f]:
                lb[m][f] = a[m][f]
                changed = True
    # family f over machines
    for f in range(F):
        s_lb = sum(lb[m][f] for m in range(M))
        s_ub = sum(ub[m][f] for m in range(M))
        for m in range(M):
            new_ub = store.n[f] - (s_lb - lb[m][f])
            if new_ub < ub[m][f]:
                s_ub -= ub[m][f] - new_ub
                ub[m][f] = new_ub
                changed = True
            new_lb = store.n[f] - (s_ub - ub[m][f])
            if new_lb > lb[m][f]:
                s_lb += new_lb - lb[m][f]
                lb[m][f] = new_lb
                changed = True
    # families on machine m
    for m in range(M):
        s_lb = sum(lb[m])
        s_ub = sum(ub[m])
        if s_lb > store.nj_lb[m]:
            store.nj_lb[m] = s_lb
            changed = True
        if s_ub < store.nj_ub[m]:
            store.nj_ub[m] = s_ub
            changed = True
        for f in range(F):
            new_ub = store.nj_ub[m] - (s_lb - lb[m][f])
            if new_ub < ub[m][f]:
                s_ub -= ub[m][f] - new_ub
                ub[m][f] = new_ub
                changed = True
            new_lb = store.nj_lb[m] - (s_ub - ub[m][f])
            if new_lb > lb[m][f]:
                s_lb += new_lb - lb[m][f]
                lb[m][f] = new_lb
                changed = True
    # machine totals
    N = sum(store.n)
    s_lb = sum(store.nj_lb)
    s_ub = sum(store.nj_ub)
    for m in range(M):
        new_ub = N - (s_lb - store.nj_lb[m])
        if new_ub < store.nj_ub[m]:
            s_ub -= store.nj_ub[m] - new_ub
            store.nj_ub[m] = new_ub
            changed = True
        new_lb = N - (s_ub - store.nj_ub[m])
        if new_lb > store.nj_lb[m]:
            s_lb += new_lb - store.nj_lb[m]
            store.nj_lb[m] = new_lb
            changed = True
    # flow times
    s_lb = sum(store.ft_lb)
    s_ub = sum(min(u, INF) for u in store.ft_ub)
    if s_lb > store.total_lb:
        store.total_lb = s_lb
        changed = True
    if s_ub < store.total_ub:
        store.total_ub = s_ub
        changed = True
    for m in range(M):
        if store.total_ub < INF:
            new_ub = store.total_ub - (s_lb - store.ft_lb[m])
            if new_ub < store.ft_ub[m]:
                store.ft_ub[m] = new_ub
                changed = True
        if s_ub < INF:
            new_lb = store.total_lb - (s_ub - store.ft_ub[m])
            if new_lb > store.ft_lb[m]:
                s_lb += new_lb - store.ft_lb[m]
                store.ft_lb[m] = new_lb
                changed = True
    store.check()
    return changed


def operators(store: DomainStore, rules: Iterable[int]) -> list[Callable[[DomainStore], bool]]:
    """Every propagator instance the rule set enables, plus the sums."""
    rules = frozenset(rules)
    ops: list[Callable[[DomainStore], bool]] = [tighten_sums]
    for m in range(store.machines):
        if 1 in rules:
            ops.append(lambda s, m=m: rule_flowtime_assigned(s, m))
        if 2 in rules:
            ops.append(lambda s, m=m: rule_flowtime_extended(s, m))
        if 3 in rules:
            for f in store.qualified[m]:
                ops.append(lambda s, f=f, m=m: rule_max_family_jobs(s, f, m))
        if 4 in rules:
            ops.append(lambda s, m=m: rule_max_machine_jobs(s, m))
    return ops


def propagate(
    store: DomainStore,
    rules: Iterable[int] = RULE_SETS["A"],
    rng: random.Random | None = None,
) -> DomainStore:
    """Apply the rules and sums in place until no bound moves.

    ``rng`` shuffles the operator order on every pass (the fixpoint does not
    depend on it).  Raises :class:`Failure` on an empty domain.
    """
    ops = operators(store, rules)
    changed = True
    while changed:
        if rng is not None:
            rng.shuffle(ops)
        changed = False
        for op in ops:
            if op(store):
                changed = True
    store.check()
    return store
