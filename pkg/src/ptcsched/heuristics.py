"""Greedy constructors for warm starts and generator feasibility checks.

Both stand in for the scheduling-centric and qualification-centric
heuristics of the literature, whose exact procedures are not reproduced:
they only share the objective each one favours.  Jobs are only ever
appended at the end of a machine, so every produced schedule is left-packed.
"""

from __future__ import annotations

from .instance import Instance
from .schedule import Schedule, ScheduledJob


class _Builder:
    def __init__(self, inst: Instance):
        self.inst = inst
        self.end = [0] * inst.machines
        self.last = [None] * inst.machines
        self.last_start: list[dict[int, int]] = [{} for _ in range(inst.machines)]
        self.jobs: list[list[ScheduledJob]] = [[] for _ in range(inst.machines)]
        self.remaining = {fam.id: fam.jobs for fam in inst.families}

    def start_time(self, f: int, m: int) -> int | None:
        """Earliest start of a job of ``f`` appended on machine ``m`` (1-based),
        or None when the machine would already be disqualified for ``f``."""
        fam = self.inst.family(f)
        i = m - 1
        start = self.end[i]
        if self.last[i] is not None and self.last[i] != f:
            start += fam.setup
        if start - self.last_start[i].get(f, 0) > fam.gamma:
            return None
        return start

    def deadline(self, f: int, m: int) -> int:
        return self.last_start[m - 1].get(f, 0) + self.inst.family(f).gamma

    def place(self, f: int, m: int, start: int) -> None:
        i = m - 1
        end = start + self.inst.family(f).proc
        self.jobs[i].append(ScheduledJob(f, start, end))
        self.end[i] = end
        self.last[i] = f
        self.last_start[i][f] = start
        self.remaining[f] -= 1

    def pending(self) -> list[int]:
        return [f for f, r in self.remaining.items() if r > 0]

    def schedule(self) -> Schedule:
        return Schedule(tuple(tuple(seq) for seq in self.jobs))


def scheduling_centric(inst: Instance) -> Schedule | None:
    """Append, one job at a time, the placement with the earliest completion."""
    b = _Builder(inst)
    while True:
        families = b.pending()
        if not families:
            return b.schedule()
        best = None
        for f in families:
            proc = inst.family(f).proc
            for m in inst.family(f).qualified:
                start = b.start_time(f, m)
                if start is not None and (best is None or start + proc < best[0]):
                    best = (start + proc, f, m, start)
        if best is None:
            return None
        _, f, m, start = best
        b.place(f, m, start)


def qualification_centric(inst: Instance) -> Schedule | None:
    """On the earliest available machine, run the family closest to losing it."""
    b = _Builder(inst)
    while True:
        families = b.pending()
        if not families:
            return b.schedule()
        for m in sorted(range(1, inst.machines + 1), key=lambda m: (b.end[m - 1], m)):
            choice = None
            for f in families:
                if m not in inst.family(f).qualified:
                    continue
                start = b.start_time(f, m)
                if start is None:
                    continue
                key = (b.deadline(f, m), f)
                if choice is None or key < choice[0]:
                    choice = (key, f, start)
            if choice is not None:
                b.place(choice[1], m, choice[2])
                break
        else:
            return None
