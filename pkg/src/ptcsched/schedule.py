"""Concrete schedules: left packing, validity, flow time and disqualifications.

Qualification semantics (start-to-start, threshold ``gamma``):

* a job of ``f`` may start on ``m`` only if ``m`` is still qualified for
  ``f``: the first ``f`` start is at most ``gamma``, and consecutive ``f``
  starts are at most ``gamma`` apart;
* at the horizon ``T`` (latest completion over all machines) the pair
  ``(f, m)`` is lost iff ``T - last_start > gamma``, ``last_start`` being 0
  when ``f`` never ran on ``m``.  Equality keeps the qualification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .instance import Instance


class ScheduledJob(NamedTuple):
    family: int
    start: int
    end: int


@dataclass(frozen=True)
class Schedule:
    """Jobs of machine ``m`` (1-based) are ``machines[m - 1]``, in start order."""

    machines: tuple[tuple[ScheduledJob, ...], ...]

    @property
    def horizon(self) -> int:
        return max((seq[-1].end for seq in self.machines if seq), default=0)

    def sequences(self) -> list[list[int]]:
        return [[job.family for job in seq] for seq in self.machines]

    def n_jobs(self) -> int:
        return sum(len(seq) for seq in self.machines)


class Disqualification(NamedTuple):
    family: int
    machine: int
    time: int


class ScheduleError(ValueError):
    pass


def left_pack(inst: Instance, sequences: Sequence[Sequence[int]]) -> Schedule:
    """Realize per-machine family sequences with every job as early as possible.

    Raises:
        ScheduleError: wrong machine count, unqualified machine, or job counts
            not matching the instance.
    """
    if len(sequences) != inst.machines:
        raise ScheduleError(f"expected {inst.machines} machine sequences, got {len(sequences)}")
    used = [0] * inst.n_families
    machines = []
    for m, seq in enumerate(sequences, start=1):
        t = 0
        prev = None
        jobs = []
        for f in seq:
            if not 1 <= f <= inst.n_families:
                raise ScheduleError(f"machine {m}: unknown family {f}")
            fam = inst.family(f)
            if m not in fam.qualified:
                raise ScheduleError(f"machine {m}: not qualified for family {f}")
            if prev is not None and prev != f:
                t += fam.setup
            jobs.append(ScheduledJob(f, t, t + fam.proc))
            t += fam.proc
            prev = f
            used[f - 1] += 1
        machines.append(tuple(jobs))
    for fam in inst.families:
        if used[fam.id - 1] != fam.jobs:
            raise ScheduleError(
                f"family {fam.id}: {used[fam.id - 1]} jobs sequenced, {fam.jobs} expected"
            )
    return Schedule(tuple(machines))


def flowtime(schedule: Schedule) -> int:
    return sum(job.end for seq in schedule.machines for job in seq)


def check_validity(inst: Instance, schedule: Schedule) -> list[str]:
    """Every overlap, setup, coverage and qualification violation, as messages."""
    errors = []
    if len(schedule.machines) != inst.machines:
        errors.append(f"schedule has {len(schedule.machines)} machines, instance {inst.machines}")
    counts = [0] * inst.n_families
    for m, seq in enumerate(schedule.machines, start=1):
        last_start: dict[int, int] = {}
        prev = None
        for pos, job in enumerate(seq):
            where = f"machine {m}, job {pos}"
            if not 1 <= job.family <= inst.n_families:
                errors.append(f"{where}: unknown family {job.family}")
                prev = None
                continue
            fam = inst.family(job.family)
            counts[job.family - 1] += 1
            if job.start < 0:
                errors.append(f"{where}: negative start {job.start}")
            if job.end - job.start != fam.proc:
                errors.append(f"{where}: duration {job.end - job.start} != proc {fam.proc}")
            if prev is not None:
                gap = fam.setup if prev.family != job.family else 0
                if job.start < prev.end:
                    errors.append(f"{where}: overlaps previous job ending at {prev.end}")
                elif job.start < prev.end + gap:
                    errors.append(
                        f"{where}: starts at {job.start}, setup requires {prev.end + gap}"
                    )
            if m not in fam.qualified:
                errors.append(f"{where}: machine not qualified for family {job.family}")
            else:
                ref = last_start.get(job.family, 0)
                if job.start - ref > fam.gamma:
                    errors.append(
                        f"{where}: family {job.family} starts at {job.start}, "
                        f"qualification lost at {ref + fam.gamma}"
                    )
            last_start[job.family] = job.start
            prev = job
    for fam in inst.families:
        if counts[fam.id - 1] != fam.jobs:
            errors.append(f"family {fam.id}: {counts[fam.id - 1]} jobs scheduled, {fam.jobs} expected")
    return errors


def disqualifications(inst: Instance, schedule: Schedule) -> list[Disqualification]:
    T = schedule.horizon
    lost = []
    for fam in inst.families:
        for m in fam.qualified:
            seq = schedule.machines[m - 1] if m <= len(schedule.machines) else ()
            starts = [job.start for job in seq if job.family == fam.id]
            last = max(starts, default=0)
            if T - last > fam.gamma:
                lost.append(Disqualification(fam.id, m, last + fam.gamma))
    return lost


def count_disqualifications(inst: Instance, schedule: Schedule) -> tuple[int, list[Disqualification]]:
    lost = disqualifications(inst, schedule)
    return len(lost), lost


def schedule_to_dict(schedule: Schedule) -> dict:
    return {
        "machines": [
            {"id": m, "jobs": [{"family": j.family, "start": j.start} for j in seq]}
            for m, seq in enumerate(schedule.machines, start=1)
        ]
    }


def save_schedule(schedule: Schedule) -> str:
    return json.dumps(schedule_to_dict(schedule), indent=2) + "\n"


def schedule_from_dict(inst: Instance, data: dict) -> Schedule:
    try:
        rows = sorted(data["machines"], key=lambda row: row["id"])
        ids = [row["id"] for row in rows]
        if ids != list(range(1, len(rows) + 1)):
            raise ScheduleError(f"machine ids must be 1..{len(rows)}, got {ids}")
        machines = []
        for row in rows:
            jobs = []
            for raw in row["jobs"]:
                f = raw["family"]
                if not 1 <= f <= inst.n_families:
                    raise ScheduleError(f"machine {row['id']}: unknown family {f}")
                jobs.append(ScheduledJob(f, raw["start"], raw["start"] + inst.family(f).proc))
            machines.append(tuple(sorted(jobs, key=lambda j: j.start)))
    except (KeyError, TypeError) as exc:
        raise ScheduleError(f"malformed schedule: {exc!r}") from None
    return Schedule(tuple(machines))


def load_schedule(inst: Instance, text: str) -> Schedule:
    return schedule_from_dict(inst, json.loads(text))


def from_starts(inst: Instance, rows: Iterable[Iterable[tuple[int, int]]]) -> Schedule:
    """Build a schedule from per-machine ``(family, start)`` pairs."""
    return Schedule(
        tuple(
            tuple(
                ScheduledJob(f, st, st + inst.family(f).proc)
                for f, st in sorted(row, key=lambda pair: pair[1])
            )
            for row in rows
        )
    )
