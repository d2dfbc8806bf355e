"""Optimal single-machine sequencing with family setups and no qualification.

All jobs of a family form one block, the blocks after the first one follow
the shortest-mean-processing-time (SMPT) order, and the first block is the
one whose move to the front yields the smallest flow time.  The first block
pays no setup.

Job sets are lists of :class:`JobGroup`.  A group with ``primed=True`` is a
zero-setup copy of its family, sequenced as a block of its own.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

if os.environ.get("PTCSCHED_PURE"):
    from . import _pykernels as kernel
else:
    try:
        from . import _kernels as kernel
    except ImportError:
        from . import _pykernels as kernel

BACKEND: str = kernel.BACKEND


class JobGroup(NamedTuple):
    family: int
    count: int
    proc: int
    setup: int
    primed: bool = False

    @property
    def key(self) -> tuple[int, bool]:
        return (self.family, self.primed)


@dataclass(frozen=True)
class Block:
    family: int
    size: int
    proc: int
    setup: int
    primed: bool = False

    @property
    def total(self) -> int:
        """Block processing time: one setup plus ``size`` jobs."""
        return self.setup + self.size * self.proc

    @property
    def weight(self) -> int:
        return self.size

    @property
    def label(self) -> str:
        return f"f{self.family}'" if self.primed else f"f{self.family}"


def mpt(block: Block) -> Fraction:
    """Mean processing time of a block, exact."""
    return Fraction(block.total, block.weight)


@dataclass(frozen=True)
class BlockSequence:
    blocks: tuple[Block, ...]
    flowtime: int

    def labels(self) -> list[str]:
        """One label per job, e.g. ``['f1', "f1'", 'f3']``."""
        return [b.label for b in self.blocks for _ in range(b.size)]


def build_blocks(jobs: Iterable[JobGroup]) -> list[Block]:
    """One block per distinct (family, primed) key, in canonical key order."""
    merged: dict[tuple[int, bool], list] = {}
    for g in jobs:
        if g.count < 1:
            raise ValueError(f"job group {g} has a non-positive count")
        slot = merged.get(g.key)
        if slot is None:
            merged[g.key] = [g.count, g.proc, g.setup]
        elif (slot[1], slot[2]) != (g.proc, g.setup):
            raise ValueError(f"family {g.key} given with inconsistent proc/setup")
        else:
            slot[0] += g.count
    return [
        Block(family=key[0], size=c, proc=p, setup=s, primed=key[1])
        for key, (c, p, s) in sorted(merged.items())
    ]


def _columns(blocks: list[Block]):
    return (
        [b.proc for b in blocks],
        [b.setup for b in blocks],
        [b.size for b in blocks],
    )


def flowtime_of_block_sequence(blocks: Iterable[Block]) -> int:
    """Total completion time of the blocks packed from time 0 in the given order."""
    blocks = list(blocks)
    if not blocks:
        raise ValueError("empty block sequence")
    proc, setup, count = _columns(blocks)
    return kernel.sequence_flowtime(proc, setup, count, range(len(blocks)))


def sequence_optimal(jobs: Iterable[JobGroup]) -> BlockSequence:
    blocks = build_blocks(jobs)
    if not blocks:
        raise ValueError("empty job set")
    ft, order = kernel.sequence(*_columns(blocks))
    return BlockSequence(tuple(blocks[i] for i in order), ft)


def min_flowtime(jobs: Iterable[JobGroup]) -> int:
    """FT* of a job set; 0 for the empty set."""
    blocks = build_blocks(jobs)
    return kernel.min_flowtime(*_columns(blocks))


def move_to_front_flowtimes(jobs: Iterable[JobGroup]) -> list[tuple[Block, int]]:
    """Every move-to-front candidate of the SMPT sequence with its flow time.

    Evaluated with the O(1) prefix-sum delta, candidates in SMPT order.
    """
    blocks = build_blocks(jobs)
    proc, setup, count = _columns(blocks)
    from ._pykernels import _smpt_order

    big_p = [b.total for b in blocks]
    order = _smpt_order(big_p, count)
    n = sum(count)
    const = sum(c * s + p * c * (c + 1) // 2 for p, s, c in zip(proc, setup, count))
    pair = 0
    acc = 0
    for i in order:
        pair += acc * count[i]
        acc += big_p[i]
    out = []
    pre_p = pre_w = 0
    for i in order:
        ft = pair + big_p[i] * pre_w - count[i] * pre_p + const - setup[i] * n
        out.append((blocks[i], ft))
        pre_p += big_p[i]
        pre_w += count[i]
    return out


def _distinct_permutations(counts: dict):
    keys = sorted(counts)
    remaining = dict(counts)
    total = sum(counts.values())
    prefix: list = []

    def rec():
        if len(prefix) == total:
            yield tuple(prefix)
            return
        for k in keys:
            if remaining[k]:
                remaining[k] -= 1
                prefix.append(k)
                yield from rec()
                prefix.pop()
                remaining[k] += 1

    yield from rec()


def brute_force_min_flowtime(jobs: Iterable[JobGroup], cap: int = 8) -> int:
    """Minimum flow time by enumerating every distinct job order (test oracle)."""
    blocks = build_blocks(jobs)
    if not blocks:
        raise ValueError("empty job set")
    total = sum(b.size for b in blocks)
    if total > cap:
        raise ValueError(f"{total} jobs exceed the enumeration cap {cap}")
    info = {(b.family, b.primed): b for b in blocks}
    best = None
    for perm in _distinct_permutations({k: b.size for k, b in info.items()}):
        t = 0
        ft = 0
        prev = None
        for k in perm:
            if prev is not None and k != prev:
                t += info[k].setup
            t += info[k].proc
            ft += t
            prev = k
        if best is None or ft < best:
            best = ft
    return best
