"""Pure-Python sequencing kernel (fallback for ``_kernels.pyx``).

Blocks are given as parallel sequences ``proc``, ``setup``, ``count`` in
canonical order; that order breaks mean-processing-time ties.  A block's
total processing time is ``setup + count * proc`` and its weight ``count``.
"""

from functools import cmp_to_key

BACKEND = "python"


def _smpt_order(big_p, count):
    def cmp(a, b):
        # P_a / W_a  vs  P_b / W_b
        lhs = big_p[a] * count[b]
        rhs = big_p[b] * count[a]
        if lhs != rhs:
            return -1 if lhs < rhs else 1
        return a - b

    return sorted(range(len(big_p)), key=cmp_to_key(cmp))


def _solve(proc, setup, count):
    k = len(proc)
    big_p = [setup[i] + count[i] * proc[i] for i in range(k)]
    order = _smpt_order(big_p, count)
    n = 0
    const = 0
    for i in range(k):
        c = count[i]
        n += c
        const += c * setup[i] + proc[i] * c * (c + 1) // 2
    # sum over ordered pairs (i before j) of P_i * W_j, for the SMPT order
    pair = 0
    acc = 0
    for i in order:
        pair += acc * count[i]
        acc += big_p[i]
    best = None
    best_pos = 0
    pre_p = 0
    pre_w = 0
    for pos, i in enumerate(order):
        ft = pair + big_p[i] * pre_w - count[i] * pre_p + const - setup[i] * n
        if best is None or ft < best:
            best = ft
            best_pos = pos
        pre_p += big_p[i]
        pre_w += count[i]
    return best, order, best_pos


def min_flowtime(proc, setup, count):
    """Optimal single-machine flow time of the blocks (0 when empty)."""
    if not proc:
        return 0
    return _solve(proc, setup, count)[0]


def sequence(proc, setup, count):
    """Return ``(flowtime, order)`` of an optimal block sequence."""
    if not proc:
        return 0, []
    best, order, pos = _solve(proc, setup, count)
    return best, [order[pos], *order[:pos], *order[pos + 1:]]


def sequence_flowtime(proc, setup, count, order):
    """Flow time of the blocks processed in ``order``; the first setup is waived."""
    t = 0
    total = 0
    for pos, i in enumerate(order):
        if pos:
            t += setup[i]
        c = count[i]
        total += c * t + proc[i] * c * (c + 1) // 2
        t += c * proc[i]
    return total
