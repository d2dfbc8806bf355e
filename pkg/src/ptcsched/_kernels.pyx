# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sequencing kernel; same API and results as ``_pykernels``."""

from libc.stdlib cimport malloc, free, qsort

BACKEND = "cython"

ctypedef long long i64

cdef struct blk:
    i64 big_p
    i64 w
    i64 s
    i64 idx


cdef int _cmp_blk(const void *a, const void *b) noexcept nogil:
    cdef const blk *x = <const blk *> a
    cdef const blk *y = <const blk *> b
    cdef i64 lhs = x.big_p * y.w
    cdef i64 rhs = y.big_p * x.w
    if lhs < rhs:
        return -1
    if lhs > rhs:
        return 1
    return -1 if x.idx < y.idx else (1 if x.idx > y.idx else 0)


cdef i64 _solve(blk *b, Py_ssize_t k, Py_ssize_t *best_pos) noexcept nogil:
    cdef Py_ssize_t pos
    cdef i64 n = 0, const = 0, pair = 0, acc = 0, pre_p = 0, pre_w = 0
    cdef i64 ft, best = 0
    qsort(b, k, sizeof(blk), _cmp_blk)
    for pos in range(k):
        n += b[pos].w
        const += b[pos].w * b[pos].s
        pair += acc * b[pos].w
        acc += b[pos].big_p
    best_pos[0] = 0
    for pos in range(k):
        ft = pair + b[pos].big_p * pre_w - b[pos].w * pre_p - b[pos].s * n
        if pos == 0 or ft < best:
            best = ft
            best_pos[0] = pos
        pre_p += b[pos].big_p
        pre_w += b[pos].w
    return best + const


cdef blk *_load(proc, setup, count, Py_ssize_t k, i64 *tri) except NULL:
    cdef blk *b = <blk *> malloc(k * sizeof(blk))
    cdef Py_ssize_t i
    cdef i64 p, c
    if b == NULL:
        raise MemoryError()
    tri[0] = 0
    for i in range(k):
        p = proc[i]
        c = count[i]
        b[i].s = setup[i]
        b[i].w = c
        b[i].big_p = b[i].s + c * p
        b[i].idx = i
        # processing part of the order-independent constant
        tri[0] += p * c * (c + 1) // 2
    return b


def min_flowtime(proc, setup, count):
    """Optimal single-machine flow time of the blocks (0 when empty)."""
    cdef Py_ssize_t k = len(proc), pos
    cdef i64 tri, best
    if k == 0:
        return 0
    cdef blk *b = _load(proc, setup, count, k, &tri)
    try:
        best = _solve(b, k, &pos)
    finally:
        free(b)
    return best + tri


def sequence(proc, setup, count):
    """Return ``(flowtime, order)`` of an optimal block sequence."""
    cdef Py_ssize_t k = len(proc), pos, i
    cdef i64 tri, best
    if k == 0:
        return 0, []
    cdef blk *b = _load(proc, setup, count, k, &tri)
    try:
        best = _solve(b, k, &pos)
        order = [b[pos].idx]
        for i in range(k):
            if i != pos:
                order.append(b[i].idx)
    finally:
        free(b)
    return best + tri, order


def sequence_flowtime(proc, setup, count, order):
    """Flow time of the blocks processed in ``order``; the first setup is waived."""
    cdef i64 t = 0, total = 0, c, p
    cdef Py_ssize_t pos = 0
    for i in order:
        if pos:
            t += <i64> setup[i]
        c = count[i]
        p = proc[i]
        total += c * t + p * c * (c + 1) // 2
        t += c * p
        pos += 1
    return total
