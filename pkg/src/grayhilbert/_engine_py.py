"""Pure-numpy engine for the hot kernels.

Vectorizes the per-point transform recursion across rows and derives the
scaled tree level-by-level from curve-sorted digit rows.  The compiled
engine (``_engine_c``) implements the same contracts; both must produce
bit-identical outputs.
"""

from __future__ import annotations

import numpy as np

ENGINE = "python"

_ONE = np.uint64(1)
_ZERO = np.uint64(0)


def _gray_decode_vec(g: np.ndarray) -> np.ndarray:
    out = g.copy()
    for shift in (1, 2, 4, 8, 16, 32):
        out ^= out >> np.uint64(shift)
    return out


def advance_states(perms: np.ndarray, masks: np.ndarray, ranks: np.ndarray, scheme_id: int) -> None:
    """In-place child-state update for one traversal digit per row.

    ``perms``: (N, n) uint64 local-to-global bit maps; ``masks``: (N,)
    uint64 translations; ``ranks``: (N,) uint64 traversal digits.
    """
    n = perms.shape[1]
    nn = np.uint64(n)
    rows = np.arange(perms.shape[0])
    nonzero = ranks != _ZERO

    t = (ranks - _ONE) & ~_ONE
    entry = np.where(nonzero, t ^ (t >> _ONE), _ZERO)
    t_odd = np.where(ranks & _ONE != _ZERO, ranks, ranks - _ONE)
    low_zero = (t_odd + _ONE) & ~t_odd
    d = np.bitwise_count(low_zero - _ONE).astype(np.uint64) % nn
    d = np.where(nonzero, d, _ZERO)

    applied = np.zeros_like(masks)
    for i in range(n):
        applied |= ((entry >> np.uint64(i)) & _ONE) << perms[:, i]
    masks ^= applied

    new = np.empty_like(perms)
    if scheme_id == 1:  # ring
        for i in range(n):
            src = (np.uint64(i) + d + _ONE) % nn
            new[:, i] = perms[rows, src.astype(np.intp)]
    else:  # bubble
        for i in range(n):
            if i == n - 1:
                src = d
            else:
                src = np.where(np.uint64(i) < d, np.uint64(i), np.uint64(i + 1))
            new[:, i] = perms[rows, src.astype(np.intp)]
    perms[:] = new


def encode_blocks(
    u: np.ndarray,
    max_bits: int,
    start: int,
    count: int,
    perms: np.ndarray,
    masks: np.ndarray,
    scheme_id: int,
    out: np.ndarray,
) -> None:
    """Append ``count`` traversal digits for every row, advancing the states.

    ``u``: (N, n) uint64 quantized coordinates (``max_bits`` bits each);
    block ``j`` reads bit ``max_bits - 1 - j``.  ``out``: (N, count).
    """
    n = u.shape[1]
    for j in range(count):
        shift = np.uint64(max_bits - 1 - (start + j))
        orthant = np.zeros(u.shape[0], np.uint64)
        for i in range(n):
            orthant |= ((u[:, i] >> shift) & _ONE) << np.uint64(i)
        orthant ^= masks
        g = np.zeros_like(orthant)
        for i in range(n):
            g |= ((orthant >> perms[:, i]) & _ONE) << np.uint64(i)
        ranks = _gray_decode_vec(g)
        out[:, j] = ranks
        advance_states(perms, masks, ranks, scheme_id)


def _rows_equal(digits: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    eq = np.ones(len(a), bool)
    for j in range(digits.shape[1]):
        eq &= digits[a, j] == digits[b, j]
    return eq


def derive_tree(digits: np.ndarray, n: int, s: int):
    """Build the scaled-tree node arrays from curve-sorted digit rows.

    A node splits while it holds more than ``s`` points and its rows are
    not all identical (identical rows cannot be separated at the available
    resolution and become an overfilled leaf).  Nodes are numbered in BFS
    order; the first child of a split is the first-visited half.

    Returns ``(depth int32, children int64 (M,2), count int64, lo int64)``
    with ``children == -1`` marking leaves; ``lo`` is the start of the
    node's contiguous range in curve order.
    """
    num = digits.shape[0]
    if num == 0:
        raise ValueError("cannot derive a tree for an empty cloud")
    root_leaf = num <= s or bool(_rows_equal(digits, np.array([0]), np.array([num - 1]))[0])
    if root_leaf:
        return (
            np.zeros(1, np.int32),
            np.full((1, 2), -1, np.int64),
            np.array([num], np.int64),
            np.zeros(1, np.int64),
        )

    depth_parts = [np.zeros(1, np.int32)]
    count_parts = [np.array([num], np.int64)]
    lo_parts = [np.zeros(1, np.int64)]
    links: list[tuple[np.ndarray, np.ndarray]] = []  # (parent ids, first-child ids)

    a_lo = np.zeros(1, np.int64)
    a_hi = np.array([num], np.int64)
    a_id = np.zeros(1, np.int64)
    next_id = 1
    level = 0

    while a_id.size:
        block, sub = divmod(level, n)
        shift = np.uint64(n - 1 - sub)
        lens = a_hi - a_lo
        seg = np.repeat(np.arange(a_id.size), lens)
        starts = np.cumsum(lens) - lens
        pos = np.arange(lens.sum()) - np.repeat(starts - a_lo, lens)
        bits = (digits[pos, block] >> shift) & _ONE
        zeros = np.bincount(seg[bits == _ZERO], minlength=a_id.size)
        mid = a_lo + zeros

        c_lo = np.column_stack([a_lo, mid]).ravel()
        c_hi = np.column_stack([mid, a_hi]).ravel()
        c_count = c_hi - c_lo
        c_id = next_id + np.arange(c_id_size := 2 * a_id.size, dtype=np.int64)
        links.append((a_id, c_id[::2]))
        next_id += c_id_size

        splittable = c_count > s
        if splittable.any():
            tied = np.zeros(c_id_size, bool)
            idx = np.flatnonzero(splittable)
            tied[idx] = _rows_equal(digits, c_lo[idx], c_hi[idx] - 1)
            active = splittable & ~tied
        else:
            active = splittable

        depth_parts.append(np.full(c_id_size, level + 1, np.int32))
        count_parts.append(c_count)
        lo_parts.append(c_lo)

        a_lo, a_hi, a_id = c_lo[active], c_hi[active], c_id[active]
        level += 1

    depth = np.concatenate(depth_parts)
    count = np.concatenate(count_parts)
    lo = np.concatenate(lo_parts)
    children = np.full((len(depth), 2), -1, np.int64)
    for parents, first in links:
        children[parents, 0] = first
        children[parents, 1] = first + 1
    return depth, children, count, lo
