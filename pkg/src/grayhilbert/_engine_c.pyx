# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled engine for the hot kernels; mirrors ``_engine_py`` bit for bit."""

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint64_t

ENGINE = "compiled"


cdef inline uint64_t _gray_decode(uint64_t g) nogil:
    g ^= g >> 1
    g ^= g >> 2
    g ^= g >> 4
    g ^= g >> 8
    g ^= g >> 16
    g ^= g >> 32
    return g


def encode_blocks(const uint64_t[:, ::1] u, int max_bits, int start, int count,
                  uint64_t[:, ::1] perms, uint64_t[:] masks, int scheme_id,
                  uint64_t[:, ::1] out):
    """Append ``count`` traversal digits per row, advancing (perm, mask) states in place."""
    cdef Py_ssize_t num = u.shape[0]
    cdef int n = <int>u.shape[1]
    cdef Py_ssize_t p
    cdef int i, j, d, shift
    cdef uint64_t o, g, r, m, t, e, todd
    cdef uint64_t tmp[64]
    with nogil:
        for p in range(num):
            m = masks[p]
            for j in range(count):
                shift = max_bits - 1 - (start + j)
                o = 0
                for i in range(n):
                    o |= ((u[p, i] >> shift) & <uint64_t>1) << i
                o ^= m
                g = 0
                for i in range(n):
                    g |= ((o >> perms[p, i]) & <uint64_t>1) << i
                r = _gray_decode(g)
                out[p, j] = r
                if r != 0:
                    t = (r - 1) & ~<uint64_t>1
                    e = t ^ (t >> 1)
                    todd = r if (r & 1) else r - 1
                    d = 0
                    while todd & 1:
                        d += 1
                        todd >>= 1
                    d = d % n
                else:
                    e = 0
                    d = 0
                for i in range(n):
                    m ^= ((e >> i) & <uint64_t>1) << perms[p, i]
                if scheme_id == 1:  # ring
                    for i in range(n):
                        tmp[i] = perms[p, (i + d + 1) % n]
                else:  # bubble
                    for i in range(d):
                        tmp[i] = perms[p, i]
                    for i in range(d, n - 1):
                        tmp[i] = perms[p, i + 1]
                    tmp[n - 1] = perms[p, d]
                for i in range(n):
                    perms[p, i] = tmp[i]
            masks[p] = m


cdef inline bint _rows_equal(const uint64_t[:, ::1] digits, Py_ssize_t a, Py_ssize_t b) nogil:
    cdef Py_ssize_t j
    for j in range(digits.shape[1]):
        if digits[a, j] != digits[b, j]:
            return 0
    return 1


cdef inline Py_ssize_t _partition(const uint64_t[:, ::1] digits, Py_ssize_t lo, Py_ssize_t hi,
                                  Py_ssize_t block, int shift) nogil:
    # rows are curve-sorted, so the level bit is 0..0 1..1 within the range
    cdef Py_ssize_t a = lo, b = hi, mid
    while a < b:
        mid = (a + b) >> 1
        if (digits[mid, block] >> shift) & <uint64_t>1:
            b = mid
        else:
            a = mid + 1
    return a


def derive_tree(const uint64_t[:, ::1] digits, int n, long long s):
    """BFS construction of the node arrays; see ``_engine_py.derive_tree``."""
    cdef Py_ssize_t num = digits.shape[0]
    if num == 0:
        raise ValueError("cannot derive a tree for an empty cloud")

    depth_a = np.zeros(1, np.int32)
    count_a = np.array([num], np.int64)
    lo_a = np.zeros(1, np.int64)
    if num <= s or _rows_equal(digits, 0, num - 1):
        return depth_a, np.full((1, 2), -1, np.int64), count_a, lo_a

    cdef Py_ssize_t cap = 4 * num + 16
    depth_a = np.zeros(cap, np.int32)
    child_a = np.full((cap, 2), -1, np.int64)
    count_a = np.zeros(cap, np.int64)
    lo_a = np.zeros(cap, np.int64)
    cdef Py_ssize_t qcap = num + 16
    qlo_a = np.zeros(qcap, np.int64)
    qhi_a = np.zeros(qcap, np.int64)
    qid_a = np.zeros(qcap, np.int64)
    qdep_a = np.zeros(qcap, np.int32)

    cdef int32_t[::1] vdep = depth_a
    cdef int64_t[:, ::1] vchild = child_a
    cdef int64_t[::1] vcount = count_a
    cdef int64_t[::1] vlo = lo_a
    cdef int64_t[::1] q_lo = qlo_a
    cdef int64_t[::1] q_hi = qhi_a
    cdef int64_t[::1] q_id = qid_a
    cdef int32_t[::1] q_dep = qdep_a

    cdef Py_ssize_t made = 1, head = 0, tail = 0
    vdep[0] = 0
    vcount[0] = num
    vlo[0] = 0
    q_lo[0] = 0
    q_hi[0] = num
    q_id[0] = 0
    q_dep[0] = 0
    tail = 1

    cdef Py_ssize_t lo, hi, mid, clo, chi, v, c0
    cdef int dep, shift
    cdef Py_ssize_t block
    cdef int side
    cdef Py_ssize_t ccount

    while head < tail:
        if made + 2 > cap:
            cap = cap * 2
            depth_a = np.concatenate([depth_a, np.zeros(len(depth_a), np.int32)])
            child_a = np.concatenate([child_a, np.full((len(child_a), 2), -1, np.int64)])
            count_a = np.concatenate([count_a, np.zeros(len(count_a), np.int64)])
            lo_a = np.concatenate([lo_a, np.zeros(len(lo_a), np.int64)])
            vdep = depth_a
            vchild = child_a
            vcount = count_a
            vlo = lo_a
        if tail + 2 > qcap:
            # compact the live window to the front and extend
            qlo_a = np.concatenate([qlo_a[head:tail], np.zeros(qcap, np.int64)])
            qhi_a = np.concatenate([qhi_a[head:tail], np.zeros(qcap, np.int64)])
            qid_a = np.concatenate([qid_a[head:tail], np.zeros(qcap, np.int64)])
            qdep_a = np.concatenate([qdep_a[head:tail], np.zeros(qcap, np.int32)])
            qcap = len(qlo_a)
            tail -= head
            head = 0
            q_lo = qlo_a
            q_hi = qhi_a
            q_id = qid_a
            q_dep = qdep_a

        lo = q_lo[head]
        hi = q_hi[head]
        v = q_id[head]
        dep = q_dep[head]
        head += 1

        block = dep // n
        shift = n - 1 - dep % n
        mid = _partition(digits, lo, hi, block, shift)
        c0 = made
        for side in range(2):
            clo = lo if side == 0 else mid
            chi = mid if side == 0 else hi
            ccount = chi - clo
            vdep[made] = dep + 1
            vcount[made] = ccount
            vlo[made] = clo
            if ccount > s and not _rows_equal(digits, clo, chi - 1):
                q_lo[tail] = clo
                q_hi[tail] = chi
                q_id[tail] = made
                q_dep[tail] = dep + 1
                tail += 1
            made += 1
        vchild[v, 0] = c0
        vchild[v, 1] = c0 + 1

    return (
        depth_a[:made].copy(),
        child_a[:made].copy(),
        count_a[:made].copy(),
        lo_a[:made].copy(),
    )
