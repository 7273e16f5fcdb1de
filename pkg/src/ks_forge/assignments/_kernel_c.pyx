# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation and search kernel; same contract as ``_kernel_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef struct State:
    const int* ctx
    const int* ptr
    const int* idx
    signed char* values
    int* trail      # 3 ints per row: observable, rule, context
    int tlen
    int conflict[4]


cdef inline bint _assign(State* st, int o, signed char val, int rule, int k) noexcept nogil:
    cdef signed char cur = st.values[o]
    if cur == -1:
        st.values[o] = val
        st.trail[3 * st.tlen] = o
        st.trail[3 * st.tlen + 1] = rule
        st.trail[3 * st.tlen + 2] = k
        st.tlen += 1
        return True
    if cur == val:
        return True
    st.conflict[0] = rule
    st.conflict[1] = k
    st.conflict[2] = o
    st.conflict[3] = val
    return False


cdef inline void _push(State* st, int m, signed char val, int rule, int k) noexcept nogil:
    st.values[m] = val
    st.trail[3 * st.tlen] = m
    st.trail[3 * st.tlen + 1] = rule
    st.trail[3 * st.tlen + 2] = k
    st.tlen += 1


cdef bint _propagate(State* st, int head) noexcept nogil:
    cdef int o, j, k, m0, m1, m2, n1, n0, other, m
    cdef signed char v0, v1, v2
    while head < st.tlen:
        o = st.trail[3 * head]
        head += 1
        for j in range(st.ptr[o], st.ptr[o + 1]):
            k = st.idx[j]
            m0 = st.ctx[3 * k]
            m1 = st.ctx[3 * k + 1]
            m2 = st.ctx[3 * k + 2]
            v0 = st.values[m0]
            v1 = st.values[m1]
            v2 = st.values[m2]
            n1 = (v0 == 1) + (v1 == 1) + (v2 == 1)
            if n1 >= 2:
                if v0 == 1 and m0 != o:
                    other = m0
                elif v1 == 1 and m1 != o:
                    other = m1
                else:
                    other = m2
                st.conflict[0] = 1
                st.conflict[1] = k
                st.conflict[2] = other
                st.conflict[3] = 0
                return False
            if n1 == 1:
                if v0 == -1:
                    _push(st, m0, 0, 1, k)
                if v1 == -1:
                    _push(st, m1, 0, 1, k)
                if v2 == -1:
                    _push(st, m2, 0, 1, k)
                continue
            n0 = (v0 == 0) + (v1 == 0) + (v2 == 0)
            if n0 == 3:
                st.conflict[0] = 2
                st.conflict[1] = k
                st.conflict[2] = o
                st.conflict[3] = 1
                return False
            if n0 == 2:
                if v0 == -1:
                    m = m0
                elif v1 == -1:
                    m = m1
                else:
                    m = m2
                _push(st, m, 1, 2, k)
    return True


cdef inline void _undo(State* st, int mark) noexcept nogil:
    while st.tlen > mark:
        st.tlen -= 1
        st.values[st.trail[3 * st.tlen]] = -1


cdef void _init(State* st, int[:, ::1] ctx, int[::1] ptr, int[::1] idx,
                signed char[::1] values, int[:, ::1] trail):
    st.ctx = &ctx[0, 0] if ctx.shape[0] > 0 else NULL
    st.ptr = &ptr[0]
    st.idx = &idx[0] if idx.shape[0] > 0 else NULL
    st.values = &values[0] if values.shape[0] > 0 else NULL
    st.trail = &trail[0, 0] if trail.shape[0] > 0 else NULL
    st.tlen = 0
    st.conflict[0] = -1
    st.conflict[1] = -1
    st.conflict[2] = -1
    st.conflict[3] = -1


def _arrays(ctx, ptr, idx, values):
    c = np.ascontiguousarray(ctx, dtype=np.int32).reshape(-1, 3)
    p = np.ascontiguousarray(ptr, dtype=np.int32)
    i = np.ascontiguousarray(idx, dtype=np.int32)
    v = np.array(values, dtype=np.int8, copy=True)
    # each observable enters the trail at most once, plus one slot per seed
    t = np.empty((2 * v.shape[0] + 1, 3), dtype=np.int32)
    return c, p, i, v, t


def closure(ctx, ptr, idx, values, seeds):
    c, p, i, v, t = _arrays(ctx, ptr, idx, values)
    cdef int[:, ::1] cv = c
    cdef int[::1] pv = p
    cdef int[::1] iv = i
    cdef signed char[::1] vv = v
    cdef int[:, ::1] tv = t
    cdef State st
    _init(&st, cv, pv, iv, vv, tv)
    for o in np.asarray(seeds, dtype=np.int64).tolist():
        st.trail[3 * st.tlen] = o
        st.trail[3 * st.tlen + 1] = 0
        st.trail[3 * st.tlen + 2] = -1
        st.tlen += 1
    with nogil:
        _propagate(&st, 0)
    conflict = np.array([st.conflict[0], st.conflict[1], st.conflict[2], st.conflict[3]], dtype=np.int32)
    return v, t[:st.tlen].copy(), conflict


def search(ctx, ptr, idx, values, branch_vars, long long budget):
    c, p, i, v, t = _arrays(ctx, ptr, idx, values)
    original = v.copy()
    order = np.ascontiguousarray(branch_vars, dtype=np.int32)
    cdef int nvars = order.shape[0]
    frames = np.empty((nvars + 1, 3), dtype=np.int64)
    cdef long long[:, ::1] fr = frames
    cdef int[::1] ov = order
    cdef int[:, ::1] cv = c
    cdef int[::1] pv = p
    cdef int[::1] iv = i
    cdef signed char[::1] vv = v
    cdef int[:, ::1] tv = t
    cdef State st
    _init(&st, cv, pv, iv, vv, tv)
    cdef int pos = 0, depth = 0, fpos, head, status = 0
    cdef long long nodes = 0, mark
    cdef int val
    cdef bint descended
    with nogil:
        while True:
            while pos < nvars and st.values[ov[pos]] != -1:
                pos += 1
            if pos == nvars:
                status = 1
                break
            fr[depth, 0] = pos
            fr[depth, 1] = st.tlen
            fr[depth, 2] = 1
            depth += 1
            descended = False
            while depth > 0:
                fpos = <int>fr[depth - 1, 0]
                mark = fr[depth - 1, 1]
                val = <int>fr[depth - 1, 2]
                if val < 0:
                    depth -= 1
                    continue
                fr[depth - 1, 2] = val - 1
                nodes += 1
                if nodes > budget:
                    status = -1
                    break
                _undo(&st, <int>mark)
                head = st.tlen
                _assign(&st, ov[fpos], <signed char>val, 0, -1)
                if _propagate(&st, head):
                    pos = fpos + 1
                    descended = True
                    break
            if status == -1:
                break
            if not descended:
                status = 0
                break
    if status == 0:
        return 0, original, nodes
    return status, v, nodes
