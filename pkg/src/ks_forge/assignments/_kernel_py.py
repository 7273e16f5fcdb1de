"""Pure-Python propagation and search kernel.

Values are encoded as -1 (undefined), 0, 1.  The trail is an array of
``(observable, rule, context)`` rows in assignment order and doubles as the
propagation queue.  Rules: 0 = premise or decision, 1 = a 1 in a context
forces the others to 0, 2 = two 0s in a context force the third to 1.

Conflicts are reported as ``(rule, context, observable, value)``: the rule
that tried to give ``observable`` the opposite of its current value.
"""

import numpy as np

NO_CONFLICT = (-1, -1, -1, -1)


class _State:
    __slots__ = ("ctx", "ptr", "idx", "values", "trail", "tlen", "conflict")

    def __init__(self, ctx, ptr, idx, values):
        self.ctx = [tuple(r) for r in np.asarray(ctx).tolist()]
        self.ptr = np.asarray(ptr).tolist()
        self.idx = np.asarray(idx).tolist()
        self.values = np.asarray(values).tolist()
        self.trail = []
        self.tlen = 0
        self.conflict = NO_CONFLICT

    def assign(self, o, val, rule, k):
        cur = self.values[o]
        if cur == -1:
            self.values[o] = val
            self.trail.append((o, rule, k))
            self.tlen += 1
            return True
        if cur == val:
            return True
        self.conflict = (rule, k, o, val)
        return False

    def propagate(self, head):
        values, ctx, ptr, idx = self.values, self.ctx, self.ptr, self.idx
        trail = self.trail
        while head < self.tlen:
            o = trail[head][0]
            head += 1
            for j in range(ptr[o], ptr[o + 1]):
                k = idx[j]
                m0, m1, m2 = ctx[k]
                v0, v1, v2 = values[m0], values[m1], values[m2]
                n1 = (v0 == 1) + (v1 == 1) + (v2 == 1)
                if n1 >= 2:
                    other = m0 if (v0 == 1 and m0 != o) else (m1 if (v1 == 1 and m1 != o) else m2)
                    self.conflict = (1, k, other, 0)
                    return False
                if n1 == 1:
                    for m, v in ((m0, v0), (m1, v1), (m2, v2)):
                        if v == -1:
                            values[m] = 0
                            trail.append((m, 1, k))
                            self.tlen += 1
                    continue
                n0 = (v0 == 0) + (v1 == 0) + (v2 == 0)
                if n0 == 3:
                    self.conflict = (2, k, o, 1)
                    return False
                if n0 == 2:
                    m = m0 if v0 == -1 else (m1 if v1 == -1 else m2)
                    values[m] = 1
                    trail.append((m, 2, k))
                    self.tlen += 1
        return True

    def undo(self, mark):
        values, trail = self.values, self.trail
        while self.tlen > mark:
            o = trail.pop()[0]
            values[o] = -1
            self.tlen -= 1


def _result_trail(trail):
    return np.array(trail, dtype=np.int32).reshape(-1, 3)


def closure(ctx, ptr, idx, values, seeds):
    """Least fixed point of the forcing rules starting from ``values``.

    ``seeds`` lists observables whose (already set) values should be pushed
    through the rules; their trail rows carry rule 0.
    Returns ``(values, trail, conflict)``.
    """
    st = _State(ctx, ptr, idx, values)
    for o in np.asarray(seeds).tolist():
        st.trail.append((o, 0, -1))
        st.tlen += 1
    st.propagate(0)
    return np.array(st.values, dtype=np.int8), _result_trail(st.trail), np.array(st.conflict, dtype=np.int32)


def search(ctx, ptr, idx, values, branch_vars, budget):
    """Depth-first search over {1, 0} for every observable in ``branch_vars``.

    The caller's fixed values must already be closed under propagation.
    Observables not in ``branch_vars`` stay undefined unless forced.
    Returns ``(status, values, nodes)``: status 1 = found, 0 = exhausted,
    -1 = budget exceeded.
    """
    st = _State(ctx, ptr, idx, values)
    order = np.asarray(branch_vars).tolist()
    nvars = len(order)
    # frame: [position in order, trail mark, next value to try]
    stack = []
    pos = 0
    nodes = 0
    while True:
        while pos < nvars and st.values[order[pos]] != -1:
            pos += 1
        if pos == nvars:
            return 1, np.array(st.values, dtype=np.int8), nodes
        stack.append([pos, st.tlen, 1])
        descended = False
        while stack:
            frame = stack[-1]
            fpos, mark, val = frame
            if val < 0:
                stack.pop()
                if stack:
                    st.undo(stack[-1][1])
                continue
            frame[2] = val - 1
            nodes += 1
            if nodes > budget:
                return -1, np.array(st.values, dtype=np.int8), nodes
            st.undo(mark)
            head = st.tlen
            st.assign(order[fpos], val, 0, -1)
            if st.propagate(head):
                pos = fpos + 1
                descended = True
                break
        if not descended:
            return 0, np.array(values, dtype=np.int8), nodes
