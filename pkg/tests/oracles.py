"""Reference implementations written independently of the package.

Nothing here imports ``ks_forge``; tests compare the package against these.
"""

from __future__ import annotations

import itertools
from math import acos, cos, sqrt

import numpy as np

UNDEF = 2  # encoding used by the brute-force enumerators

# ---------------------------------------------------------------- f(p1)

A1 = acos(sqrt(2 / 3)) / acos(1 / sqrt(2))
A2 = acos(2 / sqrt(5)) / acos(sqrt(2 / 3))
A3 = acos(sqrt(2 / 3)) / acos(sqrt(2 / 5))
THRESHOLD = 3 / sqrt(14)


def f_oracle(p1: float, full: bool = False):
    """Straight-line transcription of the one-step overlap map."""
    q1 = sqrt(1 - p1 * p1)
    tav1 = A1 * acos(p1)
    tav2 = A2 * tav1
    x1 = cos(tav1)
    y1 = p1 * (1 - x1 * x1) / (q1 * x1)
    z1 = sqrt(max(0.0, 1 - x1 * x1 - y1 * y1))
    q2 = sqrt(1 - x1 * x1)
    x2 = cos(tav2)
    y2 = x1 * (1 - x2 * x2) / (q2 * x2)
    z2 = sqrt(max(0.0, 1 - x2 * x2 - y2 * y2))
    p3 = p1 * x2 + q1 * (y1 * y2 - z1 * z2) / q2
    q3 = sqrt(1 - p3 * p3)
    x3 = cos(A3 * acos(p3))
    y3 = p3 * (1 - x3 * x3) / (q3 * x3)
    z3 = sqrt(max(0.0, 1 - x3 * x3 - y3 * y3))
    k = sqrt((x2 - p3 * p1) ** 2 + ((y1 * y2 - z1 * z2) / q2 - p3 * q1) ** 2
             + ((y2 * z1 + y1 * z2) / q2) ** 2)
    f = x3 * p1 + y3 / k * (x2 - p1 * p3) - q1 * z3 / (k * q2) * (y2 * z1 + y1 * z2)
    if full:
        return dict(f=f, x1=x1, y1=y1, z1=z1, x2=x2, y2=y2, z2=z2, p3=p3, q3=q3, x3=x3, k=k)
    return f


def reduction_closed_form(p: float, x: float) -> tuple[float, float, float]:
    """Forced ray for a=(1,0,0), b=(p,q,0), with the negative z branch."""
    q = sqrt(1 - p * p)
    y = p * (1 - x * x) / (q * x)
    return x, y, -sqrt(1 - x * x - y * y)


# --------------------------------------------------- three-valued colourings

def _allowed_table() -> np.ndarray:
    """Allowed value patterns of one context, indexed by 9*v0 + 3*v1 + v2.

    Allowed: a permutation of (1, 0, 0), exactly one 0 with two undefined,
    or all undefined.  Everything else breaks one of the two rules.
    """
    ok = np.zeros(27, dtype=bool)
    for v in itertools.product((0, 1, UNDEF), repeat=3):
        ones = v.count(1)
        zeros = v.count(0)
        if ones == 1 and zeros == 2:
            good = True
        elif ones == 0 and zeros <= 1:
            good = True
        else:
            good = False
        ok[9 * v[0] + 3 * v[1] + v[2]] = good
    return ok


ALLOWED = _allowed_table()


def brute_force(n: int, contexts, premises: dict[int, str]) -> np.ndarray:
    """All admissible assignments (rows over {0, 1, UNDEF}) meeting ``premises``.

    ``premises`` maps an observable index to ``"one"``, ``"zero"`` or
    ``"definite"``.  Enumerates all 3^n assignments.
    """
    codes = np.arange(3 ** n, dtype=np.int64)
    grid = np.empty((codes.size, n), dtype=np.int8)
    for i in range(n):
        grid[:, i] = codes % 3  # digit 2 is UNDEF
        codes //= 3
    keep = np.ones(len(grid), dtype=bool)
    for c in contexts:
        code = 9 * grid[:, c[0]] + 3 * grid[:, c[1]] + grid[:, c[2]]
        keep &= ALLOWED[code]
    for i, req in premises.items():
        if req == "one":
            keep &= grid[:, i] == 1
        elif req == "zero":
            keep &= grid[:, i] == 0
        else:
            keep &= grid[:, i] != UNDEF
    return grid[keep]


def enumerate_dfs(n: int, contexts, fixed: dict[int, int]):
    """Yield every admissible assignment with ``fixed`` values, by DFS.

    Prunes as soon as a context whose members are all assigned is not an
    allowed pattern.  Suitable for a couple of dozen observables.
    """
    by_last: dict[int, list] = {i: [] for i in range(n)}
    for c in contexts:
        by_last[max(c)].append(c)
    vals = [UNDEF] * n

    def rec(i):
        if i == n:
            yield tuple(vals)
            return
        choices = (fixed[i],) if i in fixed else (0, 1, UNDEF)
        for v in choices:
            vals[i] = v
            if all(ALLOWED[9 * vals[c[0]] + 3 * vals[c[1]] + vals[c[2]]] for c in by_last[i]):
                yield from rec(i + 1)
        vals[i] = UNDEF

    yield from rec(0)


def frame_functions(n: int, contexts) -> list[tuple[int, ...]]:
    """Total 0/1 assignments with exactly one 1 in every context."""
    out = []
    for v in itertools.product((0, 1), repeat=n):
        if all(v[a] + v[b] + v[c] == 1 for a, b, c in contexts):
            out.append(v)
    return out


def random_contexts(rng: np.random.Generator, n: int, m: int) -> list[tuple[int, int, int]]:
    """Up to ``m`` distinct random triples over ``n`` observables."""
    seen = set()
    out = []
    for _ in range(m):
        c = tuple(int(x) for x in rng.choice(n, size=3, replace=False))
        if frozenset(c) not in seen:
            seen.add(frozenset(c))
            out.append(c)
    return out


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
