"""Numerical checks on the one-step map ``f`` plus the measure demonstration.

``f`` maps the overlap ``p1 = <a|b>`` to the overlap ``<a|c>`` of the ray
forced by one iterated reduction step.  The checks here are the ones needed
for the iteration to terminate: ``f(p1) < p1`` and ``f' > 1`` above
``3/sqrt(14)``, plus the slope of ``f`` at ``p1 -> 1``.
"""

from __future__ import annotations

import cmath
import csv
import io
import logging
import math
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import IterationBudgetExceeded, NumericDomain, PreconditionViolated
from .reductions import ITERATION_BUDGET, THRESHOLD, f_closed, f_of
from .vec3 import Ray

log = logging.getLogger(__name__)

TAYLOR_EPS = (1e-4, 1e-5, 1e-6)
TAYLOR_REFERENCE = 1.2658
# rays per RNG substream; fixed so that output does not depend on --jobs
SAMPLE_CHUNK = 1 << 16
SWEEP_STEP = 1e-6


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ----------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepRow:
    p1: float
    f: float
    df: float
    gap: float

    @property
    def ok(self) -> bool:
        return self.f < self.p1 and self.df > 1.0


def _sweep_chunk(args) -> np.ndarray:
    grid, h = args
    with np.errstate(invalid="ignore", divide="ignore"):
        f = f_closed(grid)
        df = (f_closed(grid + h) - f_closed(grid - h)) / (2.0 * h)
    return np.stack([grid, f, df, grid - f], axis=1)


def sweep_arrays(lo: float, hi: float, n: int, jobs: int = 1) -> np.ndarray:
    """Columns ``p1, f, df, gap`` as an ``(n, 4)`` array."""
    if not (THRESHOLD <= lo < hi < 1.0):
        raise PreconditionViolated(f"need 3/sqrt(14) <= lo < hi < 1, got lo={lo!r}, hi={hi!r}")
    if n < 2:
        raise PreconditionViolated(f"n must be at least 2, got {n!r}")
    grid = np.linspace(lo, hi, int(n))
    h = min(SWEEP_STEP, (hi - lo) / (n - 1) / 10.0)
    nchunks = max(1, int(jobs))
    parts = [(g, h) for g in np.array_split(grid, nchunks) if g.size]
    return np.concatenate(_map(_sweep_chunk, parts, jobs))


def sweep_violations(rows: Sequence[SweepRow]) -> list[tuple[int, str]]:
    """Row indices breaking ``f < p1``, ``df > 1`` or strict decrease of the gap."""
    bad = []
    for i, r in enumerate(rows):
        if not np.isfinite(r.f) or not r.f < r.p1:
            bad.append((i, "f >= p1"))
        if not r.df > 1.0:
            bad.append((i, "df <= 1"))
        if i and not r.gap < rows[i - 1].gap:
            bad.append((i, "gap not decreasing"))
    return bad


def sweep_f(lo: float, hi: float, n: int, jobs: int = 1) -> list[SweepRow]:
    """``n`` evenly spaced rows on ``[lo, hi]``; derivative by central differences."""
    arr = sweep_arrays(lo, hi, n, jobs)
    rows = [SweepRow(*map(float, r)) for r in arr]
    for i, why in sweep_violations(rows):
        log.warning("sweep row %d (p1=%.17g): %s", i, rows[i].p1, why)
    return rows


def sweep_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p1", "f", "df", "gap"])
    for r in rows:
        w.writerow([f"{v:.17g}" for v in (r.p1, r.f, r.df, r.gap)])
    return buf.getvalue()


# ----------------------------------------------------------------- taylor

def taylor_estimates(eps: Sequence[float] = TAYLOR_EPS) -> list[float]:
    """One-sided slope estimates ``(1 - f(1-e)) / e``."""
    return [(1.0 - f_of(1.0 - e)) / e for e in eps]


def taylor_coefficient(eps: Sequence[float] = TAYLOR_EPS, budget: float = 1e-6) -> float:
    """Slope ``m`` in ``f(p1) = 1 - m (1 - p1) + O((1-p1)^2)``.

    The error of the one-sided estimates is linear in ``e`` to leading
    order, so a Richardson table over the geometric ``eps`` sequence removes
    it.  The last-but-one column is used as an error estimate: if its
    entries disagree by more than ``budget`` the rounding error from
    ``1 - f`` has swamped the truncation error.
    """
    eps = list(eps)
    if len(eps) < 2:
        raise PreconditionViolated("need at least two step sizes")
    col = taylor_estimates(eps)
    hs = eps
    level = 1
    while len(col) > 1:
        if len(col) == 2 and len(eps) > 2 and abs(col[1] - col[0]) > budget:
            raise NumericDomain(f"Richardson estimates disagree by {abs(col[1] - col[0]):.3g}")
        nxt = []
        for i in range(len(col) - 1):
            r = (hs[i] / hs[i + level]) ** level
            nxt.append((r * col[i + 1] - col[i]) / (r - 1.0))
        col = nxt
        level += 1
    m = col[0]
    if not math.isfinite(m):
        raise NumericDomain("non-finite Taylor estimate")
    return m


def taylor_coefficient_closed_form() -> float:
    """The printed symbolic slope evaluated numerically.

    ``arcosh`` is taken on its principal branch, so for arguments below 1
    it is ``i * arccos`` and its square is ``-arccos^2``.  The result is
    real up to rounding.
    """
    A = math.acos(math.sqrt(2 / 5))
    B = cmath.acosh(math.sqrt(2 / 3))
    C = math.acos(2 / math.sqrt(5))
    D = math.acos(math.sqrt(2 / 3))
    E = cmath.acosh(2 / math.sqrt(5))
    pi2 = math.pi ** 2
    bracket = (pi2 * (A * A + B * B)
               + 8 * C * (C * (2 * D * D + cmath.sqrt((pi2 + 16 * B * B) * (A * A + B * B)))
                          + 4 * D * cmath.sqrt((A * A + B * B) * (D * D + E * E))))
    m = bracket / (pi2 * A * A)
    if abs(m.imag) > 1e-12:
        raise NumericDomain(f"closed form has imaginary part {m.imag!r}")
    return m.real


# -------------------------------------------------------------- iteration

def iteration_count(p1: float, budget: int = ITERATION_BUDGET) -> int:
    """Least ``k`` with ``f^k(p1) <= 3/sqrt(14)``."""
    p = float(p1)
    if not THRESHOLD < p < 1.0:
        raise PreconditionViolated(f"p1={p!r} outside (3/sqrt(14), 1)")
    k = 0
    while p > THRESHOLD:
        if k >= budget:
            raise IterationBudgetExceeded(f"f^k(p1) still above 3/sqrt(14) after {budget} steps")
        p = f_of(p)
        k += 1
    return k


# ----------------------------------------------------------------- star

PARALLEL = "parallel-definite"
ORTHOGONAL = "orthogonal-definite"
INDEFINITE = "indefinite"


@dataclass(frozen=True)
class StarVerdict:
    kind: str
    overlap: float

    def to_json(self) -> dict:
        return {"kind": self.kind, "overlap": self.overlap}


def _kind(overlap: float, eps: float) -> str:
    if overlap >= 1.0 - eps:
        return PARALLEL
    if overlap <= eps:
        return ORTHOGONAL
    return INDEFINITE


def classify_observable(a: Ray, b: Ray, eps: float) -> StarVerdict:
    """Where ``b`` sits relative to the state ``a``, at tolerance ``eps``."""
    ov = min(1.0, abs(float(np.dot(a.array, b.array))))
    return StarVerdict(_kind(ov, eps), ov)


def _sample_chunk(args) -> np.ndarray:
    seq, n = args
    rng = np.random.Generator(np.random.PCG64(seq))
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    # canonical sign: largest-magnitude component positive
    pivot = np.abs(v).argmax(axis=1)
    sign = np.sign(v[np.arange(n), pivot])
    return v * sign[:, None]


def sample_rays(samples: int, seed: int, jobs: int = 1) -> np.ndarray:
    """``samples`` uniformly distributed unit rays, shape ``(samples, 3)``.

    Each block of ``SAMPLE_CHUNK`` rays comes from its own PCG64 stream
    spawned off ``SeedSequence(seed)``, so the output is the same for any
    number of workers.
    """
    if samples < 1:
        raise PreconditionViolated("samples must be positive")
    sizes = [SAMPLE_CHUNK] * (samples // SAMPLE_CHUNK)
    if samples % SAMPLE_CHUNK:
        sizes.append(samples % SAMPLE_CHUNK)
    seqs = np.random.SeedSequence(int(seed)).spawn(len(sizes))
    return np.concatenate(_map(_sample_chunk, list(zip(seqs, sizes)), jobs))


def definite_fraction(a: Ray, rays: np.ndarray, eps: float) -> float:
    """Fraction of ``rays`` that are not value indefinite relative to ``a``."""
    ov = np.abs(np.asarray(rays, dtype=float).reshape(-1, 3) @ a.array)
    hit = (ov >= 1.0 - eps) | (ov <= eps)
    return float(hit.mean())


def measure_demo(a: Ray, samples: int, eps: float, seed: int, jobs: int = 1) -> float:
    """Monte Carlo estimate of the measure of definite observables.

    For uniform rays ``|<a|b>|`` is uniform on ``[0, 1]``, so the exact
    answer is ``2 * eps``.
    """
    if not 0.0 < eps < 0.1:
        raise PreconditionViolated(f"eps={eps!r} outside (0, 0.1)")
    return definite_fraction(a, sample_rays(samples, seed, jobs), eps)
