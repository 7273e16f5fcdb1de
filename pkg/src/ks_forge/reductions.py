"""Forcing constructions between rays and the overlap map they induce.

Two constructions are implemented.

The reduction gadget (``fig1_reduction.json``) forces ``c`` to 1 whenever
``a`` and ``b`` are both 1, for any ``c`` with ``(a.c)(b.c) = a.b``.  Its
interior rays are ``u = a x c`` and ``w = b x c``, which are orthogonal
exactly under that condition; contexts ``{a, u, u'}``, ``{b, w, w'}`` and
``{c, u, w}`` do the forcing.  In the basis ``a = (1,0,0)``,
``b = (p,q,0)`` this gives ``c = (x, p(1-x^2)/(qx), +-z)``.

The iterated gadget (``fig2_iterated.json``) glues three reduction
gadgets, ``(a,b) -> v1``, ``(a,v1) -> v2`` and ``(b,v2) -> c``, with the
angles scaled from the 1/sqrt2 -> 1/sqrt3 anchor by ``ALPHA1..3``.  The
overlap ``f(p1) = a.c`` it produces is strictly below ``p1`` on
``(3/sqrt14, 1)``, so iterating it reaches the strong regime in finitely
many steps.

The second-stage change of basis uses ``T2`` with columns ``e2``, ``f2`` and
``g2 = (0, z1/q2, -y1/q2)`` (= ``f2 x e2``, so ``T2`` is a reflection); the
third stage uses the proper rotation ``T3 = [b, f3, b x f3]``.  These
orientations fix which of the two admissible branches each stage takes and
hence the values of ``f``.
"""

from __future__ import annotations

import functools
import math
from collections.abc import Mapping
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _json
from .diagram import DEFAULT_ORTH_TOL, Diagram, Observable, load_data, merge, realize, validate
from .errors import (
    DegeneratePair,
    GadgetRealizationFailed,
    IterationBudgetExceeded,
    NumericDomain,
    PreconditionViolated,
)
from .vec3 import (
    TOL,
    Ray,
    Vector3,
    apply,
    canonical_pair_basis,
    cross,
    inner,
    rotation_between_pairs,
    safe_arccos,
    safe_sqrt,
)

THRESHOLD = 3.0 / math.sqrt(14.0)
LOWER = math.sqrt(5.0 / 14.0)
ALPHA1 = math.acos(math.sqrt(2.0 / 3.0)) / math.acos(1.0 / math.sqrt(2.0))
ALPHA2 = math.acos(2.0 / math.sqrt(5.0)) / math.acos(math.sqrt(2.0 / 3.0))
ALPHA3 = math.acos(math.sqrt(2.0 / 3.0)) / math.acos(math.sqrt(2.0 / 5.0))
ITERATION_BUDGET = 10**6
STRONG_GADGET_FILE = "strong_ks.json"


@dataclass(frozen=True)
class ReductionTrace:
    """Every intermediate quantity of one iterated-reduction step.

    Scalars refer to the canonical basis of the input pair; ``a``, ``b``,
    ``v1``, ``v2`` and ``c`` are rays in the caller's basis.
    """

    p1: float
    q1: float
    alpha1: float
    alpha2: float
    alpha3: float
    theta_ab: float
    theta_av1: float
    theta_av2: float
    theta_bv2: float
    theta_bc: float
    x1: float
    y1: float
    z1: float
    q2: float
    x2: float
    y2: float
    z2: float
    p3: float
    q3: float
    x3: float
    y3: float
    z3: float
    k: float
    f: float
    a: Ray
    b: Ray
    v1: Ray
    v2: Ray
    c: Ray

    def to_json(self) -> dict:
        out = {}
        for key, val in asdict(self).items():
            out[key] = list(val["v"]) if isinstance(val, dict) else val
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "ReductionTrace":
        kw = {}
        for name in cls.__dataclass_fields__:
            val = data[name]
            kw[name] = Ray.of(val) if isinstance(val, list) else float(val)
        return cls(**kw)


def _check_pair(a: Ray, b: Ray) -> float:
    p = inner(a, b)
    if not 0.0 < p < 1.0:
        raise PreconditionViolated(f"overlap {p!r} must lie strictly inside (0, 1)")
    return p


def reduction_point(p: float, x: float, sign: int = -1) -> Vector3:
    """The forced ray in the canonical basis a=(1,0,0), b=(p,q,0)."""
    q = math.sqrt(1.0 - p * p)
    y = p * (1.0 - x * x) / (q * x)
    z = safe_sqrt(1.0 - x * x - y * y)
    return Vector3(x, y, sign * z)


def reduce_toward(a: Ray, b: Ray, x: float, sign: int = -1,
                  tol: float = DEFAULT_ORTH_TOL) -> tuple[Ray, Diagram]:
    """Ray ``c`` with ``a.c = x`` forced to 1 whenever ``a`` and ``b`` are 1.

    Requires ``a.b < |x| < 1``.  ``sign`` picks the branch of the third
    canonical component; both are valid forcings.  Returns ``c`` and the
    realized reduction gadget with anchors ``a``, ``b``, ``c``.
    """
    p = _check_pair(a, b)
    if not p < abs(x) < 1.0:
        raise PreconditionViolated(f"need {p!r} < |x| < 1, got x={x!r}")
    try:
        m = canonical_pair_basis(a, b)
    except DegeneratePair as exc:
        raise PreconditionViolated(str(exc)) from exc
    c_can = reduction_point(p, x, sign)
    c = Ray.of(apply(m.T, c_can))
    gadget = realize_reduction(a, b, c, tol=tol)
    return c, gadget


@functools.cache
def fig1_topology() -> Diagram:
    return load_data("fig1_reduction.json")


@functools.cache
def fig2_topology() -> Diagram:
    return load_data("fig2_iterated.json")


def realize_reduction(a: Ray, b: Ray, c: Ray, tol: float = DEFAULT_ORTH_TOL) -> Diagram:
    return realize(fig1_topology(), {"a": a, "b": b, "c": c}, tol)


def realize_iterated(trace: ReductionTrace, tol: float = DEFAULT_ORTH_TOL) -> Diagram:
    anchors = {"a": trace.a, "b": trace.b, "v1": trace.v1, "v2": trace.v2, "c": trace.c}
    return realize(fig2_topology(), anchors, tol)


def iterated_step(a: Ray, b: Ray, strict: bool = True) -> ReductionTrace:
    """One application of the three-stage scaled reduction.

    ``strict`` enforces ``3/sqrt14 < a.b < 1``; with ``strict=False`` any
    overlap where the construction stays real is accepted (used for the
    1/sqrt2 anchor and for closing chains below the threshold).
    """
    p1 = _check_pair(a, b)
    if strict and not p1 > THRESHOLD:
        raise PreconditionViolated(f"overlap {p1!r} must exceed 3/sqrt(14)")
    m = canonical_pair_basis(a, b)
    q1 = math.sqrt(1.0 - p1 * p1)
    theta_ab = math.acos(p1)
    theta_av1 = ALPHA1 * theta_ab
    theta_av2 = ALPHA2 * theta_av1

    # stage 1: v1 from (a, b) in the canonical basis, upper branch
    x1 = math.cos(theta_av1)
    y1 = p1 * (1.0 - x1 * x1) / (q1 * x1)
    z1 = safe_sqrt(1.0 - x1 * x1 - y1 * y1)
    v1 = np.array([x1, y1, z1])

    # stage 2: v2 from (a, v1) via T2 = [e2 f2 g2]
    q2 = math.sqrt(1.0 - x1 * x1)
    e2 = np.array([1.0, 0.0, 0.0])
    f2 = (v1 - x1 * e2) / q2
    # third column as (0, z1/q2, -y1/q2), i.e. f2 x e2; this orientation defines f
    g2 = np.array([0.0, z1 / q2, -y1 / q2])
    t2 = np.column_stack([e2, f2, g2])
    x2 = math.cos(theta_av2)
    y2 = x1 * (1.0 - x2 * x2) / (q2 * x2)
    z2 = safe_sqrt(1.0 - x2 * x2 - y2 * y2)
    v2 = t2 @ np.array([x2, y2, -z2])

    # stage 3: c from (b, v2) via T3 = [e3 f3 g3]
    e3 = np.array([p1, q1, 0.0])
    p3 = float(e3 @ v2)
    if not 0.0 < p3 < 1.0:
        raise NumericDomain(f"<b|v2> = {p3!r} left (0, 1)")
    q3 = math.sqrt(1.0 - p3 * p3)
    f3 = v2 - p3 * e3
    k = float(np.linalg.norm(f3))
    f3 /= k
    g3 = np.cross(e3, f3)
    t3 = np.column_stack([e3, f3, g3])
    theta_bv2 = safe_arccos(p3)
    theta_bc = ALPHA3 * theta_bv2
    x3 = math.cos(theta_bc)
    y3 = p3 * (1.0 - x3 * x3) / (q3 * x3)
    z3 = safe_sqrt(1.0 - x3 * x3 - y3 * y3)
    c = t3 @ np.array([x3, y3, -z3])

    back = m.T
    return ReductionTrace(
        p1=p1, q1=q1, alpha1=ALPHA1, alpha2=ALPHA2, alpha3=ALPHA3,
        theta_ab=theta_ab, theta_av1=theta_av1, theta_av2=theta_av2,
        theta_bv2=theta_bv2, theta_bc=theta_bc,
        x1=x1, y1=y1, z1=z1, q2=q2, x2=x2, y2=y2, z2=z2,
        p3=p3, q3=q3, x3=x3, y3=y3, z3=z3, k=k, f=float(c[0]),
        a=a, b=b,
        v1=Ray.of(back @ v1), v2=Ray.of(back @ v2), c=Ray.of(back @ c),
    )


def _sqrt_checked(x, clamp=TOL.clamp):
    x = np.asarray(x, dtype=float)
    if np.any(x < -clamp):
        raise NumericDomain("square root argument below the clamp window")
    return np.sqrt(np.maximum(x, 0.0))


def f_closed(p1):
    """Closed-form overlap ``<a|c>`` after one iterated step; vectorized, unchecked range."""
    p1 = np.asarray(p1, dtype=float)
    q1 = np.sqrt(1.0 - p1 * p1)
    theta_av1 = ALPHA1 * np.arccos(p1)
    theta_av2 = ALPHA2 * theta_av1
    x1 = np.cos(theta_av1)
    y1 = p1 * (1.0 - x1 * x1) / (q1 * x1)
    z1 = _sqrt_checked(1.0 - x1 * x1 - y1 * y1)
    q2 = np.sqrt(1.0 - x1 * x1)
    x2 = np.cos(theta_av2)
    y2 = x1 * (1.0 - x2 * x2) / (q2 * x2)
    z2 = _sqrt_checked(1.0 - x2 * x2 - y2 * y2)
    s = y1 * y2 - z1 * z2
    t = y2 * z1 + y1 * z2
    p3 = p1 * x2 + q1 * s / q2
    q3 = _sqrt_checked(1.0 - p3 * p3)
    x3 = np.cos(ALPHA3 * np.arccos(np.clip(p3, -1.0, 1.0)))
    y3 = p3 * (1.0 - x3 * x3) / (q3 * x3)
    z3 = _sqrt_checked(1.0 - x3 * x3 - y3 * y3)
    k = np.sqrt((x2 - p3 * p1) ** 2 + (s / q2 - p3 * q1) ** 2 + (t / q2) ** 2)
    return x3 * p1 + (y3 / k) * (x2 - p1 * p3) - (q1 * z3 / (k * q2)) * t


def f_of(p1: float, strict: bool = True) -> float:
    """``f(p1)``: the overlap with ``a`` of the ray forced by one iterated step."""
    p1 = float(p1)
    lo = THRESHOLD if strict else 0.0
    if not lo < p1 < 1.0:
        raise PreconditionViolated(f"p1={p1!r} outside ({lo}, 1)")
    with np.errstate(invalid="ignore", divide="ignore"):
        val = float(f_closed(p1))
    if not math.isfinite(val):
        raise NumericDomain(f"f is undefined at p1={p1!r}")
    return val


@functools.cache
def orthogonalizing_overlap() -> float:
    """The overlap ``p*`` whose iterated step lands orthogonal to ``a`` (f(p*) = 0)."""
    from scipy.optimize import brentq

    return float(brentq(lambda p: f_of(p, strict=False), 0.30, 0.60, xtol=1e-16, maxiter=200))


def iterate_reduction(a: Ray, b: Ray, budget: int = ITERATION_BUDGET,
                      threshold: float = THRESHOLD) -> list[ReductionTrace]:
    """Apply ``iterated_step`` to ``(a, c_i)`` until ``<a|c_k> <= threshold``."""
    p = _check_pair(a, b)
    if not p > threshold:
        raise PreconditionViolated(f"overlap {p!r} must exceed {threshold!r}")
    chain: list[ReductionTrace] = []
    cur = b
    while True:
        if len(chain) >= budget:
            raise IterationBudgetExceeded(f"no termination after {budget} steps")
        tr = iterated_step(a, cur, strict=threshold == THRESHOLD)
        chain.append(tr)
        cur = tr.c
        if inner(a, cur) <= threshold:
            return chain


# ---------------------------------------------------------------- gadgets

def _iterated_part(trace: ReductionTrace, a_id: str, b_id: str, c_id: str, prefix: str,
                   tol: float) -> Diagram:
    g = realize_iterated(trace, tol)
    return g.relabel({"a": a_id, "b": b_id, "c": c_id}, prefix)


def _reduction_part(a: Ray, b: Ray, x: float, a_id: str, b_id: str, c_id: str, prefix: str,
                    tol: float) -> tuple[Ray, Diagram]:
    c, g = reduce_toward(a, b, x, tol=tol)
    return c, g.relabel({"a": a_id, "b": b_id, "c": c_id}, prefix)


def orthogonal_branch(a: Ray, b: Ray) -> tuple[dict[str, Ray], list[tuple[str, str, str]]]:
    """Rays alpha, beta, c_perp and contexts {a,alpha,beta}, {b,c_perp,beta}.

    With ``a`` = 1 and ``b`` = 0 these force ``c_perp`` = 1, where
    ``<a|c_perp> = sqrt(1 - p^2)``.
    """
    p = _check_pair(a, b)
    q = math.sqrt(1.0 - p * p)
    mt = canonical_pair_basis(a, b).T
    rays = {
        "alpha": Ray.of(mt @ np.array([0.0, 1.0, 0.0])),
        "beta": Ray.of(mt @ np.array([0.0, 0.0, 1.0])),
        "c_perp": Ray.of(mt @ np.array([q, -p, 0.0])),
    }
    return rays, [("a", "alpha", "beta"), ("b", "c_perp", "beta")]


def closing_chain(a: Ray, b: Ray, a_id: str = "a", b_id: str = "b", prefix: str = "",
                  tol: float = DEFAULT_ORTH_TOL) -> tuple[list[Diagram], list[ReductionTrace]]:
    """Gadgets on which ``a`` = ``b`` = 1 forces two orthogonal rays to 1.

    Iterated steps drive the overlap below ``p*``; a reduction lifts it
    back to exactly ``p*``; one more step yields ``e`` orthogonal to ``a``,
    and the context ``{a, e, a x e}`` then holds two 1s.
    """
    p_star = orthogonalizing_overlap()
    parts: list[Diagram] = []
    chain: list[ReductionTrace] = []
    cur, cur_id = b, b_id
    while inner(a, cur) > p_star + TOL.unit:
        tr = iterated_step(a, cur, strict=False)
        nxt = f"{prefix}c{len(chain) + 1}"
        parts.append(_iterated_part(tr, a_id, cur_id, nxt, f"{prefix}s{len(chain) + 1}.", tol))
        chain.append(tr)
        cur, cur_id = tr.c, nxt
    if inner(a, cur) < p_star - TOL.unit:
        nxt = f"{prefix}lift"
        cur, g = _reduction_part(a, cur, p_star, a_id, cur_id, nxt, f"{prefix}lift.", tol)
        parts.append(g)
        cur_id = nxt
    tr = iterated_step(a, cur, strict=False)
    e_id = f"{prefix}e"
    parts.append(_iterated_part(tr, a_id, cur_id, e_id, f"{prefix}fin.", tol))
    chain.append(tr)
    closing = Diagram(
        [Observable(a_id, a), Observable(e_id, tr.c), Observable(f"{prefix}axe", Ray.of(cross(a, tr.c)))],
        [(a_id, e_id, f"{prefix}axe")],
    )
    parts.append(closing)
    return parts, chain


def build_strong_gadget(overlap: float = THRESHOLD, tol: float = DEFAULT_ORTH_TOL) -> Diagram:
    """Realized diagram on which ``a`` = 1 and ``b`` definite is impossible.

    Anchors ``a = (1,0,0)`` and ``b = (p, q, 0)``.  The ``b`` = 1 branch is
    a closing chain on ``(a, b)``; the ``b`` = 0 branch forces ``c_perp``
    to 1 through the orthogonal-branch contexts and closes ``(a, c_perp)``.
    """
    if not 0.0 < overlap < 1.0:
        raise PreconditionViolated(f"overlap {overlap!r} outside (0, 1)")
    q = math.sqrt(1.0 - overlap * overlap)
    a = Ray.of((1.0, 0.0, 0.0))
    b = Ray.of((overlap, q, 0.0))
    parts_one, _ = closing_chain(a, b, "a", "b", "one.", tol)
    rays, ctxs = orthogonal_branch(a, b)
    branch = Diagram([Observable("a", a), Observable("b", b)]
                     + [Observable(k, v) for k, v in rays.items()], ctxs)
    parts_zero, _ = closing_chain(a, rays["c_perp"], "a", "c_perp", "zero.", tol)
    d, _ = merge([Diagram([Observable("a", a), Observable("b", b)]), *parts_one, branch, *parts_zero], tol)
    return d


def load_strong_gadget(path: str | Path | None = None) -> Diagram:
    """Load a strong gadget: realized anchors ``a`` and ``b`` plus its contexts."""
    d = Diagram.load(path) if path is not None else load_data(STRONG_GADGET_FILE)
    for anchor in ("a", "b"):
        if anchor not in d or d.ray(anchor) is None:
            raise GadgetRealizationFailed(f"strong gadget lacks a realized anchor {anchor!r}")
    if not d.is_realized:
        raise GadgetRealizationFailed("strong gadget must be fully realized")
    return d


def gadget_overlap(gadget: Diagram) -> float:
    return inner(gadget.ray("a"), gadget.ray("b"))


def place_gadget(gadget: Diagram, a: Ray, b: Ray, a_id: str, b_id: str, prefix: str) -> Diagram:
    """Rotate a gadget so its anchors land on ``a`` and ``b``."""
    try:
        rot = rotation_between_pairs(gadget.ray("a"), gadget.ray("b"), a, b, tol=1e-9)
    except DegeneratePair as exc:
        raise PreconditionViolated(str(exc)) from exc
    placed = gadget.transformed(rot).relabel({"a": a_id, "b": b_id}, prefix)
    return placed.with_realizations({a_id: a, b_id: b})


def force_contradiction(a: Ray, b: Ray, strong: Diagram, a_id: str, b_id: str, prefix: str,
                        tol: float = DEFAULT_ORTH_TOL) -> tuple[list[Diagram], list[ReductionTrace]]:
    """Gadgets on which ``a`` = ``b`` = 1 is contradictory, for any overlap in (0, 1).

    Above the strong gadget's overlap ``g`` the iterated chain brings the
    pair down to at most ``g``; below it a reduction lifts it to ``g``;
    the strong gadget placed on the final pair finishes the job.
    """
    g = gadget_overlap(strong)
    p = _check_pair(a, b)
    parts: list[Diagram] = []
    chain: list[ReductionTrace] = []
    cur, cur_id = b, b_id
    if p > g + TOL.unit:
        chain = iterate_reduction(a, b, threshold=g)
        for i, tr in enumerate(chain, 1):
            nxt = f"{prefix}c{i}"
            parts.append(_iterated_part(tr, a_id, cur_id, nxt, f"{prefix}s{i}.", tol))
            cur, cur_id = tr.c, nxt
    if inner(a, cur) < g - TOL.unit:
        nxt = f"{prefix}lift"
        cur, gd = _reduction_part(a, cur, g, a_id, cur_id, nxt, f"{prefix}lift.", tol)
        parts.append(gd)
        cur_id = nxt
    parts.append(place_gadget(strong, a, cur, a_id, cur_id, f"{prefix}ks."))
    return parts, chain


@dataclass(frozen=True)
class WitnessSet:
    diagram: Diagram
    a_id: str
    b_id: str
    chain: tuple[ReductionTrace, ...] = ()
    branch_contexts: tuple[tuple[str, str, str], ...] = ()
    orthogonal_chain: tuple[ReductionTrace, ...] = ()
    notes: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        out = self.diagram.to_json()
        out.update({
            "a": self.a_id,
            "b": self.b_id,
            "chain": [t.to_json() for t in self.chain],
            "branch_contexts": [list(c) for c in self.branch_contexts],
            "orthogonal_chain": [t.to_json() for t in self.orthogonal_chain],
            "notes": list(self.notes),
        })
        return out

    def dumps(self) -> str:
        return _json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: Mapping) -> "WitnessSet":
        return cls(
            Diagram.from_json(data),
            data["a"], data["b"],
            tuple(ReductionTrace.from_json(t) for t in data.get("chain", [])),
            tuple(tuple(c) for c in data.get("branch_contexts", [])),
            tuple(ReductionTrace.from_json(t) for t in data.get("orthogonal_chain", [])),
            tuple(data.get("notes", [])),
        )


def construct_extended_witness(a: Ray, b: Ray, strong: Diagram | None = None,
                               tol: float = DEFAULT_ORTH_TOL) -> WitnessSet:
    """Finite realized diagram on which ``a`` = 1 leaves ``b`` value indefinite.

    ``b`` = 1 is refuted by ``force_contradiction(a, b)``.  ``b`` = 0 is
    refuted through the orthogonal branch, which forces ``c_perp`` = 1, and
    ``force_contradiction(a, c_perp)``.  When ``<a|b>`` equals the strong
    gadget's own overlap the gadget alone is the witness.  Without an
    explicit ``strong`` gadget and with ``<a|b> <= 3/sqrt(14)``, the
    built-in gadget is constructed at ``<a|b>`` and returned on its own.
    """
    p = _check_pair(a, b)
    if strong is None and p <= THRESHOLD + TOL.unit:
        # the built-in construction works at any overlap, so specialize it
        d = place_gadget(build_strong_gadget(p, tol), a, b, "a", "b", "ks.")
        return WitnessSet(d, "a", "b", notes=(f"strong gadget built at overlap {p!r}",))
    strong = load_strong_gadget() if strong is None else strong
    g = gadget_overlap(strong)
    if abs(p - g) <= TOL.unit:
        d = place_gadget(strong, a, b, "a", "b", "ks.")
        return WitnessSet(d, "a", "b", notes=("strong gadget placed directly",))
    parts_one, chain = force_contradiction(a, b, strong, "a", "b", "one.", tol)
    rays, ctxs = orthogonal_branch(a, b)
    branch = Diagram([Observable("a", a), Observable("b", b)]
                     + [Observable(k, v) for k, v in rays.items()], ctxs)
    parts_zero, chain0 = force_contradiction(a, rays["c_perp"], strong, "a", "c_perp", "zero.", tol)
    d, alias = merge([Diagram([Observable("a", a), Observable("b", b)]), *parts_one, branch, *parts_zero], tol)
    ctx = tuple(tuple(alias.get(m, m) for m in c) for c in ctxs)
    report = validate(d, tol)
    if not report.passed:
        raise GadgetRealizationFailed("; ".join(report.failures[:5]))
    return WitnessSet(d, "a", "b", tuple(chain), ctx, tuple(chain0))
