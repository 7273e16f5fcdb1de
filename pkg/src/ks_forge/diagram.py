"""Greechie orthogonality diagrams.

A diagram is a hypergraph: observables are vertices, contexts (triples of
mutually orthogonal observables in R^3) are hyperedges.  Observables may
carry a ray realization; abstract diagrams, where none do, are first-class
so that gadget topologies can be stored as data and realized later.
"""

from __future__ import annotations

import itertools
import os
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from . import _json
from .errors import DuplicateId, GadgetRealizationFailed, UnknownId
from .vec3 import Ray, cross, inner, norm

DEFAULT_ORTH_TOL = 1e-9


@dataclass(frozen=True)
class Observable:
    id: str
    realization: Ray | None = None


Context = tuple[str, str, str]


class Diagram:
    """Observables plus contexts, immutable after construction.

    Context member order is kept as given; equality compares contexts as
    sets and observables as an id -> realization map.
    """

    def __init__(self, observables: Iterable[Observable], contexts: Iterable[Iterable[str]] = ()):
        obs: dict[str, Observable] = {}
        for o in observables:
            if o.id in obs:
                raise DuplicateId(o.id)
            obs[o.id] = o
        ctxs: list[Context] = []
        seen: set[frozenset[str]] = set()
        for c in contexts:
            c = tuple(c)
            if len(c) != 3 or len(set(c)) != 3:
                raise ValueError(f"context {c!r} must have exactly 3 distinct members")
            for m in c:
                if m not in obs:
                    raise UnknownId(m)
            key = frozenset(c)
            if key in seen:
                continue
            seen.add(key)
            ctxs.append(c)
        self._obs = obs
        self._contexts = tuple(ctxs)

    @property
    def observables(self) -> tuple[Observable, ...]:
        return tuple(self._obs.values())

    @property
    def contexts(self) -> tuple[Context, ...]:
        return self._contexts

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self._obs)

    def __contains__(self, oid) -> bool:
        return oid in self._obs

    def __len__(self) -> int:
        return len(self._obs)

    def __getitem__(self, oid: str) -> Observable:
        try:
            return self._obs[oid]
        except KeyError:
            raise UnknownId(oid) from None

    def ray(self, oid: str) -> Ray | None:
        return self[oid].realization

    def __eq__(self, other):
        if not isinstance(other, Diagram):
            return NotImplemented
        return (self._obs == other._obs
                and {frozenset(c) for c in self._contexts} == {frozenset(c) for c in other._contexts})

    def __hash__(self):
        return hash((frozenset(self._obs.items()), frozenset(frozenset(c) for c in self._contexts)))

    def __repr__(self):
        return f"Diagram({len(self._obs)} observables, {len(self._contexts)} contexts)"

    @property
    def is_realized(self) -> bool:
        return all(o.realization is not None for o in self._obs.values())

    @property
    def is_abstract(self) -> bool:
        return all(o.realization is None for o in self._obs.values())

    # integer views used by the solver kernels
    @cached_property
    def index(self) -> dict[str, int]:
        return {oid: i for i, oid in enumerate(self._obs)}

    @cached_property
    def context_array(self) -> np.ndarray:
        idx = self.index
        arr = np.array([[idx[m] for m in c] for c in self._contexts], dtype=np.int32)
        return arr.reshape(-1, 3)

    @cached_property
    def incidence(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR incidence (offsets, context indices) of observables in contexts."""
        n = len(self._obs)
        ctx = self.context_array
        counts = np.bincount(ctx.ravel(), minlength=n) if ctx.size else np.zeros(n, dtype=np.int64)
        ptr = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(counts, out=ptr[1:])
        idx = np.empty(ptr[-1], dtype=np.int32)
        fill = ptr[:-1].copy()
        for k, row in enumerate(ctx):
            for o in row:
                idx[fill[o]] = k
                fill[o] += 1
        return ptr, idx

    def degree(self, oid: str) -> int:
        ptr, _ = self.incidence
        i = self.index[oid]
        return int(ptr[i + 1] - ptr[i])

    def neighbors(self, oid: str) -> set[str]:
        return {m for c in self._contexts if oid in c for m in c if m != oid}

    def with_realizations(self, rays: Mapping[str, Ray]) -> "Diagram":
        for oid in rays:
            if oid not in self._obs:
                raise UnknownId(oid)
        obs = [Observable(o.id, rays.get(o.id, o.realization)) for o in self._obs.values()]
        return Diagram(obs, self._contexts)

    def relabel(self, mapping: Mapping[str, str] | None = None, prefix: str = "") -> "Diagram":
        """Rename observables: ids in ``mapping`` are renamed, all others get ``prefix``."""
        mapping = dict(mapping or {})
        name = {oid: mapping.get(oid, prefix + oid) for oid in self._obs}
        obs = [Observable(name[o.id], o.realization) for o in self._obs.values()]
        return Diagram(obs, [tuple(name[m] for m in c) for c in self._contexts])

    def transformed(self, m: np.ndarray) -> "Diagram":
        """Apply an orthogonal matrix to every realization."""
        obs = [Observable(o.id, None if o.realization is None else Ray.of(m @ o.realization.array))
               for o in self._obs.values()]
        return Diagram(obs, self._contexts)

    def to_json(self) -> dict:
        return {
            "observables": [
                {"id": o.id, "vector": None if o.realization is None else o.realization.to_json()}
                for o in self._obs.values()
            ],
            "contexts": [list(c) for c in self._contexts],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Diagram":
        obs = []
        for entry in data["observables"]:
            vec = entry.get("vector")
            # stored vectors are already unit; renormalizing would perturb the last bit
            obs.append(Observable(str(entry["id"]), None if vec is None else Ray.of(vec, normalize=False)))
        return cls(obs, [tuple(str(m) for m in c) for c in data.get("contexts", [])])

    def dumps(self) -> str:
        return _json.dumps(self.to_json())

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Diagram":
        return cls.from_json(_json.loads(Path(path).read_text()))

    def save(self, path: str | os.PathLike) -> None:
        Path(path).write_text(self.dumps() + "\n")


def merge(diagrams: Iterable[Diagram], tol: float = DEFAULT_ORTH_TOL) -> tuple[Diagram, dict[str, str]]:
    """Union of realized or abstract diagrams.

    Observables with the same id must agree on their ray.  Observables with
    distinct ids but the same ray (sine of the angle between them at most
    ``tol``) are identified, keeping the first id seen.  Returns the merged diagram and the id alias map.
    """
    obs: dict[str, Observable] = {}
    alias: dict[str, str] = {}
    vecs: list[np.ndarray] = []
    vec_ids: list[str] = []
    contexts: list[tuple[str, ...]] = []
    for d in diagrams:
        for o in d.observables:
            if o.id in obs:
                prev = obs[o.id].realization
                if (prev is None) != (o.realization is None) or (
                        prev is not None and norm(cross(prev, o.realization)) > tol):
                    raise DuplicateId(f"{o.id} realized inconsistently across merged diagrams")
                continue
            if o.id in alias:
                continue
            if o.realization is not None and vecs:
                arr = np.asarray(vecs)
                sines = np.linalg.norm(np.cross(arr, o.realization.array), axis=1)
                j = int(np.argmin(sines))
                if sines[j] <= tol:
                    alias[o.id] = vec_ids[j]
                    continue
            obs[o.id] = o
            if o.realization is not None:
                vecs.append(o.realization.array)
                vec_ids.append(o.id)
        for c in d.contexts:
            contexts.append(tuple(alias.get(m, m) for m in c))
    return Diagram(obs.values(), contexts), alias


def from_rays(rays: Iterable[tuple[str, Ray]], tol: float = DEFAULT_ORTH_TOL) -> Diagram:
    """Diagram whose contexts are all orthogonal triples among ``rays``."""
    items = list(rays)
    ids = [oid for oid, _ in items]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise DuplicateId(dup)
    items.sort(key=lambda t: t[0])
    ids = [oid for oid, _ in items]
    n = len(items)
    contexts = []
    if n >= 3:
        v = np.array([r.array for _, r in items])
        orth = np.abs(v @ v.T) <= tol
        np.fill_diagonal(orth, False)
        for i in range(n):
            js = np.nonzero(orth[i, i + 1:])[0] + i + 1
            for j in js:
                ks = np.nonzero(orth[i, j + 1:] & orth[j, j + 1:])[0] + j + 1
                contexts.extend((ids[i], ids[j], ids[k]) for k in ks)
    return Diagram([Observable(oid, r) for oid, r in items], contexts)


@dataclass
class ValidationReport:
    passed: bool
    unrealized: bool
    context_deviation: dict[Context, float] = field(default_factory=dict)
    norm_deviation: dict[str, float] = field(default_factory=dict)
    tol: float = DEFAULT_ORTH_TOL

    @property
    def max_deviation(self) -> float:
        vals = list(self.context_deviation.values()) + list(self.norm_deviation.values())
        return max(vals, default=0.0)

    @property
    def failures(self) -> list[str]:
        out = [f"context {list(c)}: max |inner| {d:.3g}" for c, d in self.context_deviation.items() if d > self.tol]
        out += [f"observable {k}: norm deviation {d:.3g}" for k, d in self.norm_deviation.items() if d > self.tol]
        return out

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "unrealized": self.unrealized,
            "tol": self.tol,
            "max_deviation": self.max_deviation,
            "failures": self.failures,
            "contexts": [{"members": list(c), "deviation": d} for c, d in self.context_deviation.items()],
        }


def validate(d: Diagram, tol: float = DEFAULT_ORTH_TOL) -> ValidationReport:
    """Check unit norms and pairwise orthogonality of every realized context."""
    ctx_dev: dict[Context, float] = {}
    norm_dev: dict[str, float] = {}
    for o in d.observables:
        if o.realization is not None:
            norm_dev[o.id] = abs(norm(o.realization) - 1.0)
    for c in d.contexts:
        rays = [d.ray(m) for m in c]
        if any(r is None for r in rays):
            continue
        ctx_dev[c] = max(inner(u, v) for u, v in itertools.combinations(rays, 2))
    passed = all(v <= tol for v in ctx_dev.values()) and all(v <= tol for v in norm_dev.values())
    return ValidationReport(passed, d.is_abstract, ctx_dev, norm_dev, tol)


def realize(d: Diagram, anchors: Mapping[str, Ray], tol: float = DEFAULT_ORTH_TOL) -> Diagram:
    """Realize an abstract diagram from ray values of its anchor observables.

    Interior observables are solved one at a time: each is the normalized
    cross product of two non-parallel realized neighbours, then checked
    against all of its realized neighbours.
    """
    rays: dict[str, Ray] = {o.id: o.realization for o in d.observables if o.realization is not None}
    for oid, r in anchors.items():
        if oid not in d:
            raise UnknownId(oid)
        rays[oid] = r
    nbrs = {oid: d.neighbors(oid) for oid in d.ids}
    pending = [oid for oid in d.ids if oid not in rays]
    while pending:
        progress = False
        for oid in list(pending):
            known = [rays[m] for m in sorted(nbrs[oid], key=d.index.get) if m in rays]
            vec = None
            for u, v in itertools.combinations(known, 2):
                w = cross(u, v)
                if norm(w) > 1e-6:
                    vec = Ray.of(w)
                    break
            if vec is None:
                continue
            bad = [inner(vec, r) for r in known if inner(vec, r) > tol]
            if bad:
                raise GadgetRealizationFailed(
                    f"{oid}: cross-product solution is not orthogonal to its neighbours (max {max(bad):.3g})")
            rays[oid] = vec
            pending.remove(oid)
            progress = True
        if not progress:
            raise GadgetRealizationFailed(f"cannot solve observables {pending} from realized neighbours")
    out = d.with_realizations(rays)
    report = validate(out, tol)
    if not report.passed:
        raise GadgetRealizationFailed("; ".join(report.failures[:5]))
    return out


def export_dot(d: Diagram, assignment: Mapping[str, int] | None = None, name: str = "greechie") -> str:
    """Graphviz text for a diagram; contexts become labelled edge chains.

    Observables valued 0 are drawn as circles, 1 as squares; unvalued ones
    (or all, when no assignment is given) as plain ellipses.
    """
    assignment = dict(assignment or {})
    lines = [f"graph {name} {{"]
    for oid in d.ids:
        val = assignment.get(oid)
        attrs = [f'label="{oid}"']
        if val == 1:
            attrs.append("shape=square")
        elif val == 0:
            attrs.append("shape=circle")
        else:
            attrs.append("shape=ellipse")
        lines.append(f'  "{oid}" [{", ".join(attrs)}];')
    for k, (p, q, r) in enumerate(d.contexts):
        lines.append(f'  "{p}" -- "{q}" -- "{r}" [label="C{k}", colorscheme=set19, color={k % 9 + 1}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def data_dir() -> Path:
    env = os.environ.get("KS_FORGE_DATA")
    if env:
        return Path(env)
    return Path(str(resources.files("ks_forge") / "data"))


def load_data(name: str) -> Diagram:
    return Diagram.load(data_dir() / name)
