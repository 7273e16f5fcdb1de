"""Admissible partial value assignments over a Greechie diagram.

An assignment gives each observable the value 0, 1 or leaves it undefined
(value indefinite).  It is admissible when, in every context,

* an observable valued 1 forces every other member to be defined and 0, and
* two members valued 0 force the third to be defined and 1.

Assignments are non-contextual by construction: there is one value slot
per observable, shared by every context containing it.

A closure of the forcing rules that reaches no conflict is itself
admissible once every untouched observable is left undefined: any context
holding a 1 was closed by the first rule, any context holding two 0s by
the second, and every remaining pattern (a single 0, or nothing) is
allowed.  Search therefore only has to branch on observables that a
premise requires to be definite; every other observable may stay
undefined.  Total assignments (Boolean frame functions) branch on all.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ..diagram import Diagram
from ..errors import ContradictoryPremises, SearchBudgetExceeded, UnknownId
from . import _backend

Requirement = Literal["one", "zero", "definite"]
_REQ_ALIASES = {
    "1": "one", "one": "one", "0": "zero", "zero": "zero",
    "definite": "definite", "def": "definite", "d": "definite",
}
RULE_NAMES = {0: "premise", 1: "rule-i", 2: "rule-ii"}
DEFAULT_BUDGET = 10**8
MAX_TREE_BRANCHES = 12


@dataclass(frozen=True)
class Premise:
    id: str
    req: Requirement

    def __post_init__(self):
        req = _REQ_ALIASES.get(str(self.req).strip().lower())
        if req is None:
            raise ValueError(f"unknown requirement {self.req!r}; use one, zero or definite")
        object.__setattr__(self, "req", req)

    @property
    def value(self) -> int | None:
        return {"one": 1, "zero": 0}.get(self.req)

    @classmethod
    def parse(cls, text: str) -> "Premise":
        """Parse ``id=1``, ``id=0`` or ``id=definite``."""
        oid, sep, req = text.rpartition("=")
        if not sep or not oid:
            raise ValueError(f"premise {text!r} is not of the form id=1|0|definite")
        return cls(oid.strip(), req)

    def to_json(self) -> dict:
        return {"id": self.id, "req": self.req}

    @classmethod
    def from_json(cls, data: Mapping) -> "Premise":
        return cls(str(data["id"]), data["req"])


def one(oid: str) -> Premise:
    return Premise(oid, "one")


def zero(oid: str) -> Premise:
    return Premise(oid, "zero")


def definite(oid: str) -> Premise:
    return Premise(oid, "definite")


@dataclass(frozen=True)
class Assignment(Mapping):
    """Partial map from observable id to 0/1; missing ids are undefined."""

    values: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", {str(k): int(v) for k, v in dict(self.values).items()})
        for k, v in self.values.items():
            if v not in (0, 1):
                raise ValueError(f"value of {k} must be 0 or 1, got {v}")

    def __getitem__(self, key):
        return self.values[key]

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __hash__(self):
        return hash(frozenset(self.values.items()))

    def to_json(self) -> dict:
        return dict(self.values)


@dataclass(frozen=True)
class Step:
    """One rule application: ``forcing`` members of ``context`` set ``observable``."""

    rule: str
    context: tuple[str, ...] | None
    observable: str
    value: int
    forcing: tuple[str, ...] = ()

    def describe(self) -> str:
        if self.rule == "premise":
            return f"{self.observable}={self.value} (premise)"
        if self.rule == "decision":
            return f"{self.observable}={self.value} (branch)"
        ctx = "{" + ",".join(self.context) + "}"
        if self.rule == "rule-i":
            return f"in {ctx}: {self.forcing[0]}=1 forces {self.observable}=0"
        return f"in {ctx}: {'='.join(self.forcing)}=0 forces {self.observable}=1"

    def to_json(self) -> dict:
        return {"rule": self.rule, "context": None if self.context is None else list(self.context),
                "observable": self.observable, "value": self.value, "forcing": list(self.forcing)}


@dataclass(frozen=True)
class Closure:
    values: Assignment
    trace: tuple[Step, ...]
    ok = True


@dataclass(frozen=True)
class Conflict:
    trace: tuple[Step, ...]
    conflict: Step
    ok = False

    def describe(self) -> str:
        lines = [s.describe() for s in self.trace]
        lines.append("conflict: " + self.conflict.describe() + f" but {self.conflict.observable}"
                     f"={1 - self.conflict.value} already")
        return "\n".join(lines)


@dataclass(frozen=True)
class Branch:
    """Outcome of one combination of values for the definite premises."""

    assumptions: Mapping[str, int]
    conflict: Conflict

    def to_json(self) -> dict:
        return {"assumptions": dict(self.assumptions),
                "trace": [s.to_json() for s in self.conflict.trace],
                "conflict": self.conflict.conflict.to_json()}


@dataclass(frozen=True)
class Verdict:
    satisfiable: bool
    witness: Assignment | None = None
    branches: tuple[Branch, ...] = ()
    nodes: int = 0

    @property
    def outcome(self) -> str:
        return "Satisfiable" if self.satisfiable else "Unsatisfiable"

    def __bool__(self):
        return self.satisfiable

    def to_json(self) -> dict:
        out = {"outcome": self.outcome, "nodes": self.nodes}
        if self.satisfiable:
            out["witness"] = self.witness.to_json()
        else:
            out["branches"] = [b.to_json() for b in self.branches]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Verdict":
        sat = data["outcome"] == "Satisfiable"
        return cls(sat, Assignment(data["witness"]) if sat else None, (), int(data.get("nodes", 0)))


def _value_map(d: Diagram, a) -> dict[str, int]:
    values = dict(a.values if isinstance(a, Assignment) else a)
    for k in values:
        if k not in d:
            raise UnknownId(k)
    return values


def check_admissible(d: Diagram, a: Mapping[str, int]) -> bool:
    """True iff ``a`` satisfies both admissibility rules in every context."""
    values = _value_map(d, a)
    for c in d.contexts:
        vals = [values.get(m) for m in c]
        if 1 in vals and any(v != 0 for i, v in enumerate(vals) if i != vals.index(1)):
            return False
        for i in range(3):
            others = [vals[j] for j in range(3) if j != i]
            if others == [0, 0] and vals[i] != 1:
                return False
    return True


def _check_premises(d: Diagram, premises: Iterable[Premise]) -> list[Premise]:
    premises = [p if isinstance(p, Premise) else Premise.parse(p) for p in premises]
    fixed: dict[str, int] = {}
    for p in premises:
        if p.id not in d:
            raise UnknownId(p.id)
        if p.value is not None:
            if fixed.setdefault(p.id, p.value) != p.value:
                raise ContradictoryPremises(f"{p.id} is required to be both 0 and 1")
    return premises


def _steps(d: Diagram, trail: np.ndarray, values: np.ndarray, decisions: set[int] = frozenset()) -> tuple[Step, ...]:
    ids = d.ids
    out = []
    for o, rule, k in trail.tolist():
        if rule == 0:
            out.append(Step("decision" if o in decisions else "premise", None, ids[o], int(values[o])))
            continue
        ctx = d.contexts[k]
        oid = ids[o]
        others = tuple(m for m in ctx if m != oid)
        if rule == 1:
            forcing = tuple(m for m in others if values[d.index[m]] == 1)
        else:
            forcing = others
        out.append(Step(RULE_NAMES[rule], ctx, oid, int(values[o]), forcing))
    return tuple(out)


def _conflict_step(d: Diagram, conflict: np.ndarray, values: np.ndarray) -> Step:
    rule, k, o, val = (int(x) for x in conflict)
    oid = d.ids[o]
    if rule == 0:
        return Step("premise", None, oid, val)
    ctx = d.contexts[k]
    others = tuple(m for m in ctx if m != oid)
    if rule == 1:
        forcing = tuple(m for m in others if values[d.index[m]] == 1)
    else:
        forcing = others
    return Step(RULE_NAMES[rule], ctx, oid, val, forcing)


def _initial(d: Diagram, premises: Sequence[Premise]) -> tuple[np.ndarray, list[int]]:
    values = np.full(len(d), -1, dtype=np.int8)
    seeds = []
    for p in premises:
        if p.value is not None:
            i = d.index[p.id]
            if values[i] == -1:
                values[i] = p.value
                seeds.append(i)
    return values, seeds


def _closure(d: Diagram, values: np.ndarray, seeds: Sequence[int], kernel, decisions=frozenset()):
    ptr, idx = d.incidence
    out, trail, conflict = kernel.closure(d.context_array, ptr, idx, values, np.asarray(seeds, dtype=np.int32))
    trace = _steps(d, trail, out, set(decisions))
    if conflict[0] == -1:
        ids = d.ids
        return Closure(Assignment({ids[i]: int(v) for i, v in enumerate(out) if v != -1}), trace)
    return Conflict(trace, _conflict_step(d, conflict, out))


def propagate(d: Diagram, premises: Iterable[Premise], kernel=None) -> Closure | Conflict:
    """Least fixed point of the forcing rules from the valued premises.

    ``definite`` premises carry no value and are ignored here.
    """
    kernel = kernel or _backend.kernel
    premises = _check_premises(d, premises)
    values, seeds = _initial(d, premises)
    return _closure(d, values, seeds, kernel)


def _conflict_tree(d, values, branch_vars, kernel) -> tuple[Branch, ...]:
    if len(branch_vars) > MAX_TREE_BRANCHES:
        return ()
    branches = []
    ids = d.ids
    for combo in itertools.product((1, 0), repeat=len(branch_vars)):
        v = values.copy()
        v[list(branch_vars)] = combo
        res = _closure(d, v, list(branch_vars), kernel, decisions=set(branch_vars))
        if isinstance(res, Conflict):
            branches.append(Branch({ids[o]: val for o, val in zip(branch_vars, combo)}, res))
    return tuple(branches)


def _search(d: Diagram, premises, branch_all: bool, budget: int, kernel) -> Verdict:
    kernel = kernel or _backend.kernel
    premises = _check_premises(d, premises)
    values, seeds = _initial(d, premises)
    root = _closure(d, values, seeds, kernel)
    if isinstance(root, Conflict):
        return Verdict(False, None, (Branch({}, root),), 1)
    index = d.index
    for oid, v in root.values.items():
        values[index[oid]] = v
    order: list[int] = []
    for p in premises:
        i = index[p.id]
        if (branch_all or p.req == "definite") and values[i] == -1 and i not in order:
            order.append(i)
    if branch_all:
        ptr, _ = d.incidence
        deg = np.diff(ptr)
        rest = sorted((i for i in range(len(d)) if values[i] == -1 and i not in order),
                      key=lambda i: (-deg[i], i))
        order.extend(rest)
    ptr, idx = d.incidence
    status, out, nodes = kernel.search(d.context_array, ptr, idx, values,
                                       np.asarray(order, dtype=np.int32), budget)
    if status == -1:
        raise SearchBudgetExceeded(f"search exceeded {budget} nodes")
    if status == 1:
        ids = d.ids
        return Verdict(True, Assignment({ids[i]: int(v) for i, v in enumerate(out) if v != -1}), (), int(nodes))
    tree = () if branch_all else _conflict_tree(d, values, order, kernel)
    return Verdict(False, None, tree, int(nodes))


def exists_admissible(d: Diagram, premises: Iterable[Premise], budget: int = DEFAULT_BUDGET,
                      kernel=None) -> Verdict:
    """Decide whether an admissible assignment satisfies ``premises``.

    Branches 1 before 0 on each observable that must be definite, in
    premise order.  A Satisfiable witness leaves every unforced,
    unconstrained observable undefined.  Unsatisfiable verdicts carry one
    conflict derivation per combination of definite values (when there are
    at most ``MAX_TREE_BRANCHES`` of them).
    """
    return _search(d, premises, False, budget, kernel)


def check_value_indefinite(d: Diagram, a_id: str, b_id: str, budget: int = DEFAULT_BUDGET,
                           kernel=None) -> bool:
    """True iff ``b`` cannot be definite in any admissible assignment with ``a`` = 1."""
    for oid in (a_id, b_id):
        if oid not in d:
            raise UnknownId(oid)
    if a_id == b_id:
        return False
    for val in ("one", "zero"):
        if exists_admissible(d, [one(a_id), Premise(b_id, val)], budget, kernel).satisfiable:
            return False
    return True


def boolean_frame_function_exists(d: Diagram, premises: Iterable[Premise] = (),
                                  budget: int = DEFAULT_BUDGET, kernel=None) -> Verdict:
    """Decide whether a total 0/1 assignment with exactly one 1 per context exists.

    Total admissible assignments are exactly these: two 1s break the first
    rule and three 0s break the second.  Branching order is premise
    observables first, then descending context degree; value order 1, 0.
    """
    return _search(d, premises, True, budget, kernel)


def enumerate_frame_functions(d: Diagram, premises: Iterable[Premise] = (), kernel=None) -> Iterator[Assignment]:
    """Yield every total admissible assignment satisfying ``premises``."""
    kernel = kernel or _backend.kernel
    premises = _check_premises(d, premises)
    values, seeds = _initial(d, premises)
    ptr, idx = d.incidence
    ctx = d.context_array
    ids = d.ids

    def rec(v, seeds):
        out, _, conflict = kernel.closure(ctx, ptr, idx, v, np.asarray(seeds, dtype=np.int32))
        if conflict[0] != -1:
            return
        free = np.nonzero(out == -1)[0]
        if free.size == 0:
            yield Assignment({ids[i]: int(x) for i, x in enumerate(out)})
            return
        o = int(free[0])
        for val in (1, 0):
            w = out.copy()
            w[o] = val
            yield from rec(w, [o])

    yield from rec(values, seeds)
