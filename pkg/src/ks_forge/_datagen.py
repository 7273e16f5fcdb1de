"""Regenerates the JSON files under ``ks_forge/data``.

    python -m ks_forge._datagen [target-dir]

``fig1_reduction.json`` and ``fig2_iterated.json`` are abstract topologies
(no vectors); the others are realized and derived from them.
"""

from __future__ import annotations

import itertools
import math
import sys
from pathlib import Path


from .diagram import Diagram, Observable, data_dir, from_rays, realize
from .vec3 import Ray, cross, inner

FIG1_IDS = ("a", "b", "c", "u", "w", "u'", "w'")
FIG1_CONTEXTS = (("a", "u", "u'"), ("b", "w", "w'"), ("c", "u", "w"))
# three reduction copies: (a, b) -> v1, (a, v1) -> v2, (b, v2) -> c
FIG2_COPIES = (
    ("r1.", {"a": "a", "b": "b", "c": "v1"}),
    ("r2.", {"a": "a", "b": "v1", "c": "v2"}),
    ("r3.", {"a": "b", "b": "v2", "c": "c"}),
)


def fig1_topology() -> Diagram:
    return Diagram([Observable(i) for i in FIG1_IDS], FIG1_CONTEXTS)


def fig2_topology() -> Diagram:
    anchors = ["a", "b", "v1", "v2", "c"]
    obs = [Observable(i) for i in anchors]
    contexts = []
    for prefix, roles in FIG2_COPIES:
        name = {i: roles.get(i, prefix + i) for i in FIG1_IDS}
        obs += [Observable(name[i]) for i in FIG1_IDS if i not in roles]
        contexts += [tuple(name[m] for m in c) for c in FIG1_CONTEXTS]
    return Diagram(obs, contexts)


def fig2_anchor() -> Diagram:
    """The iterated gadget realized at <a|b> = 1/sqrt2."""
    from .reductions import iterated_step

    a = Ray.of((1.0, 0.0, 0.0))
    b = Ray.of((1.0, 1.0, 0.0))
    tr = iterated_step(a, b, strict=False)
    return realize(fig2_topology(), {"a": a, "b": b, "v1": tr.v1, "v2": tr.v2, "c": tr.c})


def peres_rays() -> list[tuple[float, float, float]]:
    """Peres' 33 rays: permutations and sign changes of (0,0,1), (0,1,+-1),
    (0,1,+-sqrt2) and (1,+-1,+-sqrt2)."""
    r2 = math.sqrt(2.0)
    base = [(0, 0, 1), (0, 1, 1), (0, 1, r2), (1, 1, r2)]
    rays: list[Ray] = []
    for v in base:
        for perm in set(itertools.permutations(v)):
            for signs in itertools.product((1, -1), repeat=3):
                r = Ray.of([s * x for s, x in zip(signs, perm)])
                if all(inner(r, o) < 1 - 1e-9 for o in rays):
                    rays.append(r)
    return rays


def peres_completed() -> Diagram:
    """Peres' set with every orthogonal pair completed to a triple (57 rays, 40 contexts)."""
    rays = peres_rays()
    extra: list[Ray] = []
    for u, v in itertools.combinations(rays, 2):
        if inner(u, v) < 1e-9:
            w = Ray.of(cross(u, v))
            if all(inner(w, o) < 1 - 1e-9 for o in rays + extra):
                extra.append(w)
    all_rays = rays + extra
    return from_rays([(f"r{i:02d}", r) for i, r in enumerate(all_rays)])


def build_all(target: Path) -> dict[str, Diagram]:
    from .reductions import build_strong_gadget

    target.mkdir(parents=True, exist_ok=True)
    files = {
        "fig1_reduction.json": fig1_topology(),
        "fig2_iterated.json": fig2_topology(),
    }
    for name, d in files.items():
        d.save(target / name)
    # realized files need the topologies on disk first
    files["fig2_anchor.json"] = fig2_anchor()
    files["strong_ks.json"] = build_strong_gadget()
    files["peres57.json"] = peres_completed()
    for name in ("fig2_anchor.json", "strong_ks.json", "peres57.json"):
        files[name].save(target / name)
    return files


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else data_dir()
    for name, d in build_all(out).items():
        print(f"{name}: {len(d)} observables, {len(d.contexts)} contexts")
