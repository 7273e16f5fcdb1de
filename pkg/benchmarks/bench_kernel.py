"""Compiled vs pure-Python propagation/search kernel.

    python3 benchmarks/bench_kernel.py [--repeat N]

Each workload runs through the public solver API with an explicit kernel,
so the numbers include the shared Python-side bookkeeping.
"""

from __future__ import annotations

import argparse
import importlib
import math
import timeit

import numpy as np

from ks_forge.assignments import (
    boolean_frame_function_exists,
    check_value_indefinite,
    exists_admissible,
    one,
    propagate,
)
from ks_forge.diagram import Diagram, Observable, load_data
from ks_forge.reductions import construct_extended_witness
from ks_forge.vec3 import Ray


def pair(p):
    return Ray.of((1.0, 0.0, 0.0)), Ray.of((p, math.sqrt(1 - p * p), 0.0))


def random_instances(count=300, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(8, 30))
        ctx = {tuple(sorted(rng.choice(n, 3, replace=False).tolist())) for _ in range(int(rng.integers(4, 20)))}
        d = Diagram([Observable(f"o{i}") for i in range(n)], [tuple(f"o{i}" for i in c) for c in ctx])
        out.append(d)
    return out


def workloads():
    peres = load_data("peres57.json")
    w9 = construct_extended_witness(*pair(0.9)).diagram
    wlong = construct_extended_witness(*pair(0.999999)).diagram
    rand = random_instances()
    ptr, idx = peres.incidence
    ctx = peres.context_array
    blank = np.full(len(peres), -1, dtype=np.int8)
    orders = [np.random.default_rng(i).permutation(len(peres)).astype(np.int32) for i in range(100)]
    return {
        "raw kernel: peres57, 100 branch orders": lambda k: [k.search(ctx, ptr, idx, blank, o, 10**9) for o in orders],
        "peres57 frame search": lambda k: boolean_frame_function_exists(peres, kernel=k),
        "witness p=0.9 indefiniteness": lambda k: check_value_indefinite(w9, "a", "b", kernel=k),
        f"closure on {len(wlong)}-observable witness": lambda k: propagate(wlong, [one("a"), one("b")], kernel=k),
        "300 random frame searches": lambda k: [boolean_frame_function_exists(d, kernel=k) for d in rand],
        "300 random three-valued searches": lambda k: [exists_admissible(d, [one("o0")], kernel=k) for d in rand],
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    kernels = {"python": importlib.import_module("ks_forge.assignments._kernel_py")}
    try:
        kernels["cython"] = importlib.import_module("ks_forge.assignments._kernel_c")
    except ImportError:
        print("compiled kernel not built; timing the pure-Python kernel only")
    print(f"{'workload':40s} " + " ".join(f"{k:>12s}" for k in kernels) + "   speedup")
    for name, fn in workloads().items():
        times = {}
        for kname, k in kernels.items():
            fn(k)  # warm-up
            times[kname] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
        cols = " ".join(f"{times[k] * 1e3:10.2f}ms" for k in kernels)
        speed = f"{times['python'] / times['cython']:8.1f}x" if "cython" in times else ""
        print(f"{name:40s} {cols} {speed}")


if __name__ == "__main__":
    main()
