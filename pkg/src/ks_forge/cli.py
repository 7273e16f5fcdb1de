"""``ks-forge`` command line.

Exit codes: 0 success or Satisfiable, 1 Unsatisfiable or a failed check,
2 bad usage (unparseable flags, violated preconditions, missing files).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, _json, analysis
from .assignments import (
    BACKEND,
    Premise,
    boolean_frame_function_exists,
    check_value_indefinite,
    exists_admissible,
)
from .diagram import Diagram, data_dir, export_dot, validate
from .errors import DegeneratePair, KsForgeError, PreconditionViolated, UnknownId
from .reductions import (
    construct_extended_witness,
    iterate_reduction,
    load_strong_gadget,
    reduce_toward,
)
from .vec3 import Ray

log = logging.getLogger("ks_forge")

NORM_WARN = 1e-6
NORM_FATAL = 1e-2


class UsageError(Exception):
    pass


# ------------------------------------------------------------ arg parsing

def parse_vector(text: str) -> Ray:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated vector") from None
    if len(vals) != 3 or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"{text!r} must have 3 finite components")
    n = math.sqrt(sum(v * v for v in vals))
    if abs(n - 1.0) > NORM_FATAL:
        raise argparse.ArgumentTypeError(f"{text!r} has norm {n:.6g}; expected a unit vector")
    if abs(n - 1.0) > NORM_WARN:
        log.warning("normalizing %s (norm %.9g)", text, n)
    return Ray.of(vals)


def _unit_interval(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"{text!r} must lie strictly between 0 and 1")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be a positive integer")
    return v


def _premise(text: str) -> Premise:
    try:
        return Premise.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    alt = data_dir() / p.name
    if alt.exists():
        return alt
    raise UsageError(f"no such file: {path}")


def _diagram(path: str) -> Diagram:
    return Diagram.load(_resolve(path))


def _pair(args) -> tuple[Ray, Ray]:
    if args.overlap is not None:
        if args.a is not None or args.b is not None:
            raise UsageError("--overlap excludes --a/--b")
        p = args.overlap
        return Ray.of((1.0, 0.0, 0.0)), Ray.of((p, math.sqrt(1.0 - p * p), 0.0))
    if args.a is None or args.b is None:
        raise UsageError("give --a and --b, or --overlap")
    return args.a, args.b


def _premises(args) -> list[Premise]:
    out = list(args.premise or [])
    if args.premises:
        data = _json.loads(_resolve(args.premises).read_text())
        if isinstance(data, dict):
            data = data.get("premises", [])
        out += [Premise.from_json(p) for p in data]
    return out


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    report = validate(_diagram(args.diagram), args.tol)
    _emit(args, _json.dumps(report.to_json()))
    return 0 if report.passed else 1


def cmd_solve(args) -> int:
    d = _diagram(args.diagram)
    prem = _premises(args)
    if args.frame:
        v = boolean_frame_function_exists(d, prem, args.budget)
    else:
        v = exists_admissible(d, prem, args.budget)
    out = v.to_json()
    out["mode"] = "frame" if args.frame else "three-valued"
    _emit(args, _json.dumps(out))
    print(v.outcome, file=sys.stderr)
    return 0 if v.satisfiable else 1


def cmd_indefinite(args) -> int:
    d = _diagram(args.diagram)
    ok = check_value_indefinite(d, args.a_id, args.b_id, args.budget)
    _emit(args, _json.dumps({"a": args.a_id, "b": args.b_id, "value_indefinite": ok}))
    return 0 if ok else 1


def cmd_reduce(args) -> int:
    a, b = _pair(args)
    c, gadget = reduce_toward(a, b, args.x, args.sign)
    out = {"c": c.to_json(), "gadget": gadget.to_json()}
    _emit(args, _json.dumps(out))
    return 0


def cmd_iterate(args) -> int:
    a, b = _pair(args)
    chain = iterate_reduction(a, b, args.budget)
    out = {"steps": len(chain), "final_overlap": abs(chain[-1].f),
           "chain": [t.to_json() for t in chain]}
    _emit(args, _json.dumps(out))
    return 0


def cmd_witness(args) -> int:
    a, b = _pair(args)
    strong = load_strong_gadget(args.strong_gadget)
    w = construct_extended_witness(a, b, strong)
    log.info("witness: %d observables, %d contexts", len(w.diagram), len(w.diagram.contexts))
    _emit(args, w.dumps())
    return 0


def cmd_sweep(args) -> int:
    rows = analysis.sweep_f(args.lo, args.hi, args.n, args.jobs)
    _emit(args, analysis.sweep_csv(rows))
    bad = analysis.sweep_violations(rows)
    if bad:
        print(f"{len(bad)} violations", file=sys.stderr)
    return 1 if bad else 0


def cmd_taylor(args) -> int:
    out = {
        "m": analysis.taylor_coefficient(),
        "closed_form": analysis.taylor_coefficient_closed_form(),
        "estimates": dict(zip((f"{e:g}" for e in analysis.TAYLOR_EPS), analysis.taylor_estimates())),
    }
    _emit(args, _json.dumps(out))
    return 0


def cmd_classify(args) -> int:
    _emit(args, _json.dumps(analysis.classify_observable(args.a, args.b, args.eps).to_json()))
    return 0


def cmd_sample(args) -> int:
    frac = analysis.measure_demo(args.a, args.samples, args.eps, args.seed, args.jobs)
    _emit(args, _json.dumps({"eps": args.eps, "samples": args.samples, "fraction": frac, "seed": args.seed}))
    return 0


def cmd_export(args) -> int:
    d = _diagram(args.diagram)
    assignment = None
    if args.assignment:
        assignment = {k: int(v) for k, v in _json.loads(_resolve(args.assignment).read_text()).items()}
    elif args.premise or args.premises:
        v = exists_admissible(d, _premises(args))
        if not v.satisfiable:
            print("premises are unsatisfiable; exporting without colouring", file=sys.stderr)
        else:
            assignment = dict(v.witness)
    _emit(args, export_dot(d, assignment, args.name))
    return 0


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ks-forge", allow_abbrev=False,
                                description="Kochen-Specker gadgets, value indefiniteness and the reduction map.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernel)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cmd(name, fn, help):
        s = sub.add_parser(name, help=help, description=help, allow_abbrev=False)
        s.set_defaults(fn=fn)
        return s

    def out(s):
        s.add_argument("--out", help="write to this file instead of stdout")

    def diagram(s):
        s.add_argument("--diagram", required=True, help="diagram JSON (falls back to the data directory)")

    def premises(s, required=False):
        s.add_argument("--premise", action="append", type=_premise, metavar="ID=1|0|definite",
                       help="requirement on one observable (repeatable)")
        s.add_argument("--premises", help="JSON list of {id, req} objects")

    def pair(s):
        s.add_argument("--a", type=parse_vector, help="unit vector, e.g. 1,0,0")
        s.add_argument("--b", type=parse_vector, help="unit vector")
        s.add_argument("--overlap", type=_unit_interval, help="use a=(1,0,0), b=(p,sqrt(1-p^2),0)")

    def budget(s, default):
        s.add_argument("--budget", type=_positive_int, default=default, help="search or step budget")

    s = cmd("validate", cmd_validate, "check that every context is an orthonormal triple")
    diagram(s)
    s.add_argument("--tol", type=float, default=1e-9)
    out(s)

    s = cmd("solve", cmd_solve, "decide whether an admissible assignment meets the premises")
    diagram(s)
    premises(s)
    s.add_argument("--frame", action="store_true", help="require a total 0/1 assignment instead")
    budget(s, 10**8)
    s.add_argument("--jobs", type=_positive_int, default=1, help="accepted for uniformity; the search is serial")
    out(s)

    s = cmd("indefinite", cmd_indefinite, "check that a=1 leaves b value indefinite")
    diagram(s)
    s.add_argument("--a-id", default="a")
    s.add_argument("--b-id", default="b")
    budget(s, 10**8)
    out(s)

    s = cmd("reduce", cmd_reduce, "build the reduction gadget forcing c with <a|c> = x")
    pair(s)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--sign", type=int, choices=(-1, 1), default=-1)
    out(s)

    s = cmd("iterate", cmd_iterate, "iterate the reduction until <a|c> <= 3/sqrt(14)")
    pair(s)
    budget(s, 10**6)
    out(s)

    s = cmd("witness", cmd_witness, "construct a diagram on which a=1 leaves b value indefinite")
    pair(s)
    s.add_argument("--strong-gadget", help="strong KS gadget JSON (default: bundled)")
    out(s)

    s = cmd("sweep", cmd_sweep, "tabulate f, f' and p1-f as CSV")
    s.add_argument("--lo", type=float, required=True)
    s.add_argument("--hi", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--jobs", type=_positive_int, default=1)
    out(s)

    s = cmd("taylor", cmd_taylor, "slope of f at p1 = 1")
    out(s)

    s = cmd("classify", cmd_classify, "classify b relative to the state a")
    s.add_argument("--a", type=parse_vector, required=True)
    s.add_argument("--b", type=parse_vector, required=True)
    s.add_argument("--eps", type=float, default=1e-9)
    out(s)

    s = cmd("sample", cmd_sample, "Monte Carlo fraction of value-definite rays")
    s.add_argument("--a", type=parse_vector, default=Ray.of((0.0, 0.0, 1.0)))
    s.add_argument("--samples", type=_positive_int, default=10**6)
    s.add_argument("--eps", type=float, default=1e-3)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--jobs", type=_positive_int, default=1)
    out(s)

    s = cmd("export", cmd_export, "write a diagram as Graphviz DOT")
    diagram(s)
    s.add_argument("--format", choices=("dot",), default="dot")
    s.add_argument("--assignment", help="JSON object id -> 0/1 to colour by")
    premises(s)
    s.add_argument("--name", default="greechie")
    out(s)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="ks-forge: %(message)s", stream=sys.stderr)
    try:
        with np.errstate(invalid="ignore", divide="ignore"):
            return args.fn(args)
    except (UsageError, PreconditionViolated, DegeneratePair, UnknownId, ValueError, OSError) as exc:
        print(f"ks-forge {args.command}: {exc}", file=sys.stderr)
        return 2
    except KsForgeError as exc:
        print(f"ks-forge {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
