"""Three-dimensional real vector algebra over rays.

Rays are unit vectors up to an overall sign.  Every ``Ray`` is stored in a
canonical sign (largest-magnitude component positive, ties broken by the
first index), so two rays spanning the same line compare equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegeneratePair, NumericDomain


@dataclass(frozen=True)
class Tolerances:
    unit: float = 1e-10
    orth: float = 1e-9
    clamp: float = 1e-12


TOL = Tolerances()

Matrix3 = np.ndarray


class Vector3(NamedTuple):
    x: float
    y: float
    z: float

    @classmethod
    def of(cls, v) -> "Vector3":
        x, y, z = (float(c) for c in v)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise NumericDomain(f"non-finite vector component in {v!r}")
        return cls(x, y, z)

    def __array__(self, dtype=None, copy=None):
        return np.array(tuple(self), dtype=dtype or float)

    def to_json(self) -> list[float]:
        return [self.x, self.y, self.z]


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))  # argmax returns the first index on ties
    return -v if v[i] < 0 else v


@dataclass(frozen=True)
class Ray:
    """A one-dimensional subspace of R^3, realized by a sign-canonical unit vector."""

    v: Vector3

    def __post_init__(self):
        arr = np.asarray(self.v, dtype=float)
        n = float(np.linalg.norm(arr))
        if not math.isfinite(n) or abs(n - 1.0) > TOL.unit:
            raise NumericDomain(f"ray vector {tuple(arr)} has norm {n}, not 1")
        object.__setattr__(self, "v", Vector3.of(_canonical_sign(arr)))

    @classmethod
    def of(cls, v, normalize: bool = True) -> "Ray":
        arr = np.asarray(v, dtype=float)
        if normalize:
            n = float(np.linalg.norm(arr))
            if n == 0.0 or not math.isfinite(n):
                raise NumericDomain(f"cannot normalize {tuple(arr)}")
            arr = arr / n
        return cls(Vector3.of(arr))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.v, dtype=float)

    def __iter__(self):
        return iter(self.v)

    def __array__(self, dtype=None, copy=None):
        return np.array(tuple(self.v), dtype=dtype or float)

    def to_json(self) -> list[float]:
        return self.v.to_json()


def dot(u, v) -> float:
    return float(np.dot(np.asarray(u, dtype=float), np.asarray(v, dtype=float)))


def inner(u: Ray, v: Ray) -> float:
    """Overlap |<u|v>| of two rays."""
    return abs(dot(u, v))


def cross(u, v) -> Vector3:
    ux, uy, uz = (float(c) for c in u)
    vx, vy, vz = (float(c) for c in v)
    return Vector3(uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx)


def norm(v) -> float:
    return float(np.linalg.norm(np.asarray(v, dtype=float)))


def apply(m: Matrix3, v) -> Vector3:
    return Vector3.of(np.asarray(m, dtype=float) @ np.asarray(v, dtype=float))


def safe_sqrt(x: float, clamp: float | None = None) -> float:
    """Square root that clamps tiny negative rounding residue to zero."""
    clamp = TOL.clamp if clamp is None else clamp
    if x < 0.0:
        if x >= -clamp:
            return 0.0
        raise NumericDomain(f"sqrt of {x!r} is outside the clamp window {clamp}")
    return math.sqrt(x)


def safe_arccos(x: float, clamp: float | None = None) -> float:
    clamp = TOL.clamp if clamp is None else clamp
    if x > 1.0:
        if x - 1.0 > clamp:
            raise NumericDomain(f"arccos argument {x!r} > 1")
        x = 1.0
    elif x < -1.0:
        if -1.0 - x > clamp:
            raise NumericDomain(f"arccos argument {x!r} < -1")
        x = -1.0
    return math.acos(x)


def canonical_pair_basis(a, b, tol: float | None = None) -> Matrix3:
    """Orthogonal matrix taking ``a`` to (1,0,0) and ``b`` to (p,q,0).

    ``p`` is the overlap of the two rays and ``q = sqrt(1 - p**2) > 0``.
    Rays carry no sign, so ``b`` is flipped first when ``a.b < 0``; the image
    of the stored vector of ``b`` is then ``-(p, q, 0)``, the same ray.
    """
    tol = TOL.unit if tol is None else tol
    av = np.asarray(a, dtype=float)
    bv = np.asarray(b, dtype=float)
    s = float(av @ bv)
    p = abs(s)
    if p >= 1.0 - tol or p <= tol:
        raise DegeneratePair(f"overlap {p!r} is not strictly inside (0, 1)")
    if s < 0:
        bv = -bv
    e2 = bv - p * av
    e2 /= np.linalg.norm(e2)
    e3 = np.cross(av, e2)
    return np.vstack([av, e2, e3])


def rotation_between_pairs(a0, b0, a1, b1, tol: float | None = None) -> Matrix3:
    """Rotation R with R a0 = a1 and R b0 = b1 (as rays); overlaps must agree."""
    tol = TOL.unit if tol is None else tol
    p0, p1 = abs(dot(a0, b0)), abs(dot(a1, b1))
    if abs(p0 - p1) > tol:
        raise DegeneratePair(f"pair overlaps differ: {p0!r} vs {p1!r}")
    return canonical_pair_basis(a1, b1, tol).T @ canonical_pair_basis(a0, b0, tol)


def is_orthogonal(m: Matrix3, tol: float | None = None) -> bool:
    tol = TOL.orth if tol is None else tol
    m = np.asarray(m, dtype=float)
    return float(np.max(np.abs(m.T @ m - np.eye(3)))) <= tol
