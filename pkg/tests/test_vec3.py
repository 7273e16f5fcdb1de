import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ks_forge.errors import DegeneratePair, NumericDomain
from ks_forge.vec3 import (
    Ray,
    Vector3,
    canonical_pair_basis,
    cross,
    dot,
    inner,
    is_orthogonal,
    norm,
    rotation_between_pairs,
    safe_arccos,
    safe_sqrt,
)

comp = st.floats(-10, 10, allow_nan=False)
vectors = st.tuples(comp, comp, comp).filter(lambda v: math.sqrt(sum(x * x for x in v)) > 1e-3)


@given(vectors)
def test_ray_sign_is_canonical(v):
    r = Ray.of(v)
    assert Ray.of([-x for x in v]) == r
    i = int(np.argmax(np.abs(r.array)))
    assert r.array[i] > 0
    assert abs(norm(r) - 1) < 1e-12


def test_ray_rejects_bad_norms():
    with pytest.raises(NumericDomain):
        Ray.of((1, 1, 0), normalize=False)
    with pytest.raises(NumericDomain):
        Ray.of((0, 0, 0))
    with pytest.raises(NumericDomain):
        Vector3.of((math.nan, 0, 0))


def test_ray_json_and_array():
    r = Ray.of((0, -3, 4))
    assert r.to_json() == pytest.approx([0, -0.6, 0.8])
    assert Ray.of(r.to_json(), normalize=False) == r
    assert np.asarray(r).shape == (3,)


@given(vectors, vectors)
def test_inner_is_symmetric_and_bounded(u, v):
    a, b = Ray.of(u), Ray.of(v)
    assert inner(a, b) == pytest.approx(inner(b, a))
    assert 0 <= inner(a, b) <= 1 + 1e-12


@given(vectors, vectors)
def test_cross_is_orthogonal(u, v):
    w = np.array(cross(u, v))
    scale = norm(u) * norm(v)
    assert abs(dot(w, u)) <= 1e-9 * scale * norm(u) + 1e-12
    assert abs(dot(w, v)) <= 1e-9 * scale * norm(v) + 1e-12


def test_cross_basis():
    assert cross((1, 0, 0), (0, 1, 0)) == Vector3(0, 0, 1)


@given(vectors, vectors)
@settings(max_examples=200)
def test_canonical_pair_basis(u, v):
    a, b = Ray.of(u), Ray.of(v)
    p = inner(a, b)
    if not 1e-6 < p < 1 - 1e-6:
        return
    m = canonical_pair_basis(a, b)
    assert is_orthogonal(m)
    assert np.allclose(m @ a.array, [1, 0, 0], atol=1e-12)
    img = m @ b.array
    img = img if dot(a, b) > 0 else -img
    assert np.allclose(img, [p, math.sqrt(1 - p * p), 0], atol=1e-9)


def test_canonical_pair_basis_degenerate():
    with pytest.raises(DegeneratePair):
        canonical_pair_basis(Ray.of((1, 0, 0)), Ray.of((0, 1, 0)))
    with pytest.raises(DegeneratePair):
        canonical_pair_basis(Ray.of((1, 0, 0)), Ray.of((1, 0, 0)))


def test_rotation_between_pairs():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a0, b0 = Ray.of(rng.standard_normal(3)), Ray.of(rng.standard_normal(3))
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        a1, b1 = Ray.of(q @ a0.array), Ray.of(q @ b0.array)
        r = rotation_between_pairs(a0, b0, a1, b1)
        assert is_orthogonal(r)
        assert Ray.of(r @ a0.array) == a1 or inner(Ray.of(r @ a0.array), a1) > 1 - 1e-12
        assert inner(Ray.of(r @ b0.array), b1) > 1 - 1e-12
    with pytest.raises(DegeneratePair):
        rotation_between_pairs(Ray.of((1, 0, 0)), Ray.of((1, 1, 0)), Ray.of((1, 0, 0)), Ray.of((1, 2, 0)))


def test_safe_functions():
    assert safe_sqrt(-1e-14) == 0.0
    assert safe_sqrt(4.0) == 2.0
    with pytest.raises(NumericDomain):
        safe_sqrt(-1e-6)
    assert safe_arccos(1 + 1e-14) == 0.0
    assert safe_arccos(-1 - 1e-14) == pytest.approx(math.pi)
    with pytest.raises(NumericDomain):
        safe_arccos(1.1)
    with pytest.raises(NumericDomain):
        safe_arccos(-1.1)


def test_is_orthogonal():
    assert is_orthogonal(np.eye(3))
    assert not is_orthogonal(2 * np.eye(3))
