import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabgi import subspaces
from stabgi.errors import DimensionError, InputError
from stabgi.subspaces import Subspace


def line(*coords, n=None):
    v = np.asarray(coords, dtype=float)
    n = n if n is not None else v.size
    full = np.zeros(n)
    full[: v.size] = v
    return Subspace(n, (full / np.linalg.norm(full))[:, None])


def random_subspace(rng, n, k):
    if k == 0:
        return Subspace.trivial(n)
    return Subspace.span(rng.standard_normal((n, k)))


def test_subspace_validation():
    with pytest.raises(InputError):
        Subspace(2, np.array([[1.0, 1.0], [0.0, 1.0]]))  # not orthonormal
    with pytest.raises(InputError):
        Subspace(2, np.eye(3))
    with pytest.raises(InputError):
        Subspace(2, np.eye(2), tol=0.0)


def test_sum_examples():
    e1 = line(1, 0, 0)
    e2 = Subspace(3, np.eye(3)[:, 1:2])
    s = subspaces.sum(e1, e2)
    assert s.dim == 2
    assert subspaces.distance(s, Subspace.span(np.eye(3)[:, :2])) <= 1e-12

    u = line(1, 0)
    v = line(1, 1)
    assert subspaces.sum(u, v).dim == 2  # rank of [[1,1],[0,1]] is 2

    again = subspaces.sum(u, u)
    assert again.dim == u.dim
    assert subspaces.distance(again, u) <= 1e-12


def test_intersect_examples():
    w, witness = subspaces.intersect(line(1, 0), line(1, 1))
    assert w.dim == 0 and witness is None

    w, witness = subspaces.intersect(Subspace.full(2), line(1, 1))
    assert w.dim == 1
    expected = np.array([1.0, 1.0]) / np.sqrt(2.0)
    assert min(
        np.linalg.norm(witness - expected), np.linalg.norm(witness + expected)
    ) <= 1e-12

    u = line(3, 4)
    w, witness = subspaces.intersect(u, u)
    assert w.dim == 1
    assert subspaces.distance(w, u) <= 1e-12
    assert u.residual(witness) <= 1e-12


def test_is_complement_examples():
    assert subspaces.is_complement(line(1, 0), line(0, 1))
    assert subspaces.is_complement(line(1, 0), line(1, 1))
    assert not subspaces.is_complement(line(1, 0), line(1, 0))
    with pytest.raises(DimensionError):
        subspaces.is_complement(line(1, 0), line(1, 0, 0))


def test_distance_examples():
    u = line(2, 0)
    assert subspaces.distance(u, u) == 0.0
    assert subspaces.distance(line(1, 0), line(0, 1)) == pytest.approx(1.0)
    assert subspaces.distance(line(1, 0), line(1, 1)) == pytest.approx(
        np.sqrt(2.0) / 2.0, rel=1e-12
    )
    # dimension mismatch gives the sentinel
    assert subspaces.distance(Subspace.full(2), line(1, 0)) == 1.0
    assert not subspaces.equal(Subspace.full(2), line(1, 0))


def test_orthogonal_complement_examples():
    c = subspaces.orthogonal_complement(line(1, 0, 0))
    assert c.dim == 2
    assert np.max(np.abs(c.basis[0, :])) <= 1e-12

    assert subspaces.orthogonal_complement(Subspace.trivial(2)).dim == 2

    c = subspaces.orthogonal_complement(line(1, 1))
    expected = line(1, -1)
    assert subspaces.distance(c, expected) <= 1e-12


def test_double_orthogonal_complement(rng):
    for _ in range(50):
        n = int(rng.integers(1, 9))
        k = int(rng.integers(0, n + 1))
        u = random_subspace(rng, n, k)
        double = subspaces.orthogonal_complement(subspaces.orthogonal_complement(u))
        assert subspaces.distance(double, u) <= 1e-10


def test_dimension_formula(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        u = random_subspace(rng, n, int(rng.integers(0, n + 1)))
        v = random_subspace(rng, n, int(rng.integers(0, n + 1)))
        w, _ = subspaces.intersect(u, v)
        assert subspaces.sum(u, v).dim + w.dim == u.dim + v.dim


def test_witness_soundness(rng):
    found = 0
    for _ in range(300):
        n = int(rng.integers(2, 7))
        shared = rng.standard_normal((n, 1))
        u = Subspace.span(np.hstack([shared, rng.standard_normal((n, 1))]))
        v = Subspace.span(np.hstack([shared, rng.standard_normal((n, 1))]))
        w, witness = subspaces.intersect(u, v)
        if witness is None:
            continue
        found += 1
        tol = max(u.tol, v.tol)
        assert abs(np.linalg.norm(witness) - 1.0) <= 1e-10
        assert u.residual(witness) <= 10.0 * tol
        assert v.residual(witness) <= 10.0 * tol
    assert found > 250  # constructed intersections should be detected


def test_random_complement_draws(rng):
    for trial in range(500):
        n = int(rng.integers(1, 9))
        k = int(rng.integers(0, n + 1))
        u = random_subspace(rng, n, k)
        v = subspaces.random_complement(u, seed=int(rng.integers(2**63)))
        assert subspaces.is_complement(u, v)


def test_random_complement_edges():
    full = Subspace.full(3)
    assert subspaces.random_complement(full, 1).dim == 0
    assert subspaces.random_complement(Subspace.trivial(3), 1).dim == 3
    u = line(1, 0)
    v = subspaces.random_complement(u, 1)
    assert v.dim == 1 and subspaces.is_complement(u, v)
    # determinism
    v2 = subspaces.random_complement(u, 1)
    np.testing.assert_array_equal(v.basis, v2.basis)


def test_intersection_margin_structural():
    # dim U + dim V > ambient forces a nontrivial intersection
    u = Subspace.full(2)
    v = line(1, 1)
    assert subspaces.intersection_margin(u, v) == 0.0
    assert subspaces.intersection_margin(Subspace.trivial(2), v) == float("inf")


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_sum_contains_both_operands(n, seed):
    rng = np.random.default_rng(seed)
    u = random_subspace(rng, n, int(rng.integers(0, n + 1)))
    v = random_subspace(rng, n, int(rng.integers(0, n + 1)))
    s = subspaces.sum(u, v)
    assert s.dim >= max(u.dim, v.dim)
    for operand in (u, v):
        if operand.dim:
            projected = s.basis @ (s.basis.T @ operand.basis)
            assert np.max(np.abs(projected - operand.basis)) <= 1e-9
