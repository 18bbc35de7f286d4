import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cslearn.errors import AmbientMismatch, BadDims, UnequalDimUnsupported, ZeroVector
from cslearn.numerics import orthonormalize
from cslearn.subspace import (UNEQUAL_DIM_KINDS, DistanceKind, Subspace, affinity,
                              canonical_angles, distance, distance_from_angles,
                              principal_vectors, vector_subspace_angle)

from conftest import e, span
from oracles import grid_angles, lapack_angles, table1_distances

seeds = st.integers(0, 2 ** 32 - 1)


def random_pair(seed, n_max=12, d_max=4):
    g = np.random.default_rng(seed)
    n = int(g.integers(2, n_max + 1))
    d1 = int(g.integers(1, min(d_max, n) + 1))
    d2 = int(g.integers(1, min(d_max, n) + 1))
    a = Subspace.from_spanning(g.normal(size=(n, d1)))
    b = Subspace.from_spanning(g.normal(size=(n, d2)))
    return a, b, g


def test_subspace_checks_orthonormal_basis():
    with pytest.raises(BadDims):
        Subspace(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(BadDims):
        Subspace(np.eye(3)[:, :0])
    s = span(e(1), e(2))
    assert (s.ambient_dim, s.dim) == (4, 2)
    with pytest.raises(ValueError):
        s.basis[0, 0] = 5.0


def test_three_planes_angles(plane_triple):
    s1, s2, s3 = plane_triple
    np.testing.assert_allclose(canonical_angles(s1, s2), [0.0, math.pi / 2], atol=1e-10)
    np.testing.assert_allclose(canonical_angles(s1, s3), [math.pi / 4, math.pi / 4], atol=1e-10)


def test_three_planes_projection_f(plane_triple):
    s1, s2, s3 = plane_triple
    assert abs(distance(s1, s2, "projection-f") - 1.0) <= 1e-12
    assert abs(distance(s1, s3, "projection-f") - 1.0) <= 1e-12


def test_three_planes_principal_vectors(plane_triple):
    s1, s2, _ = plane_triple
    pv = principal_vectors(s1, s2)
    ips = np.einsum("ij,ij->j", pv.in_first, pv.in_second)
    np.testing.assert_allclose(ips, [1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(np.abs(pv.in_first[:, 0]), e(1), atol=1e-12)


def test_self_angles_zero():
    s = span(e(1), e(2))
    np.testing.assert_array_equal(canonical_angles(s, s), [0.0, 0.0])
    pv = principal_vectors(s, s)
    np.testing.assert_allclose(np.einsum("ij,ij->j", pv.in_first, pv.in_second), [1, 1])


def test_ambient_mismatch():
    with pytest.raises(AmbientMismatch):
        canonical_angles(span(e(1, 3)), span(e(1, 4)))


def test_vector_subspace_angle():
    s = span(e(1, 3))
    assert vector_subspace_angle(e(1, 3), s) == 0.0
    assert abs(vector_subspace_angle(e(2, 3), s) - math.pi / 2) < 1e-15
    x = np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
    assert abs(vector_subspace_angle(x, s) - math.pi / 4) < 1e-15
    with pytest.raises(ZeroVector):
        vector_subspace_angle(np.zeros(3), s)


def test_vector_angle_tiny_is_accurate():
    x = np.array([1.0, 1e-9, 0.0])
    assert abs(vector_subspace_angle(x, span(e(1, 3))) - 1e-9) < 1e-20


def test_affinity_examples(plane_triple):
    s1, _, s3 = plane_triple
    s = span(e(1), e(2), e(3))
    assert abs(affinity(s, s) - math.sqrt(3)) < 1e-15
    assert affinity(span(e(1), e(2)), span(e(3), e(4))) == 0.0
    assert abs(affinity(s1, s3) - 1.0) < 1e-12


def test_distances_on_orthogonal_lines():
    want = {"binet-cauchy": 1.0, "projection": 1.0, "asimov": math.pi / 2,
            "grassmann": math.pi / 2, "projection-f": 1.0, "spectral": math.sqrt(2),
            "procrustes": math.sqrt(2), "fubini-study": math.pi / 2}
    a, b = span(e(1, 2)), span(e(2, 2))
    for kind, value in want.items():
        assert abs(distance(a, b, kind) - value) < 1e-15, kind


def test_distances_zero_for_identical():
    s = span(e(1), e(2) + e(3))
    for kind in DistanceKind:
        assert distance(s, s, kind) == 0.0


def test_projection_f_unequal_dims():
    a = span(e(1))
    b = span(e(1), e(2))
    assert abs(distance(a, b, "projection-f") - math.sqrt(0.5)) < 1e-15


def test_unequal_dims_unsupported_kinds():
    a, b = span(e(1)), span(e(1), e(2))
    for kind in DistanceKind:
        if kind in UNEQUAL_DIM_KINDS:
            distance(a, b, kind)
        else:
            with pytest.raises(UnequalDimUnsupported):
                distance(a, b, kind)


def test_distance_kind_parse():
    assert DistanceKind.parse("Projection-F") is DistanceKind.PROJECTION_F
    assert len(DistanceKind) == 8
    with pytest.raises(ValueError):
        DistanceKind.parse("cosine")


def test_small_angle_precision():
    # arccos alone would give errors ~1e-8 here
    t = 1e-9
    a = span(e(1, 3))
    b = span(np.array([math.cos(t), math.sin(t), 0.0]))
    assert abs(canonical_angles(a, b)[0] - t) < 1e-20
    assert abs(distance(a, b, "fubini-study") - t) < 1e-20
    assert abs(distance(a, b, "binet-cauchy") - math.sin(t)) < 1e-20


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_angles_match_lapack_and_are_sorted(seed):
    a, b, _ = random_pair(seed)
    theta = canonical_angles(a, b)
    assert theta.shape == (min(a.dim, b.dim),)
    assert np.all(np.diff(theta) >= 0)
    assert np.all((theta >= 0) & (theta <= math.pi / 2))
    np.testing.assert_allclose(theta, lapack_angles(a.basis, b.basis), atol=1e-7)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_angles_symmetric(seed):
    a, b, _ = random_pair(seed)
    np.testing.assert_array_equal(canonical_angles(a, b), canonical_angles(b, a))
    for kind in DistanceKind:
        if a.dim == b.dim or kind in UNEQUAL_DIM_KINDS:
            assert distance(a, b, kind) == distance(b, a, kind)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_rotation_invariance(seed):
    a, b, g = random_pair(seed)
    t = orthonormalize(g.normal(size=(a.ambient_dim, a.ambient_dim)))
    ta, tb = Subspace.from_spanning(t @ a.basis), Subspace.from_spanning(t @ b.basis)
    np.testing.assert_allclose(canonical_angles(ta, tb), canonical_angles(a, b), atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_basis_invariance(seed):
    a, b, g = random_pair(seed)
    mix = g.normal(size=(a.dim, a.dim)) + 3 * np.eye(a.dim)
    a2 = Subspace.from_spanning(a.basis @ mix)
    np.testing.assert_allclose(canonical_angles(a2, b), canonical_angles(a, b), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_grid_oracle_small_dims(seed):
    g = np.random.default_rng(seed)
    n = int(g.integers(2, 7))
    d1, d2 = int(g.integers(1, 3)), int(g.integers(1, 3))
    a = g.normal(size=(n, min(d1, n)))
    b = g.normal(size=(n, min(d2, n)))
    got = canonical_angles(Subspace.from_spanning(a), Subspace.from_spanning(b))
    np.testing.assert_allclose(got, grid_angles(a, b), atol=1e-5)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_principal_vectors_consistent(seed):
    a, b, _ = random_pair(seed)
    pv = principal_vectors(a, b)
    k = min(a.dim, b.dim)
    theta = canonical_angles(a, b)
    np.testing.assert_allclose(np.linalg.norm(pv.in_first, axis=0), 1.0, atol=1e-10)
    np.testing.assert_allclose(np.linalg.norm(pv.in_second, axis=0), 1.0, atol=1e-10)
    ips = np.einsum("ij,ij->j", pv.in_first, pv.in_second)
    np.testing.assert_allclose(ips, np.cos(theta), atol=1e-8)
    assert pv.in_first.shape == (a.ambient_dim, k)
    # columns of in_first lie in a, in_second in b
    np.testing.assert_allclose(a.project(pv.in_first), pv.in_first, atol=1e-10)
    np.testing.assert_allclose(b.project(pv.in_second), pv.in_second, atol=1e-10)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_distances_match_textbook_formulas(seed):
    a, b, g = random_pair(seed)
    b = Subspace.from_spanning(g.normal(size=(a.ambient_dim, a.dim)))
    theta = lapack_angles(a.basis, b.basis)
    want = table1_distances(theta)
    for kind in DistanceKind:
        assert abs(distance(a, b, kind) - want[kind.value]) < 1e-7, kind


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_affinity_and_projection_f_sum_to_dim(seed):
    a, _, g = random_pair(seed)
    b = Subspace.from_spanning(g.normal(size=(a.ambient_dim, a.dim)))
    total = affinity(a, b) ** 2 + distance(a, b, "projection-f") ** 2
    assert abs(total - a.dim) < 1e-10


def test_unequal_dim_formulas():
    theta = np.array([0.3])
    assert distance_from_angles(theta, "grassmann", 1, 3) == pytest.approx(
        math.sqrt(2 * math.pi ** 2 / 4 + 0.09), abs=1e-15)
    assert distance_from_angles(theta, "procrustes", 3, 1) == pytest.approx(
        math.sqrt(2 + 2 * math.sin(0.15) ** 2), abs=1e-15)
    assert distance_from_angles(theta, "projection-f", 1, 2) == pytest.approx(
        math.sqrt(0.5 + math.sin(0.3) ** 2), abs=1e-15)
