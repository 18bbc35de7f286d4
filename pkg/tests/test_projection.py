import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cslearn.errors import BadDims, DimensionCollapsed, DimMismatch, OddTargetDim, TooLarge
from cslearn.projection import (Family, make_projector, materialize, project_rows,
                                project_subspace, project_vector)
from cslearn.subspace import Subspace, canonical_angles
from cslearn.synth import random_subspace

from oracles import dense_hadamard

DENSE = (Family.GAUSSIAN, Family.RADEMACHER)
FAST = (Family.HADAMARD, Family.FOURIER)
ALL = DENSE + FAST


def test_family_parse_aliases():
    assert Family.parse("srht") is Family.HADAMARD
    assert Family.parse("Bernoulli") is Family.RADEMACHER
    assert Family.parse(Family.FOURIER) is Family.FOURIER
    with pytest.raises(ValueError):
        Family.parse("sparse")


@pytest.mark.parametrize("n, N", [(0, 8), (8, 8), (9, 8)])
def test_bad_dims(n, N):
    with pytest.raises(BadDims):
        make_projector("gaussian", N, n)


def test_fourier_needs_even_target():
    with pytest.raises(OddTargetDim):
        make_projector("fourier", 16, 5)


def test_restriction_is_test_only():
    with pytest.raises(BadDims):
        make_projector("restriction", 8, 4)
    p = make_projector("restriction", 8, 4, testing=True)
    np.testing.assert_array_equal(project_vector(p, np.arange(8.0)), [0, 1, 2, 3])


@pytest.mark.parametrize("family", ALL)
def test_zero_vector_maps_to_zero(family):
    p = make_projector(family, 20, 8, seed=1)
    np.testing.assert_array_equal(project_vector(p, np.zeros(20)), np.zeros(8))


@pytest.mark.parametrize("family", ALL)
def test_linearity_and_shape(family):
    p = make_projector(family, 37, 10, seed=2)
    x = np.random.default_rng(0).normal(size=37)
    y = project_vector(p, x)
    assert y.shape == (10,)
    np.testing.assert_array_equal(project_vector(p, 2 * x), 2 * y)


@pytest.mark.parametrize("family", ALL)
def test_determinism(family):
    x = np.random.default_rng(0).normal(size=(3, 50))
    a = project_rows(make_projector(family, 50, 12, seed=9), x)
    b = project_rows(make_projector(family, 50, 12, seed=9), x)
    np.testing.assert_array_equal(a, b)
    c = project_rows(make_projector(family, 50, 12, seed=10), x)
    assert not np.array_equal(a, c)


def test_dimension_mismatch():
    p = make_projector("hadamard", 20, 8)
    with pytest.raises(DimMismatch):
        project_vector(p, np.ones(21))
    with pytest.raises(DimMismatch):
        project_subspace(p, Subspace(np.eye(21)[:, :2]))


def test_fast_family_state():
    p = make_projector("hadamard", 100, 30, seed=4)
    assert p.padded_dim == 128
    assert len(set(p.rows.tolist())) == 30
    q = make_projector("fourier", 100, 30, seed=4)
    assert len(set(q.rows.tolist())) == 15
    assert q.rows.min() >= 1 and q.rows.max() <= 63


def test_materialize_dense_families():
    g = make_projector("gaussian", 30, 6, seed=3)
    np.testing.assert_array_equal(materialize(g), g.matrix)
    x = np.random.default_rng(1).normal(size=30)
    np.testing.assert_allclose(project_vector(g, x), g.matrix @ x, atol=1e-12)
    r = make_projector("rademacher", 30, 6, seed=3)
    np.testing.assert_allclose(np.abs(materialize(r)), 1 / math.sqrt(6), rtol=0, atol=0)


def test_materialize_hadamard_by_hand():
    p = make_projector("hadamard", 8, 4, seed=5)
    h = dense_hadamard(8)
    want = math.sqrt(8 / 4) * h[p.rows] * p.signs[None, :]
    np.testing.assert_allclose(materialize(p), want, atol=1e-15)
    # signed Hadamard rows: every entry is +-sqrt(2)/sqrt(8)
    np.testing.assert_allclose(np.abs(materialize(p)), 0.5, atol=1e-15)


def test_materialize_guard():
    with pytest.raises(TooLarge):
        materialize(make_projector("hadamard", 5000, 16))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FAST), st.integers(3, 64), st.integers(0, 2 ** 32 - 1))
def test_fast_path_matches_materialized(family, N, seed):
    n = max(2, (N - 1) // 2 * 2) if family is Family.FOURIER else max(1, N // 2)
    p = make_projector(family, N, n, seed)
    x = np.random.default_rng(seed).normal(size=(100, N))
    np.testing.assert_allclose(project_rows(p, x), x @ materialize(p).T, atol=1e-10)


def test_gaussian_isometry_over_seeds():
    x = np.zeros(256)
    x[0] = 1.0
    vals = [np.sum(project_vector(make_projector("gaussian", 256, 64, s), x) ** 2)
            for s in range(2000)]
    assert 0.95 <= np.mean(vals) <= 1.05


def test_hadamard_all_ones_energy():
    N = 64
    vals = [np.sum(project_vector(make_projector("hadamard", N, 16, s), np.ones(N)) ** 2)
            for s in range(2000)]
    assert 0.95 * N <= np.mean(vals) <= 1.05 * N


@pytest.mark.parametrize("family", ALL)
def test_norm_preservation_small_sample(family):
    g = np.random.default_rng(8)
    x = g.normal(size=(400, 300))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    sq = np.concatenate([np.sum(project_rows(make_projector(family, 300, 128, s), x[s::20]) ** 2,
                                axis=1) for s in range(20)])
    assert 0.97 <= sq.mean() <= 1.03
    assert np.mean(np.abs(sq - 1) > 0.5) < 0.01


def test_project_subspace_keeps_dimension():
    s = Subspace(np.eye(40)[:, :3])
    img = project_subspace(make_projector("gaussian", 40, 12, seed=1), s)
    assert (img.source_ambient_dim, img.source_dim) == (40, 3)
    assert (img.image.ambient_dim, img.image.dim) == (12, 3)


def test_project_subspace_collapse_is_reported():
    s = Subspace(np.eye(10)[:, 5:8])   # orthogonal to the kept coordinates
    with pytest.raises(DimensionCollapsed):
        project_subspace(make_projector("restriction", 10, 4, testing=True), s)
    with pytest.raises(DimensionCollapsed):
        project_subspace(make_projector("gaussian", 10, 2), s)


def test_restriction_preserves_angles_inside_kept_block():
    g = np.random.default_rng(2)
    pad = np.zeros((4, 3))
    a = Subspace.from_spanning(np.vstack([g.normal(size=(6, 3)), pad]))
    b = Subspace.from_spanning(np.vstack([g.normal(size=(6, 3)), pad]))
    p = make_projector("restriction", 10, 6, testing=True)
    pa, pb = project_subspace(p, a).image, project_subspace(p, b).image
    np.testing.assert_allclose(canonical_angles(pa, pb), canonical_angles(a, b), atol=1e-12)


def test_angles_roughly_preserved_at_half_dimension():
    a, b = random_subspace(512, 3, 1), random_subspace(512, 3, 2)
    p = make_projector("gaussian", 512, 256, seed=3)
    before = canonical_angles(a, b)
    after = canonical_angles(project_subspace(p, a).image, project_subspace(p, b).image)
    assert np.all(np.abs(after - before) / before <= 0.5)


def test_hadamard_scaling_is_near_linear():
    x = np.random.default_rng(0).normal(size=(200, 2 ** 14))
    y = np.random.default_rng(0).normal(size=(200, 2 ** 16))
    ps, pl = make_projector("hadamard", 2 ** 14, 512), make_projector("hadamard", 2 ** 16, 512)
    project_rows(ps, x[:8])

    def best(p, m):
        times = []
        for _ in range(3):
            t0 = time.perf_counter()
            project_rows(p, m)
            times.append(time.perf_counter() - t0)
        return min(times)

    assert best(pl, y) / best(ps, x) <= 6.0
