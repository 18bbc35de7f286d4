"""Synthetic subspaces and union-of-subspaces datasets."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AmbientTooSmall, BadDims, ConfigError
from .numerics import RngState, derive_seed, orthonormalize, rng_gaussian
from .subspace import Subspace


@dataclass(frozen=True)
class AnglePrescription:
    ambient_dim: int
    angles: tuple

    def __post_init__(self):
        theta = np.asarray(self.angles, dtype=float)
        if theta.ndim != 1 or theta.size == 0:
            raise BadDims("need at least one angle")
        if np.any(theta < 0) or np.any(theta > np.pi / 2) or np.any(np.diff(theta) < 0):
            raise BadDims("angles must be sorted and lie in [0, pi/2]")
        if self.ambient_dim < 2 * theta.size:
            raise AmbientTooSmall(
                f"{theta.size} prescribed angles need ambient_dim >= {2 * theta.size}")
        object.__setattr__(self, "angles", tuple(float(t) for t in theta))

    @property
    def dim(self):
        return len(self.angles)


@dataclass(frozen=True)
class UosSpec:
    """Parameters of a synthetic union-of-subspaces dataset.

    Points are ``U_l s + w`` with ``s ~ N(0, I/d_l)`` and
    ``w ~ N(0, R/d_l)``, where ``R`` is ``noise_cov`` when given and
    ``noise_sigma**2 * I`` otherwise. ``orthogonal`` draws all bases from one
    random orthonormal frame so the subspaces are mutually orthogonal.
    """

    ambient_dim: int
    dims: tuple
    points_per_subspace: int | tuple
    noise_sigma: float = 0.0
    seed: int = 0
    orthogonal: bool = False
    noise_cov: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in np.atleast_1d(self.dims))
        object.__setattr__(self, "dims", dims)
        pts = self.points_per_subspace
        pts = tuple(int(p) for p in pts) if np.ndim(pts) else (int(pts),) * len(dims)
        object.__setattr__(self, "points_per_subspace", pts)
        if not dims:
            raise ConfigError("need at least one subspace")
        if len(pts) != len(dims):
            raise ConfigError("points_per_subspace must match the number of subspaces")
        if any(d < 1 or d > self.ambient_dim for d in dims):
            raise ConfigError(f"subspace dims {dims} must lie in [1, {self.ambient_dim}]")
        if self.orthogonal and sum(dims) > self.ambient_dim:
            raise ConfigError("mutually orthogonal subspaces need sum(dims) <= ambient_dim")
        if any(p < 1 for p in pts):
            raise ConfigError("points_per_subspace must be >= 1")
        if not self.noise_sigma >= 0:
            raise ConfigError("noise_sigma must be >= 0")
        if self.noise_cov is not None:
            cov = np.asarray(self.noise_cov, dtype=float)
            if cov.shape != (self.ambient_dim, self.ambient_dim):
                raise ConfigError("noise_cov must be ambient_dim x ambient_dim")

    @property
    def n_subspaces(self):
        return len(self.dims)


@dataclass(frozen=True, eq=False)
class UosDataset:
    data: np.ndarray      # M x N, one point per row
    labels: np.ndarray    # M ints in [0, L)
    bases: tuple          # L Subspaces

    @property
    def n_points(self):
        return self.data.shape[0]


def _gaussian_matrix(state, rows, cols):
    return rng_gaussian(state, rows * cols).reshape(rows, cols)


def random_orthonormal_frame(N, k, state):
    """N x k matrix with Haar-distributed orthonormal columns."""
    return orthonormalize(_gaussian_matrix(state, N, k))


def random_subspace(N, d, seed):
    if not 1 <= d <= N:
        raise BadDims(f"need 1 <= d <= N, got d={d}, N={N}")
    return Subspace(random_orthonormal_frame(N, d, RngState(seed)))


def subspace_pair_with_angles(prescription, seed):
    """Two subspaces whose canonical angles are exactly the prescribed ones.

    In coordinates the pair is span(e_1..e_d) and
    span(cos t_k e_k + sin t_k e_{d+k}); a seeded random rotation then hides
    that structure.
    """
    p = prescription
    d = p.dim
    theta = np.asarray(p.angles)
    frame = random_orthonormal_frame(p.ambient_dim, 2 * d, RngState(seed))
    first = frame[:, :d]
    second = first * np.cos(theta) + frame[:, d:] * np.sin(theta)
    return Subspace(first), Subspace(orthonormalize(second))


def generate_bases(spec):
    state = RngState(derive_seed(spec.seed, "bases"))
    if spec.orthogonal:
        frame = random_orthonormal_frame(spec.ambient_dim, sum(spec.dims), state)
        edges = np.cumsum((0,) + spec.dims)
        return tuple(Subspace(frame[:, a:b]) for a, b in zip(edges[:-1], edges[1:]))
    return tuple(Subspace(random_orthonormal_frame(spec.ambient_dim, d, state))
                 for d in spec.dims)


def generate_uos(spec, bases=None):
    """Sample a union-of-subspaces dataset. ``bases`` overrides the random ones."""
    bases = generate_bases(spec) if bases is None else tuple(bases)
    if len(bases) != spec.n_subspaces:
        raise ConfigError(f"expected {spec.n_subspaces} bases, got {len(bases)}")
    state = RngState(derive_seed(spec.seed, "points"))
    N = spec.ambient_dim
    chol = None
    if spec.noise_cov is not None:
        try:
            chol = np.linalg.cholesky(np.asarray(spec.noise_cov, dtype=float))
        except np.linalg.LinAlgError:
            raise ConfigError("noise_cov must be positive definite") from None
    blocks, labels = [], []
    for label, (basis, count) in enumerate(zip(bases, spec.points_per_subspace)):
        d = basis.dim
        coef = _gaussian_matrix(state, count, d) / np.sqrt(d)
        pts = coef @ basis.basis.T
        if chol is not None:
            pts += _gaussian_matrix(state, count, N) @ chol.T / np.sqrt(d)
        elif spec.noise_sigma > 0:
            pts += _gaussian_matrix(state, count, N) * (spec.noise_sigma / np.sqrt(d))
        blocks.append(pts)
        labels.append(np.full(count, label, dtype=int))
    return UosDataset(np.vstack(blocks), np.concatenate(labels), bases)
