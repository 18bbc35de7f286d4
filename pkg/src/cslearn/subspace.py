"""Subspaces, canonical angles, principal vectors and subspace distances."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import AmbientMismatch, BadDims, UnequalDimUnsupported, ZeroVector
from .numerics import as_matrix, as_vector, orthonormalize, thin_svd

_SQRT_HALF = np.sqrt(0.5)


@dataclass(frozen=True, eq=False)
class Subspace:
    """A ``dim``-dimensional subspace of R^ambient_dim held by an orthonormal basis.

    Use :meth:`from_spanning` for arbitrary spanning columns; the plain
    constructor expects the basis to already be orthonormal and checks it.
    """

    basis: np.ndarray

    def __post_init__(self):
        b = as_matrix(self.basis, "basis")
        n, d = b.shape
        if not 1 <= d <= n:
            raise BadDims(f"need 1 <= dim <= ambient_dim, got basis of shape {b.shape}")
        if np.max(np.abs(b.T @ b - np.eye(d))) > 1e-10:
            raise BadDims("basis columns are not orthonormal within 1e-10")
        b = b.copy()
        b.flags.writeable = False
        object.__setattr__(self, "basis", b)

    @classmethod
    def from_spanning(cls, columns):
        return cls(orthonormalize(columns))

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def project(self, x):
        """Orthogonal projection of ``x`` (vector or column stack) onto the subspace."""
        return self.basis @ (self.basis.T @ x)

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


class DistanceKind(enum.Enum):
    PROJECTION_F = "projection-f"
    FUBINI_STUDY = "fubini-study"
    GRASSMANN = "grassmann"
    BINET_CAUCHY = "binet-cauchy"
    PROCRUSTES = "procrustes"
    ASIMOV = "asimov"
    SPECTRAL = "spectral"
    PROJECTION = "projection"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for kind in cls:
            if key in (kind.value, kind.name.lower().replace("_", "-")):
                return kind
        raise ValueError(f"unknown distance kind {name!r}")


# kinds that have a generalization to subspaces of different dimensions
UNEQUAL_DIM_KINDS = frozenset(
    {DistanceKind.PROJECTION_F, DistanceKind.GRASSMANN, DistanceKind.PROCRUSTES})


@dataclass(frozen=True)
class PrincipalVectors:
    in_first: np.ndarray
    in_second: np.ndarray


def _check_pair(a, b):
    if a.ambient_dim != b.ambient_dim:
        raise AmbientMismatch(
            f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def _ordered(a, b):
    """Put the pair in a canonical order (smaller dim first, ties broken by
    basis bytes) so results are bitwise symmetric in the arguments."""
    ka = (a.dim, a.basis.tobytes())
    kb = (b.dim, b.basis.tobytes())
    return (a, b, False) if ka <= kb else (b, a, True)


def _angles_and_vectors(a, b):
    """Angles (ascending) between ``a`` and ``b`` with ``a.dim <= b.dim``,
    plus the principal-vector rotations of the thin SVD."""
    svd = thin_svd(a.basis.T @ b.basis)
    cos = np.clip(svd.singular_values, 0.0, 1.0)
    theta = np.arccos(cos)
    small = cos > _SQRT_HALF
    if small.any():
        # arccos is ill-conditioned near 1; take these angles from the sines
        xa = a.basis @ svd.left
        resid = xa - b.basis @ (b.basis.T @ xa)
        sines = np.sort(thin_svd(resid).singular_values)
        theta[small] = np.arcsin(np.clip(sines[small], 0.0, 1.0))
    return theta, svd


def canonical_angles(a, b):
    """Canonical angles between two subspaces, ``min(dim)`` values ascending in [0, pi/2]."""
    _check_pair(a, b)
    if a is b or np.array_equal(a.basis, b.basis):
        return np.zeros(a.dim)
    first, second, _ = _ordered(a, b)
    theta, _ = _angles_and_vectors(first, second)
    return np.maximum.accumulate(theta)


def principal_vectors(a, b):
    """Paired principal vectors; pair ``k`` has inner product ``cos(theta_k)``.

    Only the angles are canonical: with repeated singular values any rotation
    within the tied block is an equally valid set of principal vectors.
    """
    _check_pair(a, b)
    first, second, swapped = _ordered(a, b)
    svd = thin_svd(first.basis.T @ second.basis)
    k = first.dim
    u = first.basis @ svd.left[:, :k]
    v = second.basis @ svd.right[:, :k]
    if swapped:
        u, v = v, u
    return PrincipalVectors(u, v)


def vector_subspace_angle(x, s):
    """Angle between the line spanned by ``x`` and the subspace ``s``."""
    x = as_vector(x)
    if x.shape[0] != s.ambient_dim:
        raise AmbientMismatch(f"vector has length {x.shape[0]}, subspace lives in R^{s.ambient_dim}")
    nx = np.linalg.norm(x)
    if nx == 0.0:
        raise ZeroVector("angle to a zero vector is undefined")
    coef = s.basis.T @ x
    cos = min(1.0, np.linalg.norm(coef) / nx)
    if cos > _SQRT_HALF:
        sin = np.linalg.norm(x - s.basis @ coef) / nx
        return float(np.arcsin(min(1.0, sin)))
    return float(np.arccos(cos))


def affinity(a, b):
    """sqrt of the summed squared cosines of the canonical angles.

    The cosines are the singular values of ``a^T b``, so this is its
    Frobenius norm.
    """
    _check_pair(a, b)
    if a is b or np.array_equal(a.basis, b.basis):
        return float(np.sqrt(a.dim))
    first, second, _ = _ordered(a, b)
    value = np.linalg.norm(first.basis.T @ second.basis)
    return float(min(value, np.sqrt(min(a.dim, b.dim))))


def distance_from_angles(theta, kind, d1=None, d2=None):
    """Evaluate a subspace distance from ascending canonical angles.

    ``d1``/``d2`` are the two dimensions (default: both ``len(theta)``). With
    ``d1 != d2`` only the projection-F, Grassmann and Procrustes distances
    have a definition.
    """
    kind = DistanceKind.parse(kind)
    theta = np.asarray(theta, dtype=float)
    d1 = len(theta) if d1 is None else d1
    d2 = len(theta) if d2 is None else d2
    d1, d2 = min(d1, d2), max(d1, d2)
    extra = d2 - d1
    if extra and kind not in UNEQUAL_DIM_KINDS:
        raise UnequalDimUnsupported(kind.value)
    if kind is DistanceKind.PROJECTION_F:
        return float(np.sqrt(extra / 2.0 + np.sum(np.sin(theta) ** 2)))
    if kind is DistanceKind.GRASSMANN:
        return float(np.sqrt(extra * np.pi ** 2 / 4.0 + np.sum(theta ** 2)))
    if kind is DistanceKind.PROCRUSTES:
        half_sq = np.sum(np.sin(theta / 2.0) ** 2)
        if extra:
            return float(np.sqrt(extra + 2.0 * half_sq))
        return float(2.0 * np.sqrt(half_sq))
    if kind in (DistanceKind.FUBINI_STUDY, DistanceKind.BINET_CAUCHY):
        # 1 - prod(cos) via expm1 so tiny angles keep their relative precision
        with np.errstate(divide="ignore"):
            log_prod = float(0.5 * np.sum(np.log1p(-np.sin(theta) ** 2)))
        one_minus = -np.expm1(log_prod)
        if kind is DistanceKind.FUBINI_STUDY:
            return float(2.0 * np.arcsin(np.sqrt(max(0.0, one_minus) / 2.0)))
        return float(np.sqrt(max(0.0, -np.expm1(2.0 * log_prod))))
    largest = float(theta[-1])
    if kind is DistanceKind.ASIMOV:
        return largest
    if kind is DistanceKind.SPECTRAL:
        return float(2.0 * np.sin(largest / 2.0))
    return float(np.sin(largest))


def distance(a, b, kind):
    """Distance of the given kind between two subspaces."""
    kind = DistanceKind.parse(kind)
    _check_pair(a, b)
    if a.dim != b.dim and kind not in UNEQUAL_DIM_KINDS:
        raise UnequalDimUnsupported(kind.value)
    return distance_from_angles(canonical_angles(a, b), kind, a.dim, b.dim)
