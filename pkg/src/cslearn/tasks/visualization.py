"""Angle-based subspace visualization: dissimilarities, classical MDS, embedding."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DegenerateSpectrum, MissingBasis, NonPositiveEigenvalue, ZeroVector
from ..numerics import as_matrix, sym_eig, thin_svd
from ..projection import project_rows, project_subspace

GAP_TOL = 1e-9


@dataclass(frozen=True)
class DissimilarityMatrix:
    values: np.ndarray
    u: float
    v: float


@dataclass(frozen=True)
class EmbeddingCoords:
    coords: np.ndarray       # M x out_dim
    eigenvalues: np.ndarray  # the retained, nonincreasing


def _unit_rows(points):
    norms = np.linalg.norm(points, axis=1)
    if np.any(norms == 0):
        raise ZeroVector(f"data row {int(np.argmin(norms))} is zero")
    return points / norms[:, None]


def dissimilarity(points, labels, bases, u=1.0, v=1.0):
    """Pairwise dissimilarities between labelled points.

    Same label: ``sin^2`` of the angle between the two points. Different
    labels: ``(v sin t_ij + u min_k (sin t~_ik + sin t~_jk))^2`` where ``t~_ik``
    is the angle between point ``i`` and subspace ``k``. The minimum runs
    over all subspaces, the two home subspaces included.
    """
    x = as_matrix(points, "points")
    labels = np.asarray(labels, dtype=int)
    if u < 0 or v < 0:
        raise ConfigError("u and v must be nonnegative")
    if labels.min(initial=0) < 0 or labels.max(initial=-1) >= len(bases):
        raise MissingBasis(f"labels reference {labels.max() + 1} subspaces, {len(bases)} bases given")
    xh = _unit_rows(x)
    gram = xh @ xh.T
    gram = 0.5 * (gram + gram.T)
    sin2 = np.clip(1.0 - gram * gram, 0.0, 1.0)
    sin_pair = np.sqrt(sin2)

    # sin of point-to-subspace angle is the relative residual of projecting onto it
    sin_sub = np.empty((x.shape[0], len(bases)))
    for k, b in enumerate(bases):
        resid = xh - (xh @ b.basis) @ b.basis.T
        sin_sub[:, k] = np.clip(np.linalg.norm(resid, axis=1), 0.0, 1.0)
    through = np.min(sin_sub[:, None, :] + sin_sub[None, :, :], axis=2)

    cross = (v * sin_pair + u * through) ** 2
    same = labels[:, None] == labels[None, :]
    d = np.where(same, sin2, cross)
    np.fill_diagonal(d, 0.0)
    return DissimilarityMatrix(d, float(u), float(v))


def classical_mds(D, out_dim=2, strict_gaps=True):
    """Embed from a dissimilarity matrix by eigen-decomposing ``-H D H / 2``.

    Columns are ``sqrt(lambda_i) v_i`` for the top ``out_dim`` eigenpairs, each
    ``v_i`` signed so its largest-magnitude entry is positive. Requires the
    retained eigenvalues to be positive and separated from their neighbours.
    With ``strict_gaps=False`` only the gap below the retained block is
    checked: coordinates are then fixed up to a rotation, which is enough
    when only pairwise distances matter.
    """
    d = D.values if isinstance(D, DissimilarityMatrix) else as_matrix(D, "dissimilarity")
    m = d.shape[0]
    h = np.eye(m) - 1.0 / m
    b = -0.5 * h @ d @ h
    b = 0.5 * (b + b.T)
    eig = sym_eig(b)
    lam, vecs = eig.eigenvalues, eig.eigenvectors
    top = float(np.max(np.abs(lam), initial=0.0))
    if top <= 1e-14 * max(1.0, float(np.max(np.abs(d), initial=0.0))):
        raise DegenerateSpectrum("double-centred matrix is zero: all points coincide")
    if out_dim > m or lam[out_dim - 1] <= 1e-12 * top:
        raise NonPositiveEigenvalue(
            f"eigenvalue {out_dim} is not positive ({lam[min(out_dim, m) - 1]:.3e})")
    for i in range(min(out_dim, m - 1)):
        if not strict_gaps and i < out_dim - 1:
            continue
        if (lam[i] - lam[i + 1]) < GAP_TOL * top:
            raise DegenerateSpectrum(
                f"eigenvalues {i + 1} and {i + 2} coincide ({lam[i]:.6e}); embedding not unique")
    v = vecs[:, :out_dim].copy()
    lead = v[np.argmax(np.abs(v), axis=0), np.arange(out_dim)]
    v *= np.where(lead < 0, -1.0, 1.0)
    return EmbeddingCoords(v * np.sqrt(lam[:out_dim]), lam[:out_dim].copy())


def visualize(points, labels, bases, u=1.0, v=1.0, out_dim=2, projector=None):
    """Dissimilarities then MDS; with a projector both are computed in R^n."""
    if projector is not None:
        points = project_rows(projector, points)
        bases = [project_subspace(projector, b).image for b in bases]
    return classical_mds(dissimilarity(points, labels, bases, u, v), out_dim)


def procrustes_align(reference, moving):
    """Rotate/reflect ``moving`` onto ``reference`` (orthogonal Procrustes)."""
    r = thin_svd(moving.T @ reference)
    return moving @ (r.left @ r.right.T)
