"""Sparse subspace clustering with orthogonal matching pursuit (SSC-OMP)."""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.cluster import KMeans

from ..errors import BadClusterCount, ConfigError, DegenerateAtom, LengthMismatch
from ..numerics import as_matrix, sym_eig
from ..projection import project_rows

ISOLATED_DEGREE = 1e-12
EXACT_MATCH_LIMIT = 8


def ssc_omp(points, k_max, residual_tol=1e-6, return_residuals=False):
    """Self-expressive coefficients by OMP, all points in lockstep.

    Row ``j`` of the result expresses point ``j`` as a combination of the
    other points (original scale). Each point greedily picks the normalized
    atom most correlated with its residual, keeps an orthonormal basis of
    the chosen atoms, and stops after ``k_max`` atoms, once the residual is
    at most ``residual_tol`` of its norm, or when no atom correlates with
    the residual any more.

    With ``return_residuals`` a second array holds the residual norms
    (relative to the point norm) after each step, NaN once a point stopped.
    """
    x = as_matrix(points, "points")
    m, n = x.shape
    if m < 2:
        raise ConfigError("need at least two points")
    if k_max < 1:
        raise ConfigError("k_max must be >= 1")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise DegenerateAtom(f"point {int(np.argmin(norms))} has zero norm")
    k_max = min(int(k_max), m - 1, n)
    atoms = x / norms[:, None]
    resid = atoms.copy()
    basis = np.zeros((m, k_max, n))
    support = np.full((m, k_max), -1)
    history = np.full((m, k_max + 1), np.nan)
    history[:, 0] = 1.0
    active = np.arange(m)
    for step in range(k_max):
        r = resid[active]
        rnorm = np.linalg.norm(r, axis=1)
        corr = np.abs(r @ atoms.T)
        corr[np.arange(active.size), active] = -np.inf
        if step:
            np.put_along_axis(corr, support[active, :step], -np.inf, axis=1)
        best = np.argmax(corr, axis=1)
        best_val = corr[np.arange(active.size), best]
        go = (rnorm > residual_tol) & (best_val > 1e-12 * np.maximum(rnorm, 1e-300))
        active, best = active[go], best[go]
        if active.size == 0:
            break
        a = atoms[best]
        prev = basis[active, :step]
        for _ in range(2):
            a = a - np.einsum("mk,mkn->mn", np.einsum("mkn,mn->mk", prev, a), prev)
        a /= np.linalg.norm(a, axis=1, keepdims=True)
        basis[active, step] = a
        support[active, step] = best
        r = resid[active]
        r -= np.einsum("mn,mn->m", r, a)[:, None] * a
        resid[active] = r
        history[active, step + 1] = np.linalg.norm(r, axis=1)

    coef = np.zeros((m, m))
    used = support >= 0
    if used.any():
        idx = np.where(used, support, 0)
        chosen = atoms[idx] * used[:, :, None]              # m x k x n
        gram = np.einsum("mkn,mln->mkl", chosen, chosen)
        # unused slots are zero rows/cols; a unit diagonal there pins their coefficient to 0
        mi, ki = np.nonzero(~used)
        gram[mi, ki, ki] = 1.0
        rhs = np.einsum("mkn,mn->mk", chosen, atoms)
        c = np.linalg.solve(gram, rhs[:, :, None])[:, :, 0]
        rows = np.repeat(np.arange(m), k_max)[used.ravel()]
        cols = support[used]
        coef[rows, cols] = c[used]
    # back to the original scale: x_j = sum_i c_ji x_i
    coef *= norms[:, None] / norms[None, :]
    if return_residuals:
        return coef, history
    return coef


def spectral_embedding(W, n_clusters):
    """Row-normalized eigenvectors of the ``n_clusters`` smallest eigenvalues
    of the symmetric normalized Laplacian."""
    w = as_matrix(W, "affinity")
    m = w.shape[0]
    if not 1 <= n_clusters <= m:
        raise BadClusterCount(f"cannot split {m} points into {n_clusters} clusters")
    deg = w.sum(axis=1)
    deg[deg <= 0] = ISOLATED_DEGREE
    dm = 1.0 / np.sqrt(deg)
    lap = np.eye(m) - dm[:, None] * w * dm[None, :]
    vecs = sym_eig(lap).eigenvectors[:, m - n_clusters:]
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    return np.divide(vecs, norms, out=np.zeros_like(vecs), where=norms > 0)


def spectral_cluster(W, n_clusters, seed=0):
    emb = spectral_embedding(W, n_clusters)
    km = KMeans(n_clusters=n_clusters, init="k-means++", n_init=10, max_iter=100,
                random_state=int(seed) % (2 ** 32))
    return km.fit_predict(emb)


def clustering_error(pred, truth):
    """Fraction misclassified under the best one-to-one relabeling.

    Up to eight labels the best matching is found by trying every
    permutation; beyond that the assignment problem is solved exactly with
    the Hungarian method.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.size} predicted vs {truth.size} true labels")
    if pred.size == 0:
        return 0.0
    p_vals, p_idx = np.unique(pred, return_inverse=True)
    t_vals, t_idx = np.unique(truth, return_inverse=True)
    k = max(p_vals.size, t_vals.size)
    table = np.zeros((k, k), dtype=int)
    np.add.at(table, (p_idx, t_idx), 1)
    if k <= EXACT_MATCH_LIMIT:
        perms = np.array(list(itertools.permutations(range(k))))
        matched = table[np.arange(k), perms].sum(axis=1).max()
    else:
        r, c = linear_sum_assignment(-table)
        matched = table[r, c].sum()
    return float(1.0 - matched / pred.size)


@dataclass
class ClusteringResult:
    labels: np.ndarray
    coefficients: np.ndarray
    affinity: np.ndarray
    error: float | None = None
    timings: dict = field(default_factory=dict)  # seconds per phase


def cluster(points, n_clusters, k_max, projector=None, residual_tol=1e-6, seed=0,
            true_labels=None):
    """Optional compression, SSC-OMP coefficients, affinity, spectral clustering."""
    x = as_matrix(points, "points")
    timings = {"project": 0.0}
    if projector is not None:
        t0 = time.perf_counter()
        x = project_rows(projector, x)
        timings["project"] = time.perf_counter() - t0
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise DegenerateAtom("a point has zero norm")
    x = x / norms
    t0 = time.perf_counter()
    coef = ssc_omp(x, k_max, residual_tol)
    timings["build_coefficients"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    w = np.abs(coef)
    w = w + w.T
    labels = spectral_cluster(w, n_clusters, seed)
    timings["spectral"] = time.perf_counter() - t0
    err = None if true_labels is None else clustering_error(labels, true_labels)
    return ClusteringResult(labels, coef, w, err, timings)
