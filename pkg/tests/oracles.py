"""Independent reference implementations used only by the tests.

They are deliberately naive: direct sums, dense matrices, grid searches and
LAPACK via numpy.linalg, so that agreement with the package is meaningful.
"""
import itertools
import math

import numpy as np
from scipy.linalg import hadamard


def lapack_angles(a, b):
    """Canonical angles from LAPACK's SVD, arccos only."""
    qa, _ = np.linalg.qr(a)
    qb, _ = np.linalg.qr(b)
    s = np.linalg.svd(qa.T @ qb, compute_uv=False)
    return np.sort(np.arccos(np.clip(s, 0.0, 1.0)))


def _circle(basis, t):
    """Unit vectors basis @ (cos t, sin t) for an array of parameters t."""
    if basis.shape[1] == 1:
        return np.repeat(basis, t.size, axis=1)
    return basis[:, :1] * np.cos(t) + basis[:, 1:2] * np.sin(t)


def _grid_max(f, spans, levels=6, points=181):
    """Maximize f over a 1-D or 2-D box of circle parameters by zooming grids."""
    centre = [0.5 * (lo + hi) for lo, hi in spans]
    half = [0.5 * (hi - lo) for lo, hi in spans]
    best = None
    for _ in range(levels):
        axes = [np.linspace(c - h, c + h, points) for c, h in zip(centre, half)]
        mesh = np.meshgrid(*axes, indexing="ij")
        vals = f(*mesh)
        idx = np.unravel_index(np.argmax(vals), vals.shape)
        centre = [ax[i] for ax, i in zip(axes, idx)]
        best = vals[idx]
        half = [4.0 * (ax[1] - ax[0]) for ax in axes]
    return best, centre


def grid_angles(a, b):
    """Canonical angles straight from the max-min definition, for dims <= 2.

    The first angle maximizes |u.v| over unit u in span(a), v in span(b) by a
    grid search with refinement. For two planes the second angle is then
    fixed by the unit vectors orthogonal to the first pair.
    """
    qa, _ = np.linalg.qr(a)
    qb, _ = np.linalg.qr(b)
    if qa.shape[1] > qb.shape[1]:
        qa, qb = qb, qa
    da, db = qa.shape[1], qb.shape[1]
    assert db <= 2
    if da == 1 and db == 1:
        return np.array([math.acos(min(1.0, abs(float(qa[:, 0] @ qb[:, 0]))))])
    if da == 1:
        def f(t):
            return np.abs(qa[:, 0] @ _circle(qb, t.ravel())).reshape(t.shape)
        best, _ = _grid_max(f, [(0.0, math.pi)])
        return np.array([math.acos(min(1.0, best))])

    def f(s, t):
        u = _circle(qa, s.ravel())
        v = _circle(qb, t.ravel())
        return np.abs(np.einsum("ij,ij->j", u, v)).reshape(s.shape)

    # coarse global search first so the zoom starts in the right basin
    s0, t0 = np.meshgrid(np.linspace(0, math.pi, 361), np.linspace(0, math.pi, 361), indexing="ij")
    vals = f(s0, t0)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    step = math.pi / 360
    best, (s, t) = _grid_max(f, [(s0[i, j] - 2 * step, s0[i, j] + 2 * step),
                                 (t0[i, j] - 2 * step, t0[i, j] + 2 * step)], levels=7, points=61)
    u2 = _circle(qa, np.array([s + math.pi / 2]))[:, 0]
    v2 = _circle(qb, np.array([t + math.pi / 2]))[:, 0]
    first = math.acos(min(1.0, best))
    second = math.acos(min(1.0, abs(float(u2 @ v2))))
    return np.array(sorted([first, second]))


def dense_hadamard(n):
    return hadamard(n).astype(float) / math.sqrt(n)


def naive_dft(x):
    n = len(x)
    j = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(j, j) / n)
    return w @ x / math.sqrt(n)


def svd_2x2(m):
    """Singular values of a 2x2 matrix from the eigenvalues of m^T m."""
    g = m.T @ m
    tr, det = np.trace(g), np.linalg.det(g)
    disc = math.sqrt(max(tr * tr / 4 - det, 0.0))
    return np.sqrt(np.maximum([tr / 2 + disc, tr / 2 - disc], 0.0))


def table1_distances(theta):
    """All eight equal-dimension distances from the textbook formulas."""
    theta = np.asarray(theta, dtype=float)
    s, c = np.sin(theta), np.cos(theta)
    return {
        "projection-f": math.sqrt(np.sum(s ** 2)),
        "fubini-study": math.acos(min(1.0, float(np.prod(c)))),
        "grassmann": math.sqrt(np.sum(theta ** 2)),
        "binet-cauchy": math.sqrt(max(0.0, 1.0 - float(np.prod(c ** 2)))),
        "procrustes": 2.0 * math.sqrt(np.sum(np.sin(theta / 2) ** 2)),
        "asimov": float(theta.max()),
        "spectral": 2.0 * math.sin(float(theta.max()) / 2),
        "projection": math.sin(float(theta.max())),
    }


def best_match_error(pred, truth):
    """Permutation-minimal mismatch rate by enumerating every relabeling."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    labels = sorted(set(pred) | set(truth))
    best = 1.0
    for perm in itertools.permutations(labels):
        mapping = dict(zip(labels, perm))
        mapped = np.array([mapping[p] for p in pred])
        best = min(best, float(np.mean(mapped != truth)))
    return best


def rate_constant_by_hand(aff, delta, d):
    """Rate constant written out term by term, independent of the package."""
    frac = (1 - aff ** 2 / d - delta) / (1 + delta)
    num = (frac - 8 / d) ** 2
    den = 4 + frac - 8 / d
    return num / den / 8


def pairwise_distances(x):
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt(np.sum(diff ** 2, axis=2))


def rigid_align(reference, moving):
    """Orthogonal Procrustes via LAPACK, after centring both point sets."""
    r = reference - reference.mean(axis=0)
    m = moving - moving.mean(axis=0)
    u, _, vt = np.linalg.svd(m.T @ r)
    return m @ u @ vt, r
