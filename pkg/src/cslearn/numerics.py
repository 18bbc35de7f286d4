"""Dense linear-algebra and transform kernels.

Everything here works on plain ``numpy`` arrays. The decompositions are
Jacobi methods (one-sided for the SVD, two-sided cyclic for symmetric
eigenproblems) driven by a round-robin pair schedule so that every round of
disjoint rotations is applied as a handful of vectorized array operations.

Random numbers come from numpy's PCG64 bit generator. Gaussian variates are
produced with the Box-Muller transform from the uniform stream, so the
sequence for a given seed is fixed by this module rather than by numpy's
ziggurat implementation.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (CountExceedsPopulation, LengthNotPowerOfTwo, NoConvergence,
                     NonFiniteInput, NotSymmetric, RankDeficient)

MAX_SWEEPS = 100
RANK_TOL = 1e-10
_EPS = np.finfo(float).eps
_MASK64 = (1 << 64) - 1


def as_matrix(m, name="matrix"):
    """Return ``m`` as a finite 2-D float array (1-D input becomes a column)."""
    a = np.asarray(m, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise NonFiniteInput(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput(f"{name} has non-finite entries")
    return a


def as_vector(x, name="vector"):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise NonFiniteInput(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput(f"{name} has non-finite entries")
    return v


# ---------------------------------------------------------------------------
# orthonormalization

def orthonormalize(m):
    """Orthonormal basis for the column span of ``m``.

    Classical Gram-Schmidt with re-orthogonalization (up to three passes per
    column, Kahan-Parlett "twice is enough" test). A column whose residual
    after projection falls below ``RANK_TOL`` times its own norm is treated
    as dependent and raises :class:`RankDeficient`.
    """
    a = as_matrix(m)
    rows, cols = a.shape
    if cols > rows:
        raise RankDeficient(f"{cols} columns cannot be independent in R^{rows}")
    q = np.zeros((rows, cols))
    for j in range(cols):
        v = a[:, j].copy()
        norm0 = np.linalg.norm(v)
        if norm0 == 0.0:
            raise RankDeficient(f"column {j} is zero")
        prev = norm0
        for _ in range(3):
            basis = q[:, :j]
            v -= basis @ (basis.T @ v)
            cur = np.linalg.norm(v)
            if cur > 0.5 * prev:
                break
            prev = cur
        if cur <= RANK_TOL * norm0:
            raise RankDeficient(
                f"column {j} is numerically dependent on the previous ones "
                f"(relative residual {cur / norm0:.3e})")
        q[:, j] = v / cur
    return q


def _complete_basis(q, filled):
    """Fill the columns of ``q`` not flagged in ``filled`` with unit vectors
    orthogonal to everything already there."""
    rows, cols = q.shape
    have = [j for j in range(cols) if filled[j]]
    missing = [j for j in range(cols) if not filled[j]]
    basis = q[:, have]
    for j in missing:
        for e in range(rows):
            v = np.zeros(rows)
            v[e] = 1.0
            for _ in range(2):
                v -= basis @ (basis.T @ v)
            nv = np.linalg.norm(v)
            if nv > 0.5:
                q[:, j] = v / nv
                basis = np.column_stack([basis, q[:, j]])
                break
    return q


# ---------------------------------------------------------------------------
# Jacobi decompositions

@lru_cache(maxsize=64)
def _round_robin(n):
    """Circle-method schedule: n-1 rounds of n/2 disjoint pairs (n even)."""
    players = list(range(n))
    rounds = []
    half = n // 2
    for _ in range(n - 1):
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


@dataclass(frozen=True)
class SvdResult:
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray


@dataclass(frozen=True)
class EigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def thin_svd(m):
    """Thin SVD by one-sided (Hestenes) Jacobi.

    Returns ``min(rows, cols)`` singular values in nonincreasing order with
    orthonormal ``left`` and ``right`` factors. One-sided Jacobi keeps small
    singular values relatively accurate, which matters when they are cosines
    of angles close to pi/2.
    """
    a = as_matrix(m)
    if a.shape[0] < a.shape[1]:
        r = thin_svd(a.T)
        return SvdResult(r.right, r.singular_values, r.left)
    rows, cols = a.shape
    # work at unit scale so squared column norms neither underflow nor overflow
    scale = np.abs(a).max() if a.size else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        scale = 1.0
    a = a / scale
    width = cols + (cols % 2)
    u = np.zeros((rows, width))
    u[:, :cols] = a
    v = np.eye(width)
    tol = max(rows, 10) * _EPS
    # columns below this norm are rounding residue of a rank-deficient input
    floor = (tol * np.linalg.norm(a)) ** 2
    if width >= 2:
        schedule = _round_robin(width)
        for _ in range(MAX_SWEEPS):
            rotated = False
            for p, q in schedule:
                up, uq = u[:, p], u[:, q]
                alpha = np.einsum("ij,ij->j", up, up)
                beta = np.einsum("ij,ij->j", uq, uq)
                gamma = np.einsum("ij,ij->j", up, uq)
                act = (np.abs(gamma) > tol * np.sqrt(alpha * beta)) & (np.minimum(alpha, beta) > floor)
                if not act.any():
                    continue
                rotated = True
                p, q = p[act], q[act]
                alpha, beta, gamma = alpha[act], beta[act], gamma[act]
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for mat in (u, v):
                    mp, mq = mat[:, p], mat[:, q]
                    mat[:, p] = c * mp - s * mq
                    mat[:, q] = s * mp + c * mq
            if not rotated:
                break
        else:
            raise NoConvergence(f"one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps")
    u, v = u[:, :cols], v[:cols, :cols]
    sigma = np.linalg.norm(u, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, u, v = sigma[order], u[:, order], v[:, order]
    nonzero = sigma * sigma > floor
    sigma = np.where(nonzero, sigma, 0.0)
    left = np.zeros_like(u)
    left[:, nonzero] = u[:, nonzero] / sigma[nonzero]
    if not nonzero.all():
        left = _complete_basis(left, nonzero)
    return SvdResult(left, sigma * scale, v)


def sym_eig(m):
    """Eigen-decomposition of a symmetric matrix by cyclic threshold Jacobi.

    Eigenvalues are returned in nonincreasing order with matching unit-norm
    eigenvector columns.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if a.shape[1] != n:
        raise NotSymmetric(f"matrix must be square, got {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-10 * scale:
        raise NotSymmetric("matrix is not symmetric within 1e-10")
    width = n + (n % 2)
    w = np.zeros((width, width))
    w[:n, :n] = 0.5 * (a + a.T)
    vecs = np.eye(width)
    thresh = 1e-15 * max(np.linalg.norm(w), np.finfo(float).tiny)
    if width >= 2:
        schedule = _round_robin(width)
        for _ in range(MAX_SWEEPS):
            rotated = False
            for p, q in schedule:
                apq = w[p, q]
                act = np.abs(apq) > thresh
                if not act.any():
                    continue
                rotated = True
                p, q, apq = p[act], q[act], apq[act]
                tau = (w[q, q] - w[p, p]) / (2.0 * apq)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                cp, cq = w[:, p], w[:, q]
                w[:, p] = c * cp - s * cq
                w[:, q] = s * cp + c * cq
                rp, rq = w[p, :], w[q, :]
                w[p, :] = c[:, None] * rp - s[:, None] * rq
                w[q, :] = s[:, None] * rp + c[:, None] * rq
                w[p, q] = 0.0
                w[q, p] = 0.0
                vp, vq = vecs[:, p], vecs[:, q]
                vecs[:, p] = c * vp - s * vq
                vecs[:, q] = s * vp + c * vq
            if not rotated:
                break
        else:
            raise NoConvergence(f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps")
    vals = np.diag(w)[:n].copy()
    vecs = vecs[:n, :n]
    order = np.argsort(-vals, kind="stable")
    return EigResult(vals[order], vecs[:, order])


# ---------------------------------------------------------------------------
# fast transforms

def _check_pow2(n):
    if n < 1 or n & (n - 1):
        raise LengthNotPowerOfTwo(f"length {n} is not a power of two")


def next_pow2(n):
    return 1 << max(0, int(n) - 1).bit_length()


def fwht(x):
    """Orthonormal fast Walsh-Hadamard transform along the last axis.

    Natural (Sylvester) ordering, so ``fwht(e_j)`` is column ``j`` of
    ``hadamard(N) / sqrt(N)``. Accepts a vector or a stack of row vectors.
    """
    y = np.array(x, dtype=float)
    n = y.shape[-1]
    _check_pow2(n)
    lead = y.shape[:-1]
    y = y.reshape(-1, n)
    rows = y.shape[0]
    h = 1
    while h < n:
        blocks = y.reshape(rows, n // (2 * h), 2, h)
        top = blocks[:, :, 0, :]
        bottom = blocks[:, :, 1, :]
        tmp = top.copy()
        top += bottom
        np.subtract(tmp, bottom, out=bottom)
        h *= 2
    y *= 1.0 / np.sqrt(n)
    return y.reshape(*lead, n)


@lru_cache(maxsize=32)
def _bitrev(n):
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def dft(x):
    """Orthonormal DFT along the last axis (iterative radix-2, decimation in time).

    Coefficient ``k`` is ``N**-0.5 * sum_j x_j exp(-2 pi i j k / N)``.
    """
    y = np.asarray(x)
    n = y.shape[-1]
    _check_pow2(n)
    lead = y.shape[:-1]
    y = y.reshape(-1, n)[:, _bitrev(n)].astype(complex)
    rows = y.shape[0]
    h = 1
    while h < n:
        blocks = y.reshape(rows, n // (2 * h), 2, h)
        tw = np.exp(-1j * np.pi * np.arange(h) / h)
        even = blocks[:, :, 0, :]
        odd = blocks[:, :, 1, :] * tw
        y = np.stack([even + odd, even - odd], axis=2).reshape(rows, n)
        h *= 2
    y *= 1.0 / np.sqrt(n)
    return y.reshape(*lead, n)


# ---------------------------------------------------------------------------
# random numbers

def derive_seed(base, *keys):
    """Child seed ``base XOR hash(keys)``; stable across runs and platforms."""
    digest = hashlib.blake2b(repr(keys).encode(), digest_size=8).digest()
    return (int(base) ^ int.from_bytes(digest, "little")) & _MASK64


@dataclass
class RngState:
    """Seeded PCG64 stream. Single owner; derive seeds for parallel work."""

    seed: int
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.seed = int(self.seed) & _MASK64
        self.generator = np.random.Generator(np.random.PCG64(self.seed))


def rng_gaussian(state, count):
    """Standard normal variates via Box-Muller."""
    count = int(count)
    half = (count + 1) // 2
    gen = state.generator
    u1 = 1.0 - gen.random(half)  # (0, 1]
    u2 = gen.random(half)
    r = np.sqrt(-2.0 * np.log(u1))
    phase = 2.0 * np.pi * u2
    out = np.empty(2 * half)
    out[0::2] = r * np.cos(phase)
    out[1::2] = r * np.sin(phase)
    return out[:count]


def rng_rademacher(state, count):
    return state.generator.integers(0, 2, size=int(count)).astype(float) * 2.0 - 1.0


def rng_sample_without_replacement(state, population, count):
    """Uniformly random ``count``-subset of ``range(population)`` (in draw order)."""
    if count < 0 or count > population:
        raise CountExceedsPopulation(f"cannot draw {count} items from {population}")
    return state.generator.choice(int(population), size=int(count), replace=False)
