"""Johnson-Lindenstrauss projectors and the compression step.

Four families map R^N to R^n:

``gaussian``     dense, i.i.d. N(0, 1/n) entries
``rademacher``   dense, i.i.d. +-1/sqrt(n) entries
``hadamard``     sqrt(P/n) * S H D pad(x): random signs, orthonormal
                 Walsh-Hadamard transform, n sampled rows
``fourier``      the same pipeline with an orthonormal DFT; n/2 frequencies
                 are sampled from 1..P/2-1 and the output stacks
                 sqrt(2)*Re followed by sqrt(2)*Im of those coefficients

Here P is the least power of two >= N; inputs are zero padded to length P.
DC and Nyquist are never sampled because their coefficients are real. The
real/imaginary stacking is one way of getting a real-valued partial Fourier
sketch; each sampled frequency contributes 2|X_k|^2 and E|X_k|^2 = |x|^2/P
after sign randomization, so E|Phi x|^2 = |x|^2 as for the other families.

A fifth family, ``restriction`` ([I_n | 0]), is deterministic and exists only
for zero-distortion test fixtures; it is refused unless ``testing=True``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import BadDims, DimensionCollapsed, DimMismatch, OddTargetDim, RankDeficient, TooLarge
from .numerics import (RngState, as_matrix, as_vector, dft, fwht, next_pow2, orthonormalize,
                       rng_gaussian, rng_rademacher, rng_sample_without_replacement)
from .subspace import Subspace

MATERIALIZE_LIMIT = 4096
# rows per transform batch are chosen so a batch holds about this many doubles
_BATCH_ELEMENTS = 1 << 20


class Family(enum.Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    HADAMARD = "hadamard"
    FOURIER = "fourier"
    RESTRICTION = "restriction"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        aliases = {"bernoulli": "rademacher", "srht": "hadamard",
                   "subsampled-hadamard": "hadamard", "subsampled-fourier": "fourier"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise BadDims(f"unknown projector family {name!r}") from None

    @property
    def is_fast(self):
        return self in (Family.HADAMARD, Family.FOURIER)


@dataclass(frozen=True, eq=False)
class JlProjector:
    family: Family
    ambient_dim: int
    target_dim: int
    seed: int
    matrix: np.ndarray | None = field(default=None, repr=False)
    signs: np.ndarray | None = field(default=None, repr=False)
    rows: np.ndarray | None = field(default=None, repr=False)
    padded_dim: int = 0

    @property
    def scale(self):
        return np.sqrt(self.padded_dim / self.target_dim)


@dataclass(frozen=True)
class ProjectedSubspace:
    source_ambient_dim: int
    source_dim: int
    image: Subspace


def make_projector(family, N, n, seed=0, *, testing=False):
    """Build a seeded projector from R^N to R^n."""
    family = Family.parse(family)
    N, n = int(N), int(n)
    if not 1 <= n < N:
        raise BadDims(f"need 1 <= n < N, got n={n}, N={N}")
    if family is Family.RESTRICTION:
        if not testing:
            raise BadDims("the restriction family is a test fixture; pass testing=True")
        m = np.zeros((n, N))
        m[:, :n] = np.eye(n)
        return JlProjector(family, N, n, seed, matrix=m, padded_dim=N)
    state = RngState(seed)
    if family is Family.GAUSSIAN:
        m = rng_gaussian(state, n * N).reshape(n, N) / np.sqrt(n)
        return JlProjector(family, N, n, state.seed, matrix=m, padded_dim=N)
    if family is Family.RADEMACHER:
        m = rng_rademacher(state, n * N).reshape(n, N) / np.sqrt(n)
        return JlProjector(family, N, n, state.seed, matrix=m, padded_dim=N)
    pad = next_pow2(N)
    signs = rng_rademacher(state, pad)
    if family is Family.HADAMARD:
        rows = np.sort(rng_sample_without_replacement(state, pad, n))
    else:
        if n % 2:
            raise OddTargetDim(f"fourier family needs an even target dimension, got {n}")
        freqs = rng_sample_without_replacement(state, pad // 2 - 1, n // 2) + 1
        rows = np.sort(freqs)
    signs.flags.writeable = False
    rows.flags.writeable = False
    return JlProjector(family, N, n, state.seed, signs=signs, rows=rows, padded_dim=pad)


def _fast_apply(p, x):
    """Apply a fast-family projector to the rows of ``x`` (shape M x N)."""
    m = x.shape[0]
    out = np.empty((m, p.target_dim))
    step = max(1, _BATCH_ELEMENTS // p.padded_dim)
    buf = np.zeros((min(step, m), p.padded_dim))
    for start in range(0, m, step):
        chunk = x[start:start + step]
        k = chunk.shape[0]
        b = buf[:k]
        b[:, :p.ambient_dim] = chunk
        b[:, :p.ambient_dim] *= p.signs[:p.ambient_dim]
        if p.family is Family.HADAMARD:
            out[start:start + k] = fwht(b)[:, p.rows]
        else:
            coef = dft(b)[:, p.rows] * np.sqrt(2.0)
            half = p.target_dim // 2
            out[start:start + k, :half] = coef.real
            out[start:start + k, half:] = coef.imag
    out *= p.scale
    return out


def project_rows(p, x):
    """Project every row of ``x`` (M x N) with one shared projector."""
    x = as_matrix(x, "data")
    if x.shape[1] != p.ambient_dim:
        raise DimMismatch(f"rows have length {x.shape[1]}, projector expects {p.ambient_dim}")
    if p.matrix is not None:
        return x @ p.matrix.T
    return _fast_apply(p, x)


def project_vector(p, x):
    x = as_vector(x)
    if x.shape[0] != p.ambient_dim:
        raise DimMismatch(f"vector has length {x.shape[0]}, projector expects {p.ambient_dim}")
    return project_rows(p, x[None, :])[0]


def project_subspace(p, s):
    """Image of a subspace: orthonormalized projection of its basis."""
    if s.ambient_dim != p.ambient_dim:
        raise DimMismatch(f"subspace lives in R^{s.ambient_dim}, projector expects {p.ambient_dim}")
    if s.dim > p.target_dim:
        raise DimensionCollapsed(f"cannot fit a {s.dim}-dim subspace into R^{p.target_dim}")
    image = project_rows(p, s.basis.T).T
    try:
        q = orthonormalize(image)
    except RankDeficient as exc:
        raise DimensionCollapsed(f"projected basis lost rank: {exc}") from None
    return ProjectedSubspace(s.ambient_dim, s.dim, Subspace(q))


def _sylvester_hadamard(n):
    h = np.ones((1, 1))
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]])
    return h


def materialize(p):
    """The explicit n x N matrix of the projector.

    For the fast families this is built from dense transform matrices, not
    by running the fast path, so it can serve as an oracle for it.
    """
    if p.matrix is not None:
        return p.matrix.copy()
    pad = p.padded_dim
    if pad > MATERIALIZE_LIMIT:
        raise TooLarge(f"padded dimension {pad} exceeds {MATERIALIZE_LIMIT}")
    if p.family is Family.HADAMARD:
        sel = _sylvester_hadamard(pad)[p.rows] / np.sqrt(pad)
    else:
        j = np.arange(pad)
        f = np.exp(-2j * np.pi * np.outer(p.rows, j) / pad) / np.sqrt(pad)
        sel = np.sqrt(2.0) * np.vstack([f.real, f.imag])
    full = p.scale * sel * p.signs[None, :]
    return full[:, :p.ambient_dim]
