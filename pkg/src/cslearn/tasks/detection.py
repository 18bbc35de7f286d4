"""Active subspace detection: which known subspace does an observation come from?"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import AmbientMismatch, BadAffinity, EmptyBank, ZeroVector
from ..numerics import RngState, as_matrix, as_vector, rng_gaussian
from ..projection import project_rows, project_subspace


@dataclass(frozen=True, eq=False)
class SubspaceBank:
    subspaces: tuple

    def __post_init__(self):
        subs = tuple(self.subspaces)
        if not subs:
            raise EmptyBank("a detection bank needs at least one subspace")
        if len({s.ambient_dim for s in subs}) != 1:
            raise AmbientMismatch("all subspaces in a bank must share the ambient dimension")
        object.__setattr__(self, "subspaces", subs)

    @property
    def ambient_dim(self):
        return self.subspaces[0].ambient_dim

    def __len__(self):
        return len(self.subspaces)


def _energies(bank, x):
    return np.column_stack([np.linalg.norm(x @ s.basis, axis=1) for s in bank.subspaces])


def detect_many(bank, points):
    """Maximum-energy decision for each row of ``points``.

    ``np.argmax`` returns the first maximizer, so ties go to the smallest index.
    """
    x = as_matrix(points, "points")
    if x.shape[1] != bank.ambient_dim:
        raise AmbientMismatch(f"points have length {x.shape[1]}, bank lives in R^{bank.ambient_dim}")
    if np.any(~x.any(axis=1)):
        raise ZeroVector("cannot detect the subspace of a zero observation")
    return np.argmax(_energies(bank, x), axis=1)


def detect(bank, x):
    return int(detect_many(bank, as_vector(x)[None, :])[0])


@lru_cache(maxsize=16)
def compress_bank(bank, projector):
    """Orthonormal bases of the projected subspaces (cached per bank/projector)."""
    return SubspaceBank(tuple(project_subspace(projector, s).image for s in bank.subspaces))


def detect_compressed_many(bank, points, projector):
    if projector.ambient_dim != bank.ambient_dim:
        raise AmbientMismatch("projector and bank ambient dimensions differ")
    return detect_many(compress_bank(bank, projector), project_rows(projector, points))


def detect_compressed(bank, x, projector):
    return int(detect_compressed_many(bank, as_vector(x)[None, :], projector)[0])


def sample_observations(bank, n_trials, delta, seed):
    """Draw observations ``U_i s + w`` with ``s ~ N(0, I/d)``, ``w ~ N(0, delta I/d)``.

    Hypotheses cycle through the bank so every one gets the same share.
    Returns ``(points, true_labels)``.
    """
    state = RngState(seed)
    N = bank.ambient_dim
    truth = np.arange(n_trials) % len(bank)
    pts = np.empty((n_trials, N))
    for i, s in enumerate(bank.subspaces):
        idx = np.flatnonzero(truth == i)
        d = s.dim
        coef = rng_gaussian(state, idx.size * d).reshape(idx.size, d) / math.sqrt(d)
        pts[idx] = coef @ s.basis.T
        if delta > 0:
            pts[idx] += rng_gaussian(state, idx.size * N).reshape(idx.size, N) * math.sqrt(delta / d)
    return pts, truth


def detection_error_rate(bank, n_trials, delta=0.0, seed=0, projector=None):
    """Monte-Carlo error rate of the detector (compressed when a projector is given)."""
    pts, truth = sample_observations(bank, n_trials, delta, seed)
    if projector is None:
        pred = detect_many(bank, pts)
    else:
        pred = detect_compressed_many(bank, pts, projector)
    return float(np.mean(pred != truth))


@dataclass(frozen=True)
class DetectionBound:
    affinity: tuple
    delta: float
    dim: int
    exponent: tuple       # C(aff_j, delta) per competing subspace
    probability: float    # lower bound on the correct-detection probability, in [0, 1]
    vacuous: bool


def detection_exponent(aff, delta, d):
    """The rate constant ``C(aff, delta)`` of the correct-detection bound.

    Returns ``(C, base)`` where ``base = (1 - aff^2/d - delta)/(1 + delta) - 8/d``.
    """
    base = (1.0 - aff * aff / d - delta) / (1.0 + delta) - 8.0 / d
    return base * base / (8.0 * (4.0 + base)), base


def detection_bound(aff, delta, d, competitors=1):
    """Lower bound ``1 - 4 sum_j exp(-C(aff_j, delta) d)`` on correct detection.

    ``aff`` is a scalar (shared by ``competitors`` competing subspaces) or one
    affinity per competitor. The bound is clamped to [0, 1]; it is flagged
    vacuous when it is not positive or when a ``base`` term is negative (the
    rate constant is then meaningless).
    """
    affs = np.atleast_1d(np.asarray(aff, dtype=float))
    if affs.size == 1:
        affs = np.repeat(affs, int(competitors))
    if delta < 0:
        raise BadAffinity("delta must be nonnegative")
    if d < 1 or np.any(affs < 0) or np.any(affs * affs > d * (1 + 1e-12)):
        raise BadAffinity("need 0 <= aff^2 <= d")
    pairs = [detection_exponent(a, delta, d) for a in affs]
    exps = tuple(float(c) for c, _ in pairs)
    raw = 1.0 - 4.0 * sum(math.exp(-c * d) for c in exps)
    vacuous = raw <= 0.0 or any(b < 0 for _, b in pairs)
    prob = 0.0 if vacuous else min(1.0, raw)
    return DetectionBound(tuple(float(a) for a in affs), float(delta), int(d), exps, prob, vacuous)
