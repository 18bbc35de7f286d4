"""Monte-Carlo measurement of how random projection distorts canonical angles.

For each target dimension ``n`` and each trial a fresh projector is drawn,
every subspace is projected, and the canonical angles (and the quantities
derived from them: sines, cosines, affinity, all subspace distances) of every
pair are compared with their values before projection.

A pair/trial "fails at level eps" when its largest relative angle distortion
exceeds eps. Failure fractions against ``eps**2 * n`` are what the
exponential tail constant is fitted on.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np

from .errors import ConfigError, DegenerateInput, DimensionCollapsed, InsufficientData
from .numerics import derive_seed
from .projection import Family, make_projector, project_subspace
from .subspace import (UNEQUAL_DIM_KINDS, DistanceKind, canonical_angles,
                       distance_from_angles)
from .synth import AnglePrescription, random_subspace, subspace_pair_with_angles

ZERO_ANGLE = 1e-12
DEFAULT_LEVELS = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)


@dataclass(frozen=True)
class CapExperimentConfig:
    ambient_dim: int
    subspace_dims: tuple
    target_dims: tuple
    family: str = "gaussian"
    trials: int = 100
    seed: int = 0
    angles: tuple | None = None
    failure_levels: tuple = DEFAULT_LEVELS

    def __post_init__(self):
        dims = tuple(int(d) for d in np.atleast_1d(self.subspace_dims))
        object.__setattr__(self, "subspace_dims", dims)
        object.__setattr__(self, "target_dims", tuple(sorted({int(n) for n in self.target_dims})))
        object.__setattr__(self, "failure_levels", tuple(float(e) for e in self.failure_levels))
        if self.angles is not None:
            object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
            if len(dims) == 1:
                dims = (dims[0], dims[0])
                object.__setattr__(self, "subspace_dims", dims)
            if dims != (len(self.angles),) * 2:
                raise ConfigError("prescribed angles need exactly two subspaces of dim len(angles)")
        Family.parse(self.family)
        if len(dims) < 2:
            raise ConfigError("need at least two subspaces")
        if not self.target_dims:
            raise ConfigError("need at least one target dimension")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        d = max(dims)
        for n in self.target_dims:
            if not d <= n < self.ambient_dim:
                raise ConfigError(f"target dim {n} must satisfy {d} <= n < {self.ambient_dim}")

    @property
    def n_subspaces(self):
        return len(self.subspace_dims)

    @property
    def max_dim(self):
        return max(self.subspace_dims)


def build_subspaces(cfg):
    """The fixed subspaces probed by every trial of an experiment."""
    seed = derive_seed(cfg.seed, "subspaces")
    if cfg.angles is not None:
        return subspace_pair_with_angles(AnglePrescription(cfg.ambient_dim, cfg.angles), seed)
    return tuple(random_subspace(cfg.ambient_dim, d, derive_seed(seed, i))
                 for i, d in enumerate(cfg.subspace_dims))


def _pair_distances(theta, d1, d2):
    out = np.full(len(DistanceKind), np.nan)
    for j, kind in enumerate(DistanceKind):
        if d1 == d2 or kind in UNEQUAL_DIM_KINDS:
            out[j] = distance_from_angles(theta, kind, d1, d2)
    return out


@dataclass
class _Block:
    """All raw measurements for one target dimension."""

    psi: np.ndarray        # trials x pairs x K   (NaN: padding or collapsed)
    affinity: np.ndarray   # trials x pairs
    distances: np.ndarray  # trials x pairs x kinds
    collapsed: int = 0


@dataclass
class DistortionReport:
    config: CapExperimentConfig
    pairs: list
    theta: np.ndarray        # pairs x K, NaN padded
    affinity: np.ndarray     # pairs
    distances: np.ndarray    # pairs x kinds
    blocks: dict = field(default_factory=dict)

    # -- raw distortions ----------------------------------------------------

    def _rel(self, new, old, valid):
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.abs(new - old) / np.abs(old)
        return np.where(valid, r, np.nan)

    def angle_distortion(self, n, signed=False):
        """Relative angle distortion, trials x pairs x K (NaN where theta = 0)."""
        psi = self.blocks[n].psi
        valid = self.theta > ZERO_ANGLE
        with np.errstate(invalid="ignore", divide="ignore"):
            r = (psi - self.theta) / self.theta
        r = np.where(valid, r, np.nan)
        return r if signed else np.abs(r)

    def absolute_angle_distortion(self, n):
        return np.abs(self.blocks[n].psi - self.theta)

    def sine_distortion(self, n):
        s = np.sin(self.theta)
        return self._rel(np.sin(self.blocks[n].psi), s, s > ZERO_ANGLE)

    def cosine_distortion(self, n):
        c = np.cos(self.theta)
        return self._rel(np.cos(self.blocks[n].psi), c, c > ZERO_ANGLE)

    def affinity_distortion(self, n):
        return self._rel(self.blocks[n].affinity, self.affinity, self.affinity > ZERO_ANGLE)

    def distance_distortion(self, n, kind):
        j = list(DistanceKind).index(DistanceKind.parse(kind))
        old = self.distances[:, j]
        return self._rel(self.blocks[n].distances[:, :, j], old, old > ZERO_ANGLE)

    def max_angle_distortion(self, n):
        """Per (trial, pair) worst relative angle distortion."""
        r = self.angle_distortion(n)
        with np.errstate(invalid="ignore"):
            worst = np.nanmax(np.where(np.isnan(r), -np.inf, r), axis=2)
        return np.where(np.isinf(worst), np.nan, worst)

    # -- summaries ----------------------------------------------------------

    @property
    def target_dims(self):
        return sorted(self.blocks)

    def median_angle_distortion(self):
        return np.array([_nanquantile(self.angle_distortion(n), 0.5) for n in self.target_dims])

    def failure_fraction(self, n, eps):
        worst = self.max_angle_distortion(n)
        worst = worst[~np.isnan(worst)]
        return float(np.mean(worst > eps)) if worst.size else math.nan

    def summary(self):
        rows = []
        for n in self.target_dims:
            ang = self.angle_distortion(n)
            signed = self.angle_distortion(n, signed=True)
            row = {
                "n": n,
                "trials": self.blocks[n].psi.shape[0],
                "collapsed_trials": self.blocks[n].collapsed,
                "angle_median": _nanquantile(ang, 0.5),
                "angle_p95": _nanquantile(ang, 0.95),
                "angle_signed_min": _nanmin(signed),
                "angle_signed_max": _nanmax(signed),
                "angle_abs_median": _nanquantile(self.absolute_angle_distortion(n), 0.5),
                "sine_median": _nanquantile(self.sine_distortion(n), 0.5),
                "cosine_median": _nanquantile(self.cosine_distortion(n), 0.5),
                "affinity_median": _nanquantile(self.affinity_distortion(n), 0.5),
                "distance_median": {k.value: _nanquantile(self.distance_distortion(n, k), 0.5)
                                    for k in DistanceKind},
                "distance_p95": {k.value: _nanquantile(self.distance_distortion(n, k), 0.95)
                                 for k in DistanceKind},
                "failure_fraction": {str(e): self.failure_fraction(n, e)
                                     for e in self.config.failure_levels},
            }
            rows.append(row)
        out = {"per_n": rows}
        meds = self.median_angle_distortion()
        try:
            slope, intercept, resid = fit_decay_slope(self.target_dims, meds)
            out["decay_fit"] = {"slope": slope, "intercept": intercept, "residual": resid}
        except DegenerateInput as exc:
            out["decay_fit"] = None
            out["decay_fit_error"] = str(exc)
        return out

    def raw_rows(self):
        """Flat per (n, trial, pair, k) records for CSV export."""
        for n in self.target_dims:
            psi = self.blocks[n].psi
            rel = self.angle_distortion(n, signed=True)
            for t in range(psi.shape[0]):
                for p, (i, j) in enumerate(self.pairs):
                    for k in range(psi.shape[2]):
                        if np.isnan(self.theta[p, k]):
                            continue
                        yield (n, t, i, j, k, self.theta[p, k], psi[t, p, k], rel[t, p, k])


def _finite_or_nan(a):
    a = np.asarray(a, dtype=float)
    return a[~np.isnan(a)]


def _nanquantile(a, q):
    a = _finite_or_nan(a)
    return float(np.quantile(a, q)) if a.size else math.nan


def _nanmin(a):
    a = _finite_or_nan(a)
    return float(a.min()) if a.size else math.nan


def _nanmax(a):
    a = _finite_or_nan(a)
    return float(a.max()) if a.size else math.nan


def run_cap_experiment(cfg, subspaces=None, *, workers=1, testing=False):
    """Run every (target dim, trial) of the experiment.

    ``subspaces`` overrides the generated ones (their dims must match the
    config). Trials whose projection loses rank are counted in
    ``collapsed`` and their measurements left as NaN.
    """
    subspaces = build_subspaces(cfg) if subspaces is None else tuple(subspaces)
    if tuple(s.dim for s in subspaces) != cfg.subspace_dims:
        raise ConfigError("subspace dims do not match the config")
    if any(s.ambient_dim != cfg.ambient_dim for s in subspaces):
        raise ConfigError("subspace ambient dims do not match the config")
    pairs = list(combinations(range(len(subspaces)), 2))
    K = max(min(subspaces[i].dim, subspaces[j].dim) for i, j in pairs)
    n_kinds = len(DistanceKind)

    theta = np.full((len(pairs), K), np.nan)
    aff = np.empty(len(pairs))
    dist = np.empty((len(pairs), n_kinds))
    for p, (i, j) in enumerate(pairs):
        t = canonical_angles(subspaces[i], subspaces[j])
        theta[p, :t.size] = t
        aff[p] = np.sqrt(np.sum(np.cos(t) ** 2))
        dist[p] = _pair_distances(t, subspaces[i].dim, subspaces[j].dim)

    family = Family.parse(cfg.family)

    def one_trial(job):
        n, trial = job
        proj = make_projector(family, cfg.ambient_dim, n, derive_seed(cfg.seed, n, trial),
                              testing=testing)
        psi = np.full((len(pairs), K), np.nan)
        a = np.full(len(pairs), np.nan)
        dd = np.full((len(pairs), n_kinds), np.nan)
        try:
            images = [project_subspace(proj, s).image for s in subspaces]
        except DimensionCollapsed:
            return psi, a, dd, True
        for p, (i, j) in enumerate(pairs):
            t = canonical_angles(images[i], images[j])
            psi[p, :t.size] = t
            a[p] = np.sqrt(np.sum(np.cos(t) ** 2))
            dd[p] = _pair_distances(t, images[i].dim, images[j].dim)
        return psi, a, dd, False

    jobs = [(n, t) for n in cfg.target_dims for t in range(cfg.trials)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_trial, jobs))
    else:
        results = [one_trial(job) for job in jobs]

    report = DistortionReport(cfg, pairs, theta, aff, dist)
    for idx, n in enumerate(cfg.target_dims):
        chunk = results[idx * cfg.trials:(idx + 1) * cfg.trials]
        report.blocks[n] = _Block(
            psi=np.stack([r[0] for r in chunk]),
            affinity=np.stack([r[1] for r in chunk]),
            distances=np.stack([r[2] for r in chunk]),
            collapsed=sum(r[3] for r in chunk),
        )
    return report


def fit_decay_slope(n_values, medians):
    """Least-squares line through (log n, log median).

    Returns ``(slope, intercept, residual)`` with ``residual`` the RMS of the
    log-space residuals.
    """
    n = np.asarray(n_values, dtype=float)
    m = np.asarray(medians, dtype=float)
    if n.shape != m.shape:
        raise DegenerateInput("n values and medians differ in length")
    if np.unique(n).size < 3:
        raise DegenerateInput("need at least three distinct target dimensions")
    if not np.all(np.isfinite(m)) or np.any(m <= 0) or np.any(n <= 0):
        raise DegenerateInput("medians and n values must be positive and finite")
    x, y = np.log(n), np.log(m)
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ [slope, intercept] - y) ** 2)))
    return float(slope), float(intercept), resid


def estimate_c2(eps_sq_n, fractions, units):
    """Fit ``fraction ~ exp(-c2 * eps^2 n)``.

    ``units`` is the number of (trial, pair) samples behind each fraction.
    Points with fraction strictly between 0 and 1 enter an ordinary least
    squares fit of log(fraction) on eps^2 n. With fewer than two such points
    and no failures at all, the result is the censored bound
    ``c2 >= log(units) / eps^2 n`` (largest over the points) and
    ``lower_bound`` is set.
    """
    x = np.asarray(eps_sq_n, dtype=float)
    f = np.asarray(fractions, dtype=float)
    u = np.broadcast_to(np.asarray(units, dtype=float), x.shape)
    inside = (f > 0) & (f < 1)
    if np.count_nonzero(inside) >= 2 and np.unique(x[inside]).size >= 2:
        A = np.column_stack([x[inside], np.ones(np.count_nonzero(inside))])
        (slope, intercept), *_ = np.linalg.lstsq(A, np.log(f[inside]), rcond=None)
        return {"c2": float(-slope), "lower_bound": False, "intercept": float(intercept),
                "points": int(np.count_nonzero(inside)),
                "x_range": [float(x[inside].min()), float(x[inside].max())]}
    zero = f == 0
    if zero.any() and not (f > 0).any():
        bound = float(np.max(np.log(u[zero]) / x[zero]))
        return {"c2": bound, "lower_bound": True, "intercept": None, "points": 0,
                "x_range": [float(x[zero].min()), float(x[zero].max())]}
    raise InsufficientData("fewer than two failure fractions strictly inside (0, 1)")


def estimate_constants(report, target_eps=0.1, min_trials=200):
    """Empirical stand-ins for the constants of the angle-preservation bound.

    ``c1``: the smallest tested ``n`` whose median relative angle distortion
    is at most ``target_eps`` gives ``c1 = n * eps^2 / max(d, log L)``. If no
    tested ``n`` gets there, ``n`` is extrapolated from the log-log decay
    fit and the result is marked ``extrapolated``.

    ``c2``: see :func:`estimate_c2`; all failure levels of the report are
    pooled.
    """
    cfg = report.config
    ns = report.target_dims
    if len(ns) < 3:
        raise InsufficientData("need at least three target dimensions")
    if min(report.blocks[n].psi.shape[0] for n in ns) < min_trials:
        raise InsufficientData(f"need at least {min_trials} trials per target dimension")
    scale = max(cfg.max_dim, math.log(cfg.n_subspaces))
    meds = report.median_angle_distortion()
    hits = [n for n, m in zip(ns, meds) if m <= target_eps]
    if hits:
        n_star, method = float(hits[0]), "observed"
    else:
        slope, intercept, _ = fit_decay_slope(ns, meds)
        if slope >= 0:
            raise InsufficientData("median distortion does not decay with n")
        n_star, method = float(np.exp((math.log(target_eps) - intercept) / slope)), "extrapolated"
    c1 = n_star * target_eps ** 2 / scale

    xs, fs = [], []
    units = len(report.pairs) * min(report.blocks[n].psi.shape[0] for n in ns)
    for eps in cfg.failure_levels:
        for n in ns:
            xs.append(eps * eps * n)
            fs.append(report.failure_fraction(n, eps))
    c2 = estimate_c2(xs, fs, units)
    return {
        "c1": c1,
        "c1_window": {"target_eps": target_eps, "n": n_star, "method": method,
                      "scale_max_d_logL": scale},
        "c2": c2["c2"],
        "c2_lower_bound": c2["lower_bound"],
        "c2_window": {"levels": list(cfg.failure_levels), "n": list(ns),
                      "points": c2["points"], "x_range": c2["x_range"]},
    }


def config_dict(cfg):
    return asdict(cfg)
