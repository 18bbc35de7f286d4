"""Command-line front end.

Every command prints a result JSON object on stdout. Failures print a JSON
error object on stderr and exit with 2 (bad input), 3 (numerical
degeneracy) or 4 (internal invariant violation).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import __version__
from .capbench import CapExperimentConfig, estimate_constants, run_cap_experiment
from .errors import (ConfigError, CslError, InputError, InsufficientData, InvariantViolation,
                     NumericalError)
from .formats import (check_keys, dumps, load_json_object, non_finite_paths, read_labels,
                      read_matrix_csv, write_labels, write_matrix_csv, write_scatter_svg)
from .numerics import derive_seed
from .projection import Family, make_projector, project_rows
from .subspace import UNEQUAL_DIM_KINDS, DistanceKind, Subspace, canonical_angles, distance
from .synth import UosSpec, generate_uos
from .tasks import (SubspaceBank, cluster, detect_compressed_many, detect_many,
                    detection_bound, procrustes_align, sample_observations,
                    spectral_embedding, visualize)
from .subspace import affinity as subspace_affinity

SYNTH_KEYS = {"ambient_dim", "dims", "dim", "n_subspaces", "points_per_subspace",
              "noise_sigma", "seed", "orthogonal"}
PROJECTOR_KEYS = {"family", "n"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("UsageError", message)
        sys.exit(2)


def _emit_error(kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


class _Run:
    """Collects timing, warnings and results for one command invocation."""

    def __init__(self, command, seed_warning=None):
        self.command = command
        self.timing = {}
        self.warnings = [] if seed_warning is None else [seed_warning]
        self._t = None

    def phase(self, name):
        run = self

        class _Timer:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                run.timing[name] = run.timing.get(name, 0.0) + 1e3 * (time.perf_counter() - self.t0)
                return False

        return _Timer()

    def finish(self, config, seed, results):
        for path in non_finite_paths(results):
            self.warnings.append(f"results.{path} is not finite; written as null")
        out = {"tool": "cslearn", "version": __version__, "command": self.command,
               "config": config, "seed": seed, "results": results,
               "timing_ms": self.timing, "warnings": self.warnings}
        sys.stdout.write(dumps(out) + "\n")


def _resolve_seed(cli_seed, config_seed=None):
    if cli_seed is not None:
        return int(cli_seed), None
    if config_seed is not None:
        return int(config_seed), None
    env = os.environ.get("CSL_SEED")
    if env is not None and env.strip():
        try:
            return int(env), None
        except ValueError:
            raise ConfigError(f"CSL_SEED={env!r} is not an integer") from None
    return 0, "no --seed and no CSL_SEED; using seed 0"


def _synth_spec(obj, seed):
    check_keys(obj, SYNTH_KEYS, "synth")
    obj = dict(obj)
    try:
        N = int(obj["ambient_dim"])
        if "dims" in obj:
            dims = tuple(int(d) for d in obj["dims"])
        else:
            dims = (int(obj["dim"]),) * int(obj["n_subspaces"])
        return UosSpec(N, dims, obj["points_per_subspace"],
                       float(obj.get("noise_sigma", 0.0)), seed,
                       bool(obj.get("orthogonal", False)))
    except KeyError as exc:
        raise ConfigError(f"synth: missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"synth: {exc}") from None


def _projector(obj, N, seed):
    family = obj.get("family")
    n = obj.get("n")
    if family is None and n is None:
        return None
    if family is None or n is None:
        raise ConfigError("compression needs both 'family' and 'n'")
    return make_projector(Family.parse(family), N, int(n), derive_seed(seed, "projector"))


def _read_basis(path, header=False):
    """Basis files hold one spanning vector per row."""
    return Subspace.from_spanning(read_matrix_csv(path, header).T)


def _load_dataset(args, cfg, seed):
    """Points, labels and bases from the config's synth block or from files."""
    if "synth" in cfg:
        ds = generate_uos(_synth_spec(cfg["synth"], seed))
        return ds.data, ds.labels, list(ds.bases)
    if not args.data:
        raise ConfigError("give a 'synth' block in the config or --data")
    data = read_matrix_csv(args.data, args.header)
    labels = read_labels(args.labels) if args.labels else None
    bases = [_read_basis(p, args.header) for p in (args.bases or [])]
    if labels is not None and len(labels) != data.shape[0]:
        raise ConfigError("label count differs from the number of data rows")
    return data, labels, bases


def _config(args):
    return load_json_object(args.config) if getattr(args, "config", None) else {}


# ---------------------------------------------------------------------------
# commands

def cmd_synth(args):
    cfg = _config(args)
    seed, warn = _resolve_seed(args.seed, cfg.get("seed"))
    run = _Run("synth", warn)
    spec = _synth_spec(cfg, seed)
    with run.phase("generate"):
        ds = generate_uos(spec)
    with run.phase("write"):
        write_matrix_csv(args.out, ds.data)
        if args.labels:
            write_labels(args.labels, ds.labels)
        if args.bases_prefix:
            for i, b in enumerate(ds.bases):
                write_matrix_csv(f"{args.bases_prefix}{i}.csv", b.basis.T)
    run.finish(cfg, seed, {"points": ds.n_points, "ambient_dim": spec.ambient_dim,
                           "subspaces": spec.n_subspaces, "dims": list(spec.dims),
                           "data_file": args.out})


def cmd_project(args):
    seed, warn = _resolve_seed(args.seed)
    run = _Run("project", warn)
    with run.phase("read"):
        data = read_matrix_csv(args.input, args.header)
    N = data.shape[1]
    proj = make_projector(Family.parse(args.family), N, args.n, seed)
    with run.phase("project"):
        out = project_rows(proj, data)
    with run.phase("write"):
        write_matrix_csv(args.out, out)
    config = {"family": proj.family.value, "n": args.n, "input": args.input}
    run.finish(config, seed, {"rows": data.shape[0], "ambient_dim": N, "target_dim": args.n,
                              "padded_dim": proj.padded_dim})


def cmd_angles(args):
    run = _Run("angles")
    a, b = _read_basis(args.a, args.header), _read_basis(args.b, args.header)
    with run.phase("angles"):
        theta = canonical_angles(a, b)
    run.finish({"a": args.a, "b": args.b}, None,
               {"angles": theta, "dims": [a.dim, b.dim], "affinity": subspace_affinity(a, b)})


def cmd_distance(args):
    run = _Run("distance")
    a, b = _read_basis(args.a, args.header), _read_basis(args.b, args.header)
    if args.kind == "all":
        kinds = [k for k in DistanceKind if a.dim == b.dim or k in UNEQUAL_DIM_KINDS]
    else:
        kinds = [DistanceKind.parse(args.kind)]
    with run.phase("distance"):
        values = {k.value: distance(a, b, k) for k in kinds}
        theta = canonical_angles(a, b)
    run.finish({"a": args.a, "b": args.b, "kind": args.kind}, None,
               {"distance": values, "angles": theta, "dims": [a.dim, b.dim]})


CAP_KEYS = {"ambient_dim", "subspace_dims", "dim", "n_subspaces", "target_dims", "family",
            "trials", "seed", "angles", "failure_levels", "target_eps"}


def cmd_capbench(args):
    cfg = _config(args)
    check_keys(cfg, CAP_KEYS, "capbench")
    seed, warn = _resolve_seed(args.seed, cfg.get("seed"))
    run = _Run("capbench", warn)
    try:
        dims = cfg.get("subspace_dims")
        if dims is None:
            dims = [int(cfg["dim"])] * int(cfg.get("n_subspaces", 2))
        kwargs = {k: cfg[k] for k in ("family", "trials", "angles", "failure_levels") if k in cfg}
        exp = CapExperimentConfig(int(cfg["ambient_dim"]), tuple(dims), tuple(cfg["target_dims"]),
                                  seed=seed, **kwargs)
    except KeyError as exc:
        raise ConfigError(f"capbench: missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, CslError):
            raise
        raise ConfigError(f"capbench: {exc}") from None
    with run.phase("trials"):
        report = run_cap_experiment(exp, workers=args.threads)
    with run.phase("summary"):
        summary = report.summary()
    collapsed = sum(r["collapsed_trials"] for r in summary["per_n"])
    if collapsed:
        run.warnings.append(f"{collapsed} trials lost subspace dimension under projection")
    try:
        summary["constants"] = estimate_constants(report, float(cfg.get("target_eps", 0.1)))
    except InsufficientData as exc:
        summary["constants"] = None
        run.warnings.append(f"constants not estimated: {exc}")
    if args.raw:
        with run.phase("write"):
            write_matrix_csv(args.raw, np.array(list(report.raw_rows())),
                             header=["n", "trial", "i", "j", "k", "theta", "psi", "signed_rel"])
    if args.figure:
        from .plotting import plot_decay
        plot_decay(summary, args.figure)
    run.finish(_jsonable(asdict(exp)), seed, summary)


def _jsonable(d):
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}


VIS_KEYS = {"synth", "u", "v", "out_dim", "seed"} | PROJECTOR_KEYS


def cmd_visualize(args):
    cfg = _config(args)
    check_keys(cfg, VIS_KEYS, "visualize")
    seed, warn = _resolve_seed(args.seed, cfg.get("seed"))
    run = _Run("visualize", warn)
    with run.phase("load"):
        data, labels, bases = _load_dataset(args, cfg, seed)
    if labels is None or not bases:
        raise ConfigError("visualization needs labels and one basis per label")
    u, v = float(cfg.get("u", 1.0)), float(cfg.get("v", 1.0))
    out_dim = int(cfg.get("out_dim", 2))
    if out_dim not in (2, 3):
        raise ConfigError("out_dim must be 2 or 3")
    proj = _projector(cfg, data.shape[1], seed)
    with run.phase("embed"):
        emb = visualize(data, labels, bases, u, v, out_dim, projector=proj)
    results = {"points": data.shape[0], "eigenvalues": emb.eigenvalues, "compressed": proj is not None}
    if proj is not None:
        with run.phase("reference"):
            ref = visualize(data, labels, bases, u, v, out_dim)
        aligned = procrustes_align(ref.coords, emb.coords)
        results["relative_distortion"] = float(np.linalg.norm(aligned - ref.coords)
                                               / np.linalg.norm(ref.coords))
    names = ["x", "y", "z"][:out_dim] + ["label"]
    if args.out:
        write_matrix_csv(args.out, np.column_stack([emb.coords, labels]), header=names)
    if args.svg:
        write_scatter_svg(args.svg, emb.coords, labels)
    if args.figure:
        from .plotting import plot_embedding
        plot_embedding(emb.coords, labels, args.figure)
    run.finish(cfg, seed, results)


DETECT_KEYS = {"synth", "trials", "delta", "seed"} | PROJECTOR_KEYS


def cmd_detect(args):
    cfg = _config(args)
    check_keys(cfg, DETECT_KEYS, "detect")
    seed, warn = _resolve_seed(args.seed, cfg.get("seed"))
    run = _Run("detect", warn)
    delta = float(cfg.get("delta", 0.0))
    with run.phase("load"):
        if "synth" in cfg:
            spec = _synth_spec(cfg["synth"], seed)
            ds = generate_uos(spec)
            bank = SubspaceBank(ds.bases)
            if "trials" in cfg:
                pts, truth = sample_observations(bank, int(cfg["trials"]), delta,
                                                 derive_seed(seed, "observations"))
            else:
                pts, truth = ds.data, ds.labels
        else:
            pts, truth, bases = _load_dataset(args, cfg, seed)
            if not bases:
                raise ConfigError("detection needs --bases")
            bank = SubspaceBank(tuple(bases))
    proj = _projector(cfg, bank.ambient_dim, seed)
    with run.phase("detect"):
        pred = detect_many(bank, pts)
    results = {"observations": int(pts.shape[0]), "hypotheses": len(bank)}
    if proj is not None:
        with run.phase("detect_compressed"):
            pred_c = detect_compressed_many(bank, pts, proj)
    if truth is not None:
        results["error_rate"] = float(np.mean(pred != truth))
        if proj is not None:
            results["compressed_error_rate"] = float(np.mean(pred_c != truth))
    dims = {s.dim for s in bank.subspaces}
    if len(dims) == 1 and len(bank) > 1:
        d = dims.pop()
        worst = None
        for i, s in enumerate(bank.subspaces):
            affs = [subspace_affinity(s, t) for j, t in enumerate(bank.subspaces) if j != i]
            b = detection_bound(affs, delta, d)
            if worst is None or b.probability < worst.probability:
                worst = b
        results["correct_probability_bound"] = worst.probability
        results["bound_vacuous"] = worst.vacuous
    if args.out:
        write_labels(args.out, pred_c if proj is not None else pred)
    run.finish(cfg, seed, results)


CLUSTER_KEYS = {"synth", "k_max", "residual_tol", "n_clusters", "seed"} | PROJECTOR_KEYS


def cmd_cluster(args):
    cfg = _config(args)
    check_keys(cfg, CLUSTER_KEYS, "cluster")
    base, warn = _resolve_seed(args.seed, cfg.get("seed"))
    run = _Run("cluster", warn)
    if args.seeds < 1:
        raise ConfigError("--seeds must be >= 1")
    per_seed = []
    last = None
    for i in range(args.seeds):
        seed = base + i
        data, labels, _ = _load_dataset(args, cfg, seed)
        if "synth" in cfg:
            default_k = max(_synth_spec(cfg["synth"], seed).dims)
            default_l = len(_synth_spec(cfg["synth"], seed).dims)
        else:
            default_k, default_l = None, None if labels is None else len(np.unique(labels))
        k_max = cfg.get("k_max", default_k)
        n_clusters = cfg.get("n_clusters", default_l)
        if k_max is None or n_clusters is None:
            raise ConfigError("set k_max and n_clusters in the config")
        proj = _projector(cfg, data.shape[1], seed)
        res = cluster(data, int(n_clusters), int(k_max), projector=proj,
                      residual_tol=float(cfg.get("residual_tol", 1e-6)), seed=seed,
                      true_labels=labels)
        per_seed.append({"seed": seed, "error_rate": res.error,
                         "timing_ms": {k: 1e3 * v for k, v in res.timings.items()}})
        last = (res, labels)
    phases = per_seed[0]["timing_ms"].keys()
    run.timing.update({p: float(np.median([s["timing_ms"][p] for s in per_seed])) for p in phases})
    errs = [s["error_rate"] for s in per_seed if s["error_rate"] is not None]
    results = {"runs": per_seed, "compressed": "family" in cfg,
               "error_rate": float(np.median(errs)) if errs else None}
    res, _ = last
    if args.out:
        write_labels(args.out, res.labels)
    if args.svg or args.figure:
        coords = spectral_embedding(res.affinity, max(2, int(res.labels.max()) + 1))[:, -2:]
        if args.svg:
            write_scatter_svg(args.svg, coords, res.labels)
        if args.figure:
            from .plotting import plot_embedding
            plot_embedding(coords, res.labels, args.figure)
    run.finish(cfg, base, results)


# ---------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="cslearn", description="Compressed subspace learning toolkit")
    p.add_argument("--version", action="version", version=f"cslearn {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--header", action="store_true", help="input CSVs have a header line")
        sp.add_argument("--binary", action="store_true", help=argparse.SUPPRESS)
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    def data_inputs(sp):
        sp.add_argument("--config")
        sp.add_argument("--data")
        sp.add_argument("--labels")
        sp.add_argument("--bases", nargs="+", help="one CSV per subspace, spanning vectors as rows")

    s = sub.add_parser("synth", help="generate a union-of-subspaces dataset")
    s.add_argument("config")
    s.add_argument("--out", required=True)
    s.add_argument("--labels")
    s.add_argument("--bases-prefix")
    common(s)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("project", help="compress every row with one random projector")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--family", required=True, choices=["gaussian", "rademacher", "hadamard", "fourier"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--out", required=True)
    common(s)
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("angles", help="canonical angles between two subspaces")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    common(s, seed=False)
    s.set_defaults(func=cmd_angles)

    s = sub.add_parser("distance", help="subspace distance")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--kind", default="projection-f",
                   choices=[k.value for k in DistanceKind] + ["all"])
    common(s, seed=False)
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("capbench", help="measure angle/distance distortion under projection")
    s.add_argument("config")
    s.add_argument("--raw", help="per-trial CSV of angles")
    s.add_argument("--figure", help="decay plot (PNG/PDF/SVG by extension)")
    common(s)
    s.set_defaults(func=cmd_capbench)

    s = sub.add_parser("visualize", help="angle-based subspace visualization")
    data_inputs(s)
    s.add_argument("--out", help="coordinates CSV (x,y[,z],label)")
    s.add_argument("--svg")
    s.add_argument("--figure")
    common(s)
    s.set_defaults(func=cmd_visualize)

    s = sub.add_parser("detect", help="maximum-energy active subspace detection")
    data_inputs(s)
    s.add_argument("--out", help="predicted labels")
    common(s)
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("cluster", help="SSC-OMP subspace clustering")
    data_inputs(s)
    s.add_argument("--seeds", type=int, default=1)
    s.add_argument("--out", help="predicted labels of the last run")
    s.add_argument("--svg")
    s.add_argument("--figure")
    common(s)
    s.set_defaults(func=cmd_cluster)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "binary", False):
            raise ConfigError("--binary is not supported; use CSV input")
        if getattr(args, "threads", 1) < 1:
            raise ConfigError("--threads must be >= 1")
        args.func(args)
    except InputError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 2
    except NumericalError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 3
    except InvariantViolation as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 4
    except OSError as exc:
        _emit_error("FileError", str(exc))
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
