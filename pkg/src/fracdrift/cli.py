"""Command-line front end: ``fracdrift simulate | estimate | sweep | validate``.

Every experiment is driven by one TOML file::

    seed = 7
    target = "b"              # or "bprime"

    [model]
    drift = "linear"          # linear | damped_sine | shifted_tanh
    params = [-1.0]
    x0 = 1.0
    sigma = 0.5
    H = 0.75

    [grid]
    T = 1.0
    n = 256

    [sample]
    N = 200
    # N_eval = 200

    [estimator]
    basis = "trig(-2,2,3)"
    kappa = 1.0
    epsilon = "rule"          # or a number
    m = "fixed"               # or "m_opt"
    smoothness = 1.0
    # anchor = "exact"

    [sweep]
    N = [50, 100, 200, 400]
    replications = 20
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .estimators import FitResult
from .experiments import (
    TrialConfig,
    occupation_density,
    rate_sweep,
    replication_seeds,
    run_trial,
    simulate_coupled,
    simulate_paths,
)
from .validation import run_checks

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_CONFIG = 2

REQUIRED = (
    ("model", "drift"),
    ("model", "x0"),
    ("model", "sigma"),
    ("model", "H"),
    ("grid", "T"),
    ("grid", "n"),
    ("sample", "N"),
    ("estimator", "basis"),
)

OPTIONAL = {
    # (table, key): TrialConfig field
    ("model", "params"): "drift_params",
    ("sample", "N_eval"): "N_eval",
    ("estimator", "kappa"): "kappa",
    ("estimator", "epsilon"): "epsilon",
    ("estimator", "m"): "m",
    ("estimator", "smoothness"): "smoothness",
    ("estimator", "anchor"): "anchor",
}


class ConfigError(Exception):
    pass


def _lookup(raw: dict, table: str, key: str):
    section = raw.get(table)
    if not isinstance(section, dict) or key not in section:
        raise ConfigError(f"missing required field '{table}.{key}'")
    return section[key]


def load_config(path, seed: int | None = None) -> tuple[TrialConfig, dict, bytes]:
    """Parse and validate a config file.

    Returns the trial config, the raw parsed mapping and the file bytes.
    ``seed`` overrides the top-level ``seed`` key.
    """
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = tomllib.loads(text.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None

    for table, key in REQUIRED:
        _lookup(raw, table, key)
    model, grid = raw["model"], raw["grid"]
    kwargs = dict(
        drift=model["drift"],
        x0=model["x0"],
        sigma=model["sigma"],
        H=model["H"],
        T=grid["T"],
        n=grid["n"],
        N_train=raw["sample"]["N"],
        basis=raw["estimator"]["basis"],
        target=raw.get("target", "b"),
        seed=raw.get("seed", 0) if seed is None else seed,
    )
    for (table, key), name in OPTIONAL.items():
        section = raw.get(table, {})
        if isinstance(section, dict) and key in section:
            kwargs[name] = section[key]
    if "drift_params" in kwargs:
        p = kwargs["drift_params"]
        kwargs["drift_params"] = tuple(p) if isinstance(p, list) else p
    if "kappa" not in kwargs and kwargs["target"] == "bprime":
        kwargs["kappa"] = 0.0
    for name in ("x0", "sigma", "H", "T", "kappa", "smoothness"):
        if name in kwargs and isinstance(kwargs[name], int) and not isinstance(kwargs[name], bool):
            kwargs[name] = float(kwargs[name])
    try:
        config = TrialConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None
    return config, raw, text


def _sweep_settings(raw: dict) -> tuple[list[int], int]:
    Ns = _lookup(raw, "sweep", "N")
    reps = _lookup(raw, "sweep", "replications")
    if not isinstance(Ns, list) or not all(isinstance(x, int) for x in Ns):
        raise ConfigError("'sweep.N' must be a list of integers")
    if not isinstance(reps, int) or reps < 1:
        raise ConfigError(f"'sweep.replications' must be a positive integer, got {reps!r}")
    if reps < 20:
        raise ConfigError(f"'sweep.replications' must be at least 20, got {reps}")
    if len(Ns) < 4 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ConfigError("'sweep.N' needs at least 4 strictly increasing sample sizes")
    return Ns, reps


def _prepare_out(out: Path, force: bool, config_bytes: bytes) -> None:
    if out.exists() and not out.is_dir():
        raise ConfigError(f"output path {out} exists and is not a directory")
    if out.exists() and any(out.iterdir()) and not force:
        raise ConfigError(f"output directory {out} is not empty; pass --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.toml").write_bytes(config_bytes)


def _finite_or_none(x):
    return x if x is not None and np.isfinite(x) else None


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def cmd_simulate(args) -> int:
    config, _, text = load_config(args.config, args.seed)
    out = Path(args.out)
    _prepare_out(out, args.force, text)
    train_seed, _ = replication_seeds(config.seed, 0)
    eps = config.resolve_epsilon()
    coupled = simulate_coupled(config, train_seed, config.N_train, eps)

    paths_dir = out / "paths"
    paths_dir.mkdir(exist_ok=True)
    for stale in paths_dir.glob("path_*.csv"):
        stale.unlink()
    times = config.grid.times
    width = max(4, len(str(config.N_train - 1)))
    files = []
    for i, pair in enumerate(coupled):
        name = f"path_{i:0{width}d}.csv"
        rows = np.column_stack([times, pair.low.values, pair.high.values])
        np.savetxt(paths_dir / name, rows, fmt="%.17g", delimiter=",",
                   header="t,x_low,x_high", comments="")
        files.append(f"paths/{name}")
    _write_json(out / "manifest.json", {
        "config": asdict(config),
        "epsilon": eps,
        "training_seed": train_seed,
        "files": files,
    })
    print(f"wrote {len(files)} coupled paths to {paths_dir}")
    return 0


def _density_csv(path: Path, density, edges) -> None:
    centers = 0.5 * (edges[:-1] + edges[1:])
    rows = np.column_stack([edges[:-1], edges[1:], centers, density])
    np.savetxt(path, rows, fmt="%.17g", delimiter=",", header="left,right,center,density",
               comments="")


def cmd_estimate(args) -> int:
    config, _, text = load_config(args.config, args.seed)
    out = Path(args.out)
    _prepare_out(out, args.force, text)
    report = run_trial(config, 0, keep_fit=True)
    fit: FitResult = report.fit
    meta_path = fit.to_csv(out / "fit.csv")
    meta = json.loads(meta_path.read_text())
    meta.update(
        empirical_risk_train=report.empirical_risk_train,
        weighted_risk_holdout=report.weighted_risk_holdout,
        raw_risk_holdout=_finite_or_none(report.raw_risk_holdout),
        primitive_sup_error=report.primitive_sup_error,
    )
    _write_json(meta_path, meta)

    _, eval_seed = replication_seeds(config.seed, 0)
    holdout = simulate_paths(config, eval_seed, config.n_eval)
    spec = fit.basis
    if spec.compact:
        edges = np.linspace(spec.lower, spec.upper, 41)
    else:
        edges = np.linspace(holdout.min(), holdout.max(), 41)
    density, edges = occupation_density(holdout, edges, config.grid)
    _density_csv(out / "density.csv", density, edges)

    state = "truncated to zero" if fit.truncated else "kept"
    print(f"{fit.target} fit in {spec}: {state}; ||Psi^-1|| = {fit.opnorm_inv:.4g}, "
          f"holdout risk = {report.weighted_risk_holdout:.4g}")
    return 0


def cmd_sweep(args) -> int:
    config, raw, text = load_config(args.config, args.seed)
    Ns, reps = _sweep_settings(raw)
    out = Path(args.out)
    _prepare_out(out, args.force, text)
    result = rate_sweep(config, Ns, reps, jobs=args.jobs)
    result.to_csv(out / "sweep.csv")
    for row in result.rows:
        print(f"N={row.N:6d}  m={row.m:3d}  risk={row.mean_risk:.4g} +- {row.se:.2g}  "
              f"truncated={row.truncation_rate:.2f}")
    print(f"slope = {result.slope:.4f}")
    return 0


def cmd_validate(args) -> int:
    checks = run_checks(alpha_scale=args.alpha_scale)
    for check in checks:
        print(check.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracdrift",
                                     description="Drift estimation for SDEs driven by fBm.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", required=True, help="TOML experiment file")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
        p.add_argument("--force", action="store_true", help="write into a non-empty directory")

    common(sub.add_parser("simulate", help="write coupled-path CSVs"))
    common(sub.add_parser("estimate", help="fit the drift or its derivative"))
    common(sub.add_parser("sweep", help="risk against sample size"))
    val = sub.add_parser("validate", help="run the built-in oracle checks")
    val.add_argument("--alpha-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    return parser


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "sweep": cmd_sweep,
            "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
