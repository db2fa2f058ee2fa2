"""Monte Carlo trials, rate sweeps and occupation-density histograms."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .basis import BasisSpec, parse_basis
from .estimators import (
    FitResult,
    epsilon_rule,
    fit_drift,
    fit_drift_derivative,
    m_opt,
    primitive_from_derivative,
    trapezoid_weights,
)
from .fbm import TimeGrid, sample_fbm, sample_fbm_array
from .sde import DriftModel, SdeConfig, coupled_solve_batch, euler_array, make_drift

__all__ = [
    "TrialConfig",
    "RiskReport",
    "SweepRow",
    "SweepResult",
    "replication_seeds",
    "empirical_norm",
    "empirical_risk",
    "simulate_coupled",
    "simulate_paths",
    "run_trial",
    "rate_sweep",
    "occupation_density",
]


@dataclass(frozen=True)
class TrialConfig:
    """One experiment: model, grid, sample sizes and estimator settings.

    ``epsilon`` is ``"rule"`` or a positive number; ``m`` is ``"m_opt"`` or
    ``"fixed"`` (use the dimension written in ``basis``). ``anchor`` only
    matters for ``target = "bprime"``: ``"exact"`` integrates the derivative
    fit from the true value of b at the left end of the basis interval.
    """

    drift: str = "linear"
    drift_params: tuple = (-1.0,)
    x0: float = 1.0
    sigma: float = 0.5
    H: float = 0.75
    T: float = 1.0
    n: int = 256
    N_train: int = 200
    N_eval: int | None = None
    basis: str = "trig(-2,2,3)"
    kappa: float = 1.0
    epsilon: float | str = "rule"
    m: str = "fixed"
    smoothness: float = 1.0
    target: str = "b"
    anchor: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.target not in ("b", "bprime"):
            raise ValueError(f"target must be 'b' or 'bprime', got {self.target!r}")
        if self.m not in ("fixed", "m_opt"):
            raise ValueError(f"m policy must be 'fixed' or 'm_opt', got {self.m!r}")
        if isinstance(self.epsilon, str):
            if self.epsilon != "rule":
                raise ValueError(f"epsilon must be 'rule' or a number, got {self.epsilon!r}")
        elif not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.N_train < 1 or (self.N_eval is not None and self.N_eval < 1):
            raise ValueError("sample sizes must be >= 1")
        if self.epsilon == "rule" and self.N_train * self.T <= math.e:
            raise ValueError("the epsilon rule needs N_train * T > e; give epsilon explicitly")
        if self.anchor not in (None, "exact"):
            raise ValueError(f"anchor must be 'exact' or unset, got {self.anchor!r}")
        parse_basis(self.basis)
        self.drift_model()

    @property
    def n_eval(self) -> int:
        return self.N_train if self.N_eval is None else self.N_eval

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.T, self.n)

    def drift_model(self) -> DriftModel:
        params = self.drift_params
        return make_drift(self.drift, dict(params) if isinstance(params, dict) else tuple(params))

    def sde_config(self) -> SdeConfig:
        return SdeConfig(self.drift_model(), self.x0, self.sigma, self.grid, self.H)

    def resolve_epsilon(self, N: int | None = None) -> float:
        if self.epsilon == "rule":
            return epsilon_rule(self.N_train if N is None else N, self.T)
        return float(self.epsilon)

    def resolve_basis(self, N: int | None = None) -> BasisSpec:
        spec = parse_basis(self.basis)
        if self.m == "m_opt":
            N = self.N_train if N is None else N
            spec = spec.with_dim(m_opt(spec.kind, N, self.T, self.H, self.smoothness, self.kappa))
        return spec


@dataclass
class RiskReport:
    empirical_risk_train: float
    weighted_risk_holdout: float
    truncated: bool
    m: int
    epsilon: float
    N: int
    replication: int
    raw_risk_holdout: float = math.nan
    primitive_sup_error: float | None = None
    fit: FitResult | None = field(default=None, repr=False, compare=False)
    config: dict = field(default_factory=dict, repr=False)


@dataclass
class SweepRow:
    N: int
    mean_risk: float
    se: float
    truncation_rate: float
    m: int
    epsilon: float
    mean_raw_risk: float = math.nan
    raw_se: float = math.nan


@dataclass
class SweepResult:
    rows: list[SweepRow]
    slope: float
    intercept: float
    reports: list[RiskReport] = field(default_factory=list, repr=False)

    CSV_FIELDS = ("N", "mean_risk", "se", "truncation_rate", "m", "epsilon")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.CSV_FIELDS)
            for r in self.rows:
                writer.writerow([r.N, repr(r.mean_risk), repr(r.se), repr(r.truncation_rate),
                                 r.m, repr(r.epsilon)])


def replication_seeds(master_seed: int, replication: int) -> tuple[int, int]:
    """Independent (training, evaluation) seeds for one replication."""
    train, evaluation = np.random.SeedSequence([int(master_seed), int(replication)]).spawn(2)
    return int(train.generate_state(1, np.uint64)[0]), int(evaluation.generate_state(1, np.uint64)[0])


def _values_and_grid(paths, grid: TimeGrid | None):
    if isinstance(paths, np.ndarray):
        if grid is None:
            raise ValueError("a grid is needed when paths are passed as an array")
        return np.atleast_2d(paths), grid
    grids = {p.grid for p in paths}
    if len(grids) != 1:
        raise ValueError("all paths must share one grid")
    return np.stack([p.values for p in paths]), grids.pop()


def empirical_norm(g, paths, grid: TimeGrid | None = None) -> float:
    """||g||_N^2 = (1/NT) sum_i int_0^T g(X^i(s))^2 ds (trapezoid rule)."""
    values, grid = _values_and_grid(paths, grid)
    sq = np.asarray(g(values), dtype=float) ** 2
    return float(np.sum(sq @ trapezoid_weights(grid)) / (len(values) * grid.T))


def _truth(fit: FitResult, drift: DriftModel):
    f = drift.b if fit.target == "b" else drift.b_prime

    def masked(x):
        return f(x) * fit.basis.indicator(x)

    return masked


def empirical_risk(fit: FitResult, drift: DriftModel, paths, grid: TimeGrid | None = None,
                   raw: bool = False) -> float:
    """||fit - target_A||_N^2 along ``paths``; the target is b or b' per ``fit.target``.

    For a compactly supported basis the truth is masked to the basis interval.
    With ``raw=True`` the unconstrained coefficients are used instead.
    """
    truth = _truth(fit, drift)
    est = fit.raw if raw else fit
    return empirical_norm(lambda x: est(x) - truth(x), paths, grid)


def simulate_coupled(config: TrialConfig, seed: int, N: int, epsilon: float):
    sde = config.sde_config()
    noises = sample_fbm(sde.grid, sde.H, seed, N)
    return coupled_solve_batch(sde, epsilon, noises)


def simulate_paths(config: TrialConfig, seed: int, N: int) -> np.ndarray:
    """Lower solutions only, shape (N, n + 1)."""
    sde = config.sde_config()
    W = sample_fbm_array(sde.grid, sde.H, seed, N)
    return euler_array(sde.drift, sde.x0, sde.sigma, sde.grid.dt, W)


def run_trial(config: TrialConfig, replication: int = 0, keep_fit: bool = False) -> RiskReport:
    """Simulate, fit and score one replication; deterministic in (seed, replication)."""
    train_seed, eval_seed = replication_seeds(config.seed, replication)
    N = config.N_train
    eps = config.resolve_epsilon()
    spec = config.resolve_basis()
    drift = config.drift_model()
    grid = config.grid

    coupled = simulate_coupled(config, train_seed, N, eps)
    if config.target == "b":
        fit = fit_drift(coupled, spec, config.sigma, config.H, config.kappa)
    else:
        fit = fit_drift_derivative(coupled, spec)
    fit.seed = int(config.seed)

    train = np.stack([c.low.values for c in coupled])
    holdout = simulate_paths(config, eval_seed, config.n_eval)
    report = RiskReport(
        empirical_risk_train=empirical_risk(fit, drift, train, grid),
        weighted_risk_holdout=empirical_risk(fit, drift, holdout, grid),
        truncated=fit.truncated,
        m=spec.m,
        epsilon=eps,
        N=N,
        replication=replication,
        config=asdict(config),
    )
    if np.all(np.isfinite(fit.raw_coeffs)):
        report.raw_risk_holdout = empirical_risk(fit, drift, holdout, grid, raw=True)
    if config.target == "bprime" and config.anchor == "exact":
        lo, hi = spec.lower, spec.upper
        prim = primitive_from_derivative(fit, lo, float(drift.b(lo)))
        xs = np.linspace(lo, hi, 2001)
        report.primitive_sup_error = float(np.max(np.abs(prim(xs) - drift.b(xs))))
    if keep_fit:
        report.fit = fit
    return report


def _trial_job(args):
    config, replication = args
    return run_trial(config, replication)


def _mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), math.nan
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def rate_sweep(config: TrialConfig, N_list, replications: int, jobs: int = 1) -> SweepResult:
    """Mean holdout risk over ``replications`` trials for every N in ``N_list``.

    Replication r at sample size N uses seeds derived from
    (config.seed, r), so rows differ only through N. The slope is the
    least-squares fit of log(mean risk) against log(N).
    """
    N_list = [int(N) for N in N_list]
    if len(N_list) < 4:
        raise ValueError("a sweep needs at least 4 sample sizes")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("sample sizes must be strictly increasing")
    if replications < 20:
        raise ValueError("a sweep needs at least 20 replications")

    tasks = [(replace(config, N_train=N, N_eval=config.N_eval), r)
             for N in N_list for r in range(replications)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_trial_job, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        reports = [_trial_job(t) for t in tasks]

    rows = []
    for i, N in enumerate(N_list):
        chunk = reports[i * replications:(i + 1) * replications]
        mean, se = _mean_se([r.weighted_risk_holdout for r in chunk])
        raw = [r.raw_risk_holdout for r in chunk]
        raw_mean, raw_se = _mean_se(raw) if np.all(np.isfinite(raw)) else (math.nan, math.nan)
        rows.append(SweepRow(N, mean, se, float(np.mean([r.truncated for r in chunk])),
                             chunk[0].m, chunk[0].epsilon, raw_mean, raw_se))

    risks = np.array([r.mean_risk for r in rows])
    if np.all(risks > 0):
        slope, intercept = np.polyfit(np.log(N_list), np.log(risks), 1)
    else:
        slope = intercept = math.nan
    return SweepResult(rows, float(slope), float(intercept), reports)


def occupation_density(paths, bin_edges, grid: TimeGrid | None = None):
    """Histogram estimate of the time-averaged marginal density.

    Every grid value X^i(t_k) is weighted by its trapezoid weight / (N T).
    Returns ``(density, bin_edges)``; mass falling outside the bins is lost.
    """
    values, grid = _values_and_grid(paths, grid)
    edges = np.asarray(bin_edges, dtype=float)
    w = np.broadcast_to(trapezoid_weights(grid), values.shape) / (len(values) * grid.T)
    mass, _ = np.histogram(values.ravel(), bins=edges, weights=w.ravel())
    return mass / np.diff(edges), edges
