"""Projection estimators of the drift and of its derivative.

Both estimators solve a least-squares system Psi theta = x in the span of a
basis, where Psi is the empirical Gram matrix of the basis along the observed
paths. The fitted coefficients are kept only on the stability event

    L(m) (||Psi^{-1}||_op v 1) <= c_{kappa,T} N T / log(N T),

and replaced by zero otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import BasisSpec, eval_basis, eval_basis_antideriv, eval_basis_deriv, stability_quantities
from .fbm import TimeGrid
from .integrals import KernelCache, surrogate_batch
from .sde import CoupledPaths, SdePath

__all__ = [
    "GramMatrix",
    "FitResult",
    "AnchoredPrimitive",
    "SINGULAR_RTOL",
    "trapezoid_weights",
    "gram",
    "inverse_opnorm",
    "truncation_constant",
    "truncation_threshold",
    "truncation_event",
    "fit_drift",
    "fit_drift_derivative",
    "primitive_from_derivative",
    "epsilon_rule",
    "m_opt",
]

# lambda_min <= SINGULAR_RTOL * lambda_max counts as singular
SINGULAR_RTOL = 1e-13


@dataclass
class GramMatrix:
    matrix: np.ndarray
    N: int
    T: float


@dataclass
class FitResult:
    """Coefficients of a fitted projection estimator.

    ``coeffs`` are those of the kept estimator (all zero when ``truncated``);
    ``raw_coeffs`` are the unconstrained least-squares solution, NaN when the
    Gram matrix is singular.
    """

    coeffs: np.ndarray
    truncated: bool
    opnorm_inv: float
    L_m: float
    kappa: float
    basis: BasisSpec
    N: int
    T: float
    target: str = "b"
    epsilon: float | None = None
    seed: int | None = None
    raw_coeffs: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, x) -> np.ndarray:
        return eval_basis(self.basis, x) @ self.coeffs

    def raw(self, x) -> np.ndarray:
        return eval_basis(self.basis, x) @ self.raw_coeffs

    def metadata(self) -> dict:
        opn = self.opnorm_inv
        return {
            "target": self.target,
            "basis": str(self.basis),
            "truncated": bool(self.truncated),
            "opnorm_inv": opn if math.isfinite(opn) else "inf",
            "L_m": self.L_m,
            "kappa": self.kappa,
            "N": self.N,
            "T": self.T,
            "epsilon": self.epsilon,
            "seed": self.seed,
        }

    def to_csv(self, path) -> Path:
        """Write ``j,theta_j`` rows and a ``<stem>.meta.json`` sidecar."""
        path = Path(path)
        rows = np.column_stack([np.arange(len(self.coeffs)), self.coeffs])
        np.savetxt(path, rows, fmt=["%d", "%.17g"], delimiter=",", header="j,theta_j", comments="")
        meta = path.with_suffix(".meta.json")
        meta.write_text(json.dumps(self.metadata(), indent=2) + "\n")
        return meta


@dataclass
class AnchoredPrimitive:
    """x -> anchor_value + int_{anchor_point}^x (fitted derivative)."""

    anchor_point: float
    anchor_value: float
    fit: FitResult

    def __call__(self, x) -> np.ndarray:
        spec = self.fit.basis
        x = np.asarray(x, dtype=float)
        prim = eval_basis_antideriv(spec, x) @ self.fit.coeffs
        at_anchor = eval_basis_antideriv(spec, self.anchor_point) @ self.fit.coeffs
        return self.anchor_value + (prim - at_anchor)


def trapezoid_weights(grid: TimeGrid) -> np.ndarray:
    w = np.full(grid.n + 1, grid.dt)
    w[[0, -1]] *= 0.5
    return w


def _stack(paths) -> np.ndarray:
    if isinstance(paths, np.ndarray):
        return np.atleast_2d(paths)
    return np.stack([p.values for p in paths])


def _grid_of(paths) -> TimeGrid:
    grids = {p.grid for p in paths}
    if len(grids) != 1:
        raise ValueError("all paths must share one grid")
    return grids.pop()


def _gram_from_values(values: np.ndarray, spec: BasisSpec, grid: TimeGrid) -> np.ndarray:
    # left-endpoint rule, matching the Riemann sums in the design vectors; with
    # Y = mu t this makes the derivative estimator reproduce a constant exactly
    N = values.shape[0]
    phi = eval_basis(spec, values[:, :-1])
    G = np.einsum("ikj,ikl->jl", phi, phi) * grid.dt / (N * grid.T)
    return 0.5 * (G + G.T)


def gram(paths: list[SdePath], basis: BasisSpec) -> GramMatrix:
    """Empirical Gram matrix (1/NT) sum_i int phi_j(X^i) phi_k(X^i) ds (left Riemann sums)."""
    if len(paths) < 1:
        raise ValueError("need at least one path")
    grid = _grid_of(paths)
    G = _gram_from_values(_stack(paths), basis, grid)
    return GramMatrix(G, len(paths), grid.T)


def inverse_opnorm(matrix) -> float:
    """||M^{-1}||_op for symmetric nonnegative M; +inf when (near) singular."""
    lam = np.linalg.eigvalsh(np.asarray(matrix, dtype=float))
    top = lam[-1]
    if top <= 0 or lam[0] <= SINGULAR_RTOL * top:
        return math.inf
    return float(1.0 / lam[0])


def truncation_constant(kappa: float, T: float) -> float:
    """c_{kappa,T} = (3 log(3/2) - 1) / ((7 + kappa) T)."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    return (3.0 * math.log(1.5) - 1.0) / ((7.0 + kappa) * T)


def truncation_threshold(kappa: float, N: int, T: float) -> float:
    NT = N * T
    if NT <= 1:
        raise ValueError("N T must exceed 1")
    return truncation_constant(kappa, T) * NT / math.log(NT)


def truncation_event(gram: GramMatrix | np.ndarray, L_m: float, kappa: float, N: int,
                     T: float) -> bool:
    """True when the stability inequality holds and the fit is kept."""
    matrix = gram.matrix if isinstance(gram, GramMatrix) else gram
    opn = inverse_opnorm(matrix)
    return bool(L_m * max(opn, 1.0) <= truncation_threshold(kappa, N, T))


def _solve(G: np.ndarray, rhs: np.ndarray, spec: BasisSpec, kappa: float, N: int, T: float,
           target: str, epsilon: float | None) -> FitResult:
    lam, vec = np.linalg.eigh(G)
    singular = lam[-1] <= 0 or lam[0] <= SINGULAR_RTOL * lam[-1]
    opn = math.inf if singular else float(1.0 / lam[0])
    L_m, _ = stability_quantities(spec)
    keep = L_m * max(opn, 1.0) <= truncation_threshold(kappa, N, T)
    if singular:
        raw = np.full(spec.m, np.nan)
    else:
        raw = vec @ ((vec.T @ rhs) / lam)
        if not np.all(np.isfinite(raw)):
            raise RuntimeError("linear solve failed although the stability event holds")
    coeffs = raw.copy() if keep else np.zeros(spec.m)
    return FitResult(coeffs, not keep, opn, L_m, float(kappa), spec, N, T,
                     target=target, epsilon=epsilon, raw_coeffs=raw)


def _coupled_arrays(coupled_set: list[CoupledPaths]):
    if len(coupled_set) < 1:
        raise ValueError("need at least one coupled pair")
    grid = _grid_of([c.low for c in coupled_set])
    eps = {c.epsilon for c in coupled_set}
    if len(eps) != 1:
        raise ValueError("all coupled pairs must share epsilon")
    low = np.stack([c.low.values for c in coupled_set])
    high = np.stack([c.high.values for c in coupled_set])
    return grid, eps.pop(), low, high


def fit_drift(coupled_set: list[CoupledPaths], basis: BasisSpec, sigma: float, H: float,
              kappa: float = 1.0, cache: KernelCache | None = None) -> FitResult:
    """Drift estimator from N coupled pairs.

    The design vector is (1/NT) sum_i S_{phi_j}^i with S the Skorokhod
    surrogate of :mod:`fracdrift.integrals`; the Gram matrix uses the lower
    paths only.
    """
    grid, eps, low, high = _coupled_arrays(coupled_set)
    gap = high - low
    if np.any(~(gap > 0)):
        raise ValueError("coupled pairs must be strictly ordered")
    if cache is None or cache.grid != grid or cache.H != H:
        cache = KernelCache(H, grid)
    N = low.shape[0]
    S = surrogate_batch(low, gap, lambda x: eval_basis(basis, x),
                        lambda x: eval_basis_deriv(basis, x), sigma, cache)
    rhs = S.sum(axis=0) / (N * grid.T)
    G = _gram_from_values(low, basis, grid)
    return _solve(G, rhs, basis, kappa, N, grid.T, "b", eps)


def fit_drift_derivative(coupled_set: list[CoupledPaths], basis: BasisSpec,
                         kappa: float = 0.0) -> FitResult:
    """Estimator of b' from the log-gap Y = log((X_high - X_low) / epsilon).

    The design vector (1/NT) sum_i int phi_j(X^i) dY^i uses left Riemann sums.
    """
    grid, eps, low, high = _coupled_arrays(coupled_set)
    gap = high - low
    if np.any(~(gap > 0)):
        raise ValueError("coupled pairs must be strictly ordered")
    N = low.shape[0]
    Y = np.log(gap / eps)
    phi = eval_basis(basis, low)
    rhs = np.einsum("ikj,ik->j", phi[:, :-1], np.diff(Y, axis=1)) / (N * grid.T)
    G = _gram_from_values(low, basis, grid)
    return _solve(G, rhs, basis, kappa, N, grid.T, "bprime", eps)


def primitive_from_derivative(fit: FitResult, anchor_point: float,
                              anchor_value: float) -> AnchoredPrimitive:
    """Integrate a fitted derivative from a known value at ``anchor_point``."""
    if not fit.basis.compact:
        raise ValueError("the primitive estimator needs a compactly supported basis")
    return AnchoredPrimitive(float(anchor_point), float(anchor_value), fit)


def epsilon_rule(N: int, T: float) -> float:
    """Initial-condition gap (NT)^{-1/2} (NT / log NT)^{-1}."""
    NT = N * T
    if NT <= math.e:
        raise ValueError("N T must exceed e")
    return NT**-0.5 * math.log(NT) / NT


def m_opt(basis_kind: str, N: int, T: float, H: float, smoothness: float,
          kappa: float = 1.0) -> int:
    """Bias-variance balancing dimension.

    Trigonometric: (N T^{2-2H})^{1/(2 beta + 3)}, rounded down to an odd
    integer. Hermite: (N T^{2-2H})^{1/(s + 3/2 + kappa/2)}.
    """
    if smoothness <= 0:
        raise ValueError("smoothness must be positive")
    base = N * T ** (2.0 - 2.0 * H)
    kind = {"trig": "trigonometric"}.get(basis_kind, basis_kind)
    if kind == "trigonometric":
        expo = 1.0 / (2.0 * smoothness + 3.0)
    elif kind == "hermite":
        expo = 1.0 / (smoothness + 1.5 + 0.5 * kappa)
    else:
        raise ValueError(f"unknown basis kind {basis_kind!r}")
    m = max(1, int(math.floor(base**expo + 1e-9)))
    if kind == "trigonometric" and m % 2 == 0:
        m -= 1
    return m
