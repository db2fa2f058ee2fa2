"""Pathwise Riemann-Young sums and the computable Skorokhod surrogate.

For a coupled pair (X_low, X_high) with gap D = X_high - X_low the surrogate is

    S_phi = int phi(X) dX
            - alpha_H sigma^2 int_0^T int_0^u phi'(X(u)) D(u)/D(v) |u - v|^(2H-2) dv du.

The first term is a left Riemann sum. In the double integral the outer
variable is sampled at left endpoints t_k and, inside each cell [t_j, t_{j+1}],
the ratio is frozen at t_j while the singular kernel is integrated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fbm import TimeGrid, check_hurst
from .sde import CoupledPaths, SdePath, hurst_alpha

__all__ = [
    "KernelCache",
    "young_integral",
    "young_integral_batch",
    "skorokhod_surrogate",
    "skorokhod_surrogate_shift",
    "surrogate_batch",
    "shift_steps",
    "default_holder_exponent",
    "approximation_constant",
    "surrogate_error_bound",
]


@dataclass(frozen=True)
class KernelCache:
    """Exact cell integrals I(k, j) = int_{t_j}^{t_{j+1}} (t_k - v)^(2H-2) dv, j < k.

    Stored as a strictly lower-triangular (n+1) x (n+1) matrix. Because the
    grid is uniform the matrix is Toeplitz: I(k, j) = dt^a ((k-j)^a - (k-j-1)^a) / a
    with a = 2H - 1.
    """

    H: float
    grid: TimeGrid
    matrix: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        check_hurst(self.H)
        if self.matrix is None:
            a = 2.0 * self.H - 1.0
            n = self.grid.n
            lag = np.arange(n + 1, dtype=float)
            cell = np.zeros(n + 1)
            cell[1:] = (lag[1:] ** a - lag[:-1] ** a) * self.grid.dt**a / a
            idx = np.arange(n + 1)
            diff = idx[:, None] - idx[None, :]
            mat = np.where(diff > 0, cell[np.clip(diff, 0, n)], 0.0)
            mat.setflags(write=False)
            object.__setattr__(self, "matrix", mat)

    @property
    def alpha(self) -> float:
        return hurst_alpha(self.H)

    def row_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def closed_form_row_sums(self) -> np.ndarray:
        a = 2.0 * self.H - 1.0
        return self.grid.times**a / a


def young_integral(integrand, w) -> float:
    """Left-endpoint Riemann sum sum_k integrand(t_k) (w(t_{k+1}) - w(t_k))."""
    integrand = np.asarray(integrand, dtype=float)
    w = np.asarray(w, dtype=float)
    if integrand.shape != w.shape or integrand.ndim != 1:
        raise ValueError(f"length mismatch: {integrand.shape} vs {w.shape}")
    return float(np.dot(integrand[:-1], np.diff(w)))


def young_integral_batch(integrand: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Riemann sums for integrands of shape (N, n+1, m) against paths (N, n+1)."""
    return np.einsum("ikm,ik->im", integrand[:, :-1], np.diff(w, axis=1))


def surrogate_batch(X, gap, phi, phi_prime, sigma: float, cache: KernelCache,
                    n_steps: int | None = None) -> np.ndarray:
    """Surrogates for N paths and m test functions at once.

    ``X`` and ``gap`` have shape (N, n_total+1); only the first ``n_steps``
    cells (the cache grid) are integrated. ``phi`` and ``phi_prime`` map an
    array of shape (N, n+1) to (N, n+1, m). Returns shape (N, m).
    """
    n = cache.grid.n if n_steps is None else n_steps
    X = np.asarray(X, dtype=float)
    gap = np.asarray(gap, dtype=float)
    Xs = X[:, : n + 1]
    values = phi(Xs)
    pathwise = young_integral_batch(values, Xs)
    inner = (1.0 / gap[:, :n]) @ cache.matrix[:n, :n].T
    weight = gap[:, :n] * inner
    dphi = phi_prime(Xs[:, :n])
    correction = np.einsum("ikm,ik->im", dphi, weight) * cache.grid.dt
    return pathwise - cache.alpha * sigma**2 * correction


def _as_batch_func(f):
    def wrapped(x):
        return np.asarray(f(x), dtype=float)[..., None]
    return wrapped


def skorokhod_surrogate(coupled: CoupledPaths, phi, phi_prime, sigma: float,
                        cache: KernelCache) -> float:
    """Computable approximation of int_0^T phi(X) delta X from a coupled pair.

    ``phi`` and ``phi_prime`` are vectorised scalar functions.
    """
    if coupled.low.grid != cache.grid:
        raise ValueError("coupled paths do not live on the cache grid")
    gap = coupled.difference
    bad = np.flatnonzero(~(gap > 0))
    if bad.size:
        raise ValueError(f"nonpositive gap between coupled paths at index {bad[0]}")
    out = surrogate_batch(coupled.low.values[None], gap[None], _as_batch_func(phi),
                          _as_batch_func(phi_prime), sigma, cache)
    return float(out[0, 0])


def default_holder_exponent(H: float) -> float:
    """Midpoint of (1/2, H)."""
    return 0.5 * (0.5 + H)


def shift_steps(grid: TimeGrid, epsilon: float, alpha: float) -> int:
    """Number of grid steps approximating the time shift epsilon^(1/alpha).

    The shift is rounded to the grid and never shorter than one step.
    """
    eta = epsilon ** (1.0 / alpha)
    return max(1, int(round(eta / grid.dt)))


def skorokhod_surrogate_shift(X: SdePath, phi, phi_prime, sigma: float, cache: KernelCache,
                              alpha: float | None = None, epsilon: float = 1e-3) -> float:
    """Single-path surrogate with the gap replaced by X(t + eta) - X(t).

    ``X`` must share the cache spacing and extend at least
    :func:`shift_steps` points past T.
    """
    if alpha is None:
        alpha = default_holder_exponent(cache.H)
    if not 0.5 < alpha < cache.H:
        raise ValueError(f"Hoelder exponent must lie in (1/2, H), got {alpha}")
    if not math.isclose(X.grid.dt, cache.grid.dt, rel_tol=1e-12):
        raise ValueError("path spacing differs from the cache grid")
    n = cache.grid.n
    s = shift_steps(cache.grid, epsilon, alpha)
    if X.grid.n < n + s:
        raise ValueError(f"path must extend {s} steps past T; it has {X.grid.n - n}")
    v = X.values
    gap = v[s: n + s] - v[:n]
    tiny = np.flatnonzero(np.abs(gap) < 1e-14)
    if tiny.size:
        raise ZeroDivisionError(f"vanishing shifted increment at index {tiny[0]}")
    out = surrogate_batch(v[None, : n + 1], np.append(gap, np.nan)[None],
                          _as_batch_func(phi), _as_batch_func(phi_prime), sigma, cache)
    return float(out[0, 0])


def approximation_constant(H: float, M: float, t: float) -> float:
    """The factor m_{H,M}(t) in the surrogate error bound."""
    if M < 0:
        return 1.0 / (M * M * (2.0 * H - 1.0))
    if M == 0:
        return t * t / (2.0 * H * (2.0 * H + 1.0))
    return math.exp(2.0 * M * t) / (M * M * (2.0 * H - 1.0))


def surrogate_error_bound(H: float, sigma: float, b_second_sup: float, phi_prime_sup: float,
                          M: float, epsilon: float, t: float) -> float:
    """alpha_H sigma^2 ||b''|| ||phi'|| / 2 * epsilon t^(2H-1) m_{H,M}(t)."""
    return (hurst_alpha(H) * sigma**2 * b_second_sup * phi_prime_sup / 2.0
            * epsilon * t ** (2.0 * H - 1.0) * approximation_constant(H, M, t))
