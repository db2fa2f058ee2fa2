"""Drift models, Euler solver and flow derivative for dX = b(X) dt + sigma dB."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special
from scipy.integrate import cumulative_trapezoid

from .fbm import FbmPath, TimeGrid, check_hurst

__all__ = [
    "DriftModel",
    "SdeConfig",
    "SdePath",
    "CoupledPaths",
    "OrderViolationError",
    "DRIFTS",
    "make_drift",
    "linear_drift",
    "damped_sine_drift",
    "shifted_tanh_drift",
    "euler_solve",
    "euler_array",
    "coupled_solve",
    "coupled_solve_batch",
    "flow_derivative",
    "hurst_alpha",
    "ou_variance",
]

Func = Callable[[np.ndarray], np.ndarray]


class OrderViolationError(RuntimeError):
    """The upper solution of a coupled pair failed to stay above the lower one."""


@dataclass(frozen=True)
class DriftModel:
    """Drift b with its first two derivatives and certified bounds.

    ``m_bound <= b' <= M_bound`` everywhere and ``|b''| <= b_second_sup``.
    """

    name: str
    b: Func
    b_prime: Func
    b_second: Func
    m_bound: float
    M_bound: float
    b_second_sup: float
    params: dict = field(default_factory=dict)

    @property
    def lipschitz(self) -> float:
        return max(abs(self.m_bound), abs(self.M_bound))


def linear_drift(mu: float) -> DriftModel:
    mu = float(mu)
    return DriftModel(
        "linear",
        b=lambda x: mu * np.asarray(x, float),
        b_prime=lambda x: np.full_like(np.asarray(x, float), mu),
        b_second=lambda x: np.zeros_like(np.asarray(x, float)),
        m_bound=mu,
        M_bound=mu,
        b_second_sup=0.0,
        params={"mu": mu},
    )


def damped_sine_drift(theta: float = 1.0, a: float = 0.5) -> DriftModel:
    """b(x) = -theta x + a sin x."""
    theta, a = float(theta), float(a)
    return DriftModel(
        "damped_sine",
        b=lambda x: -theta * np.asarray(x, float) + a * np.sin(x),
        b_prime=lambda x: -theta + a * np.cos(np.asarray(x, float)),
        b_second=lambda x: -a * np.sin(np.asarray(x, float)),
        m_bound=-theta - abs(a),
        M_bound=-theta + abs(a),
        b_second_sup=abs(a),
        params={"theta": theta, "a": a},
    )


def shifted_tanh_drift(theta: float = 1.0, a: float = 0.5) -> DriftModel:
    """b(x) = -theta x + a tanh x."""
    theta, a = float(theta), float(a)

    def b_prime(x):
        return -theta + a / np.cosh(np.asarray(x, float)) ** 2

    def b_second(x):
        x = np.asarray(x, float)
        return -2.0 * a * np.tanh(x) / np.cosh(x) ** 2

    # sech^2 ranges over (0, 1]; max |2 sech^2 tanh| = 4 / (3 sqrt 3)
    lo, hi = sorted((-theta, -theta + a))
    return DriftModel(
        "shifted_tanh",
        b=lambda x: -theta * np.asarray(x, float) + a * np.tanh(x),
        b_prime=b_prime,
        b_second=b_second,
        m_bound=lo,
        M_bound=hi,
        b_second_sup=abs(a) * 4.0 / (3.0 * math.sqrt(3.0)),
        params={"theta": theta, "a": a},
    )


DRIFTS: dict[str, Callable[..., DriftModel]] = {
    "linear": linear_drift,
    "damped_sine": damped_sine_drift,
    "shifted_tanh": shifted_tanh_drift,
}


def make_drift(name: str, params=()) -> DriftModel:
    """Look up a built-in drift by name; ``params`` is a list or a mapping."""
    try:
        factory = DRIFTS[name]
    except KeyError:
        raise ValueError(f"unknown drift model {name!r}; choose from {sorted(DRIFTS)}") from None
    if isinstance(params, dict):
        return factory(**params)
    return factory(*params)


@dataclass(frozen=True)
class SdeConfig:
    drift: DriftModel
    x0: float
    sigma: float
    grid: TimeGrid
    H: float

    def __post_init__(self):
        check_hurst(self.H)
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.x0 == 0:
            warnings.warn("x0 = 0 lies outside the nonzero initial conditions the estimators assume",
                          stacklevel=2)


@dataclass
class SdePath:
    grid: TimeGrid
    values: np.ndarray
    x0: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)


@dataclass
class CoupledPaths:
    """Solutions from x0 and x0 + epsilon driven by the same noise."""

    low: SdePath
    high: SdePath
    epsilon: float
    noise: FbmPath | None = None

    @property
    def difference(self) -> np.ndarray:
        return self.high.values - self.low.values


def euler_array(drift: DriftModel, x0, sigma: float, dt: float, noise: np.ndarray) -> np.ndarray:
    """Vectorised explicit Euler with left-endpoint drift.

    ``noise`` has shape (..., n + 1); ``x0`` broadcasts against its leading axes.
    """
    noise = np.asarray(noise, dtype=float)
    dB = np.diff(noise, axis=-1)
    out = np.empty(noise.shape)
    out[..., 0] = x0
    for k in range(dB.shape[-1]):
        x = out[..., k]
        out[..., k + 1] = x + drift.b(x) * dt + sigma * dB[..., k]
    return out


def _check_noise(config: SdeConfig, noise: FbmPath) -> None:
    if noise.grid != config.grid:
        raise ValueError("noise grid differs from the configuration grid")
    if noise.H != config.H:
        raise ValueError("noise Hurst index differs from the configuration")


def euler_solve(config: SdeConfig, noise: FbmPath) -> SdePath:
    """Solve the SDE on ``config.grid`` along one noise path."""
    _check_noise(config, noise)
    values = euler_array(config.drift, config.x0, config.sigma, config.grid.dt, noise.values)
    return SdePath(config.grid, values, config.x0)


def _check_order(diff: np.ndarray) -> None:
    bad = np.argwhere(~(diff > 0))
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        raise OrderViolationError(f"coupled solutions crossed at index {idx}")


def coupled_solve(config: SdeConfig, epsilon: float, noise: FbmPath) -> CoupledPaths:
    """Solve from x0 and x0 + epsilon on identical noise."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    _check_noise(config, noise)
    both = euler_array(config.drift, np.array([config.x0, config.x0 + epsilon]),
                       config.sigma, config.grid.dt, np.broadcast_to(noise.values, (2, config.grid.n + 1)))
    _check_order(both[1] - both[0])
    return CoupledPaths(
        SdePath(config.grid, both[0], config.x0),
        SdePath(config.grid, both[1], config.x0 + epsilon),
        float(epsilon),
        noise,
    )


def coupled_solve_batch(config: SdeConfig, epsilon: float, noises) -> list[CoupledPaths]:
    """:func:`coupled_solve` over many noise paths at once."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    for w in noises:
        _check_noise(config, w)
    W = np.stack([w.values for w in noises])
    x0 = np.array([config.x0, config.x0 + epsilon])[:, None]
    both = euler_array(config.drift, x0, config.sigma, config.grid.dt,
                       np.broadcast_to(W, (2,) + W.shape))
    _check_order(both[1] - both[0])
    return [
        CoupledPaths(SdePath(config.grid, lo, config.x0),
                     SdePath(config.grid, hi, config.x0 + epsilon), float(epsilon), w)
        for lo, hi, w in zip(both[0], both[1], noises)
    ]


def flow_derivative(config: SdeConfig, X: SdePath) -> SdePath:
    """d X(t) / d x0 = exp(int_0^t b'(X(s)) ds), trapezoid rule in time."""
    rate = config.drift.b_prime(X.values)
    log_deriv = cumulative_trapezoid(rate, dx=X.grid.dt, initial=0.0)
    return SdePath(X.grid, np.exp(log_deriv), 1.0)


def hurst_alpha(H: float) -> float:
    """alpha_H = H (2H - 1), the constant in front of |u - v|^(2H-2)."""
    return H * (2.0 * H - 1.0)


def ou_variance(mu: float, t: float, H: float, sigma: float, *, nodes: int = 40,
                alpha_h: float | None = None) -> float:
    """Variance kernel alpha_H sigma^2 int_0^t int_0^t |v-u|^(2H-2) e^{mu(2t-v-u)} du dv.

    This is Var(X(t)) for the linear drift b(x) = mu x. The inner integral is
    done in closed form,

        int_0^v w^(a-1) e^(mu w) dw = v^a M(a, a+1, mu v) / a,   a = 2H - 1,

    with M Kummer's confluent function, and the outer one by Gauss-Jacobi
    quadrature carrying the v^a factor in its weight.
    """
    check_hurst(H)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 0.0
    a = 2.0 * H - 1.0
    alpha = hurst_alpha(H) if alpha_h is None else alpha_h
    x, w = special.roots_jacobi(nodes, 0.0, a)
    v = 0.5 * t * (1.0 + x)
    g = np.exp(2.0 * mu * (t - v)) * special.hyp1f1(a, a + 1.0, mu * v) / a
    integral = (0.5 * t) ** (a + 1.0) * np.dot(w, g)
    return float(2.0 * alpha * sigma**2 * integral)
