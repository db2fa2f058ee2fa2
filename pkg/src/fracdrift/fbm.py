"""Fractional Brownian motion on a uniform grid.

Paths are sampled exactly in law with the circulant embedding (Davies-Harte)
of the fractional Gaussian noise covariance. When the embedding is not
nonnegative definite, a Cholesky factorization of the full increment
covariance is used instead.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy import linalg

__all__ = [
    "TimeGrid",
    "FbmPath",
    "SamplingError",
    "fbm_covariance",
    "fgn_autocovariance",
    "circulant_eigenvalues",
    "sample_fbm",
    "sample_fbm_array",
    "write_path_csv",
]

# Negative circulant eigenvalues smaller than this (relative to the largest)
# are rounding noise and get clamped to zero.
CLAMP_RTOL = 1e-12


class SamplingError(RuntimeError):
    """Raised when neither the circulant embedding nor Cholesky works."""


def check_hurst(H: float) -> None:
    if not 0.5 < H < 1.0:
        raise ValueError(f"Hurst index must lie in (1/2, 1), got {H!r}")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k T / n, k = 0..n."""

    T: float
    n: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"horizon T must be positive, got {self.T!r}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"number of steps n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "T", float(self.T))

    @property
    def dt(self) -> float:
        return self.T / self.n

    @property
    def times(self) -> np.ndarray:
        t = np.arange(self.n + 1) * self.dt
        t[-1] = self.T
        return t

    def extend(self, steps: int) -> "TimeGrid":
        """Same spacing, ``steps`` more points past T."""
        return TimeGrid(self.dt * (self.n + steps), self.n + steps)


@dataclass
class FbmPath:
    grid: TimeGrid
    H: float
    values: np.ndarray
    seed: int = 0
    index: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n + 1,):
            raise ValueError("values must have one entry per grid point")

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def fbm_covariance(s, t, H: float):
    """Covariance E[B(s) B(t)] = (s^2H + t^2H - |t - s|^2H) / 2."""
    check_hurst(H)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise ValueError("times must be nonnegative")
    two_h = 2.0 * H
    out = 0.5 * (s**two_h + t**two_h - np.abs(t - s) ** two_h)
    return float(out) if out.ndim == 0 else out


def fgn_autocovariance(n: int, H: float, dt: float = 1.0) -> np.ndarray:
    """Autocovariance of increments B(t_{k+1}) - B(t_k) at lags 0..n."""
    k = np.arange(n + 1, dtype=float)
    two_h = 2.0 * H
    gamma = 0.5 * (np.abs(k + 1) ** two_h - 2.0 * k**two_h + np.abs(k - 1) ** two_h)
    return gamma * dt**two_h


@functools.lru_cache(maxsize=32)
def _embedding(n: int, H: float, dt: float) -> tuple[np.ndarray, float]:
    gamma = fgn_autocovariance(n, H, dt)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    lam = np.fft.fft(row).real
    lam_min = float(lam.min())
    if lam_min < 0 and -lam_min <= CLAMP_RTOL * lam.max():
        lam = np.where(lam < 0, 0.0, lam)
    lam.setflags(write=False)
    return lam, lam_min


def circulant_eigenvalues(grid: TimeGrid, H: float) -> np.ndarray:
    """Eigenvalues of the size-2n circulant embedding (cached per grid and H)."""
    check_hurst(H)
    lam, _ = _embedding(grid.n, float(H), grid.dt)
    return lam


@functools.lru_cache(maxsize=8)
def _cholesky_factor(n: int, H: float, dt: float) -> np.ndarray:
    gamma = fgn_autocovariance(n - 1, H, dt)
    return linalg.cholesky(linalg.toeplitz(gamma), lower=True)


def sample_fbm_array(
    grid: TimeGrid,
    H: float,
    seed: int,
    count: int,
    method: str = "auto",
    start: int = 0,
) -> np.ndarray:
    """Sample ``count`` fBm paths as an array of shape (count, n + 1).

    Path ``i`` is drawn from its own generator seeded by ``(seed, start + i)``,
    so a batch is a prefix of any larger batch with the same seed.

    ``method`` is ``"auto"`` (circulant, Cholesky fallback), ``"circulant"``
    or ``"cholesky"``.
    """
    check_hurst(H)
    if count < 1:
        raise ValueError("count must be >= 1")
    if method not in ("auto", "circulant", "cholesky"):
        raise ValueError(f"unknown sampling method {method!r}")
    n = grid.n
    use_circulant = method != "cholesky"
    if use_circulant:
        lam, lam_min = _embedding(n, float(H), grid.dt)
        if lam.min() < 0:
            if method == "circulant":
                raise SamplingError(
                    f"circulant embedding is not nonnegative definite "
                    f"(eigenvalue {lam_min:.3e})"
                )
            use_circulant = False

    seqs = [np.random.SeedSequence(entropy=int(seed), spawn_key=(start + i,)) for i in range(count)]
    if use_circulant:
        m = 2 * n
        z = np.empty((count, m), dtype=complex)
        for i, ss in enumerate(seqs):
            g = np.random.default_rng(ss)
            draws = g.standard_normal(2 * m)
            z[i].real = draws[:m]
            z[i].imag = draws[m:]
        w = np.fft.fft(np.sqrt(lam / m) * z, axis=1)
        incr = w.real[:, :n]
    else:
        try:
            L = _cholesky_factor(n, float(H), grid.dt)
        except linalg.LinAlgError as exc:
            _, lam_min = _embedding(n, float(H), grid.dt)
            raise SamplingError(
                f"both samplers failed; circulant eigenvalue {lam_min:.3e}"
            ) from exc
        z = np.stack([np.random.default_rng(ss).standard_normal(n) for ss in seqs])
        incr = z @ L.T

    out = np.zeros((count, n + 1))
    np.cumsum(incr, axis=1, out=out[:, 1:])
    return out


def sample_fbm(
    grid: TimeGrid, H: float, seed: int, count: int = 1, method: str = "auto"
) -> list[FbmPath]:
    """Sample ``count`` i.i.d. fBm paths on ``grid``; deterministic in ``seed``."""
    values = sample_fbm_array(grid, H, seed, count, method=method)
    return [FbmPath(grid, float(H), v, seed=int(seed), index=i) for i, v in enumerate(values)]


def write_path_csv(file, times, values) -> None:
    """Write a ``t,value`` CSV with 17 significant digits."""
    data = np.column_stack([np.asarray(times, float), np.asarray(values, float)])
    np.savetxt(file, data, fmt="%.17g", delimiter=",", header="t,value", comments="")
