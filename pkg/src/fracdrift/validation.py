"""Built-in oracle checks, run by ``fracdrift validate``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.integrate import quad

from .basis import HERMITE_SUP, eval_basis, eval_basis_deriv, hermite, stability_quantities, trig
from .fbm import TimeGrid, fbm_covariance, sample_fbm_array
from .integrals import KernelCache
from .sde import hurst_alpha, ou_variance

__all__ = ["Check", "run_checks", "ou_variance_quad", "covariance_zscores"]


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3e} (tolerance {self.tolerance:.1e})"


def ou_variance_quad(mu: float, t: float, H: float, sigma: float) -> float:
    """Nested adaptive quadrature with an algebraic endpoint weight (QUADPACK QAWS)."""
    def inner(v):
        f = lambda u: math.exp(mu * (2.0 * t - v - u))
        return quad(f, 0.0, v, weight="alg", wvar=(0.0, 2.0 * H - 2.0),
                    epsabs=1e-14, epsrel=1e-13)[0]

    outer = quad(inner, 0.0, t, epsabs=1e-13, epsrel=1e-12)[0]
    return 2.0 * hurst_alpha(H) * sigma**2 * outer


def covariance_zscores(paths: np.ndarray, idx, times, H: float) -> np.ndarray:
    """|empirical - exact| / standard error for Cov(B(s), B(t)) over index pairs."""
    X = paths[:, idx]
    Xc = X - X.mean(axis=0)
    prod = Xc[:, :, None] * Xc[:, None, :]
    emp = prod.mean(axis=0)
    se = prod.std(axis=0, ddof=1) / math.sqrt(len(paths))
    t = np.asarray(times)[idx]
    exact = fbm_covariance(t[:, None], t[None, :], H)
    return np.abs(emp - exact) / se


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


def run_checks(alpha_scale: float = 1.0) -> list[Check]:
    """Run every oracle check.

    ``alpha_scale`` multiplies alpha_H inside the variance-kernel evaluation;
    any value other than 1 is a negative control and must make the OU checks fail.
    """
    checks = []

    grid = TimeGrid(1.0, 64)
    paths = sample_fbm_array(grid, 0.75, seed=20240101, count=4000)
    idx = np.array([8, 16, 32, 48, 64])
    z = covariance_zscores(paths, idx, grid.times, 0.75)
    inside = int(np.sum(z <= 3.0))
    checks.append(Check("fbm covariance entries within 3 SE (of 25)", inside, 23, inside >= 23))

    for H in (0.6, 0.75, 0.9):
        alpha = hurst_alpha(H) * alpha_scale
        got = ou_variance(0.0, 1.7, H, 0.8, alpha_h=alpha)
        err = _rel(got, 0.64 * 1.7 ** (2 * H))
        checks.append(Check(f"ou variance, mu=0 closed form, H={H}", err, 1e-8, err <= 1e-8))
    got = ou_variance(-1.0, 1.0, 0.75, 1.0, alpha_h=hurst_alpha(0.75) * alpha_scale)
    err = _rel(got, ou_variance_quad(-1.0, 1.0, 0.75, 1.0))
    checks.append(Check("ou variance, mu=-1 vs adaptive quadrature", err, 1e-8, err <= 1e-8))

    x, w = special.roots_legendre(128)
    for spec in (trig(0.0, 1.0, 15), trig(-2.0, 2.0, 15)):
        y = spec.lower + 0.5 * spec.width * (x + 1.0)
        phi = eval_basis(spec, y)
        G = (phi * (0.5 * spec.width * w)[:, None]).T @ phi
        err = float(np.max(np.abs(G - np.eye(spec.m))))
        checks.append(Check(f"{spec} orthonormal", err, 1e-10, err <= 1e-10))

    xh, wh = special.roots_hermite(200)
    phi = eval_basis(hermite(64), xh)
    G = (phi * (wh * np.exp(xh * xh))[:, None]).T @ phi
    err = float(np.max(np.abs(G - np.eye(64))))
    checks.append(Check("hermite(64) orthonormal, 200-node Gauss-Hermite", err, 1e-6, err <= 1e-6))

    probe = np.linspace(-12.0, 12.0, 4097)
    sup = float(np.max(np.abs(eval_basis(hermite(64), probe))))
    checks.append(Check("hermite sup |h_j| - pi^(-1/4), j < 64", sup - HERMITE_SUP, 1e-9,
                        sup <= HERMITE_SUP + 1e-9))

    err = 0.0
    pts = np.linspace(0.0, 1.0, 101)
    for m in range(1, 16, 2):
        L, _ = stability_quantities(trig(0.0, 1.0, m))
        sq = np.sum(eval_basis(trig(0.0, 1.0, m), pts) ** 2, axis=-1)
        err = max(err, float(np.max(np.abs(sq - m))), abs(L - m))
    checks.append(Check("trig on [0,1]: sum phi_j^2 = L(m) = m, m odd <= 15", err, 1e-10,
                        err <= 1e-10))

    h = 1e-5
    for spec in (hermite(64), trig(-2.0, 2.0, 15)):
        pts = np.linspace(spec.lower + 0.01, spec.upper - 0.01, 201) if spec.compact \
            else np.linspace(-8.0, 8.0, 201)
        fd = (eval_basis(spec, pts + h) - eval_basis(spec, pts - h)) / (2 * h)
        err = float(np.max(np.abs(fd - eval_basis_deriv(spec, pts))))
        checks.append(Check(f"{spec} derivative vs finite differences", err, 1e-6, err <= 1e-6))

    worst = 0.0
    for H in (0.6, 0.75, 0.9):
        cache = KernelCache(H, TimeGrid(1.0, 256))
        exact = cache.closed_form_row_sums()[1:]
        worst = max(worst, float(np.max(np.abs(cache.row_sums()[1:] / exact - 1.0))))
    checks.append(Check("kernel cache row sums vs t^(2H-1)/(2H-1)", worst, 1e-12, worst <= 1e-12))
    return checks
