"""Orthonormal projection bases: trigonometric on [l, r] and Hermite on R.

Trigonometric layout, with u = (x - l) / (r - l) and width = r - l::

    phi_0      = 1 / sqrt(width)
    phi_{2j-1} = sqrt(2 / width) cos(2 pi j u)      j >= 1
    phi_{2j}   = sqrt(2 / width) sin(2 pi j u)

all multiplied by the indicator of [l, r]. The dimension is kept odd so that
every cosine comes with its sine.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BasisSpec",
    "trig",
    "hermite",
    "parse_basis",
    "eval_basis",
    "eval_basis_deriv",
    "eval_basis_antideriv",
    "hermite_functions",
    "stability_quantities",
    "HERMITE_SUP",
]

HERMITE_SUP = math.pi ** -0.25
HERMITE_PROBE = np.linspace(-12.0, 12.0, 4097)


@dataclass(frozen=True)
class BasisSpec:
    kind: str
    m: int
    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        if self.kind not in ("trigonometric", "hermite"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"basis dimension must be a positive integer, got {self.m!r}")
        m = int(self.m)
        if self.kind == "trigonometric":
            if not (math.isfinite(self.lower) and math.isfinite(self.upper) and self.lower < self.upper):
                raise ValueError("trigonometric basis needs a finite interval with l < r")
            if m % 2 == 0:
                warnings.warn(f"trigonometric dimension {m} is even; using {m - 1}", stacklevel=3)
                m -= 1
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def compact(self) -> bool:
        return self.kind == "trigonometric"

    def with_dim(self, m: int) -> "BasisSpec":
        return BasisSpec(self.kind, m, self.lower, self.upper)

    def indicator(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.compact:
            return np.ones_like(x)
        return ((x >= self.lower) & (x <= self.upper)).astype(float)

    def __str__(self) -> str:
        if self.compact:
            return f"trig({self.lower:g},{self.upper:g},{self.m})"
        return f"hermite({self.m})"


def trig(lower: float, upper: float, m: int) -> BasisSpec:
    return BasisSpec("trigonometric", m, lower, upper)


def hermite(m: int) -> BasisSpec:
    return BasisSpec("hermite", m)


_NUM = r"\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*"


def parse_basis(text: str) -> BasisSpec:
    """Parse ``trig(l,r,m)`` or ``hermite(m)``."""
    s = text.strip()
    if mt := re.fullmatch(rf"trig\({_NUM},{_NUM},\s*(\d+)\s*\)", s):
        return trig(float(mt[1]), float(mt[2]), int(mt[3]))
    if mt := re.fullmatch(r"hermite\(\s*(\d+)\s*\)", s):
        return hermite(int(mt[1]))
    raise ValueError(f"cannot parse basis {text!r}; expected 'trig(l,r,m)' or 'hermite(m)'")


def hermite_functions(x, m: int) -> np.ndarray:
    """h_0..h_m at ``x`` via the normalized three-term recurrence.

    Returns an array of shape ``x.shape + (m + 1,)``. Working with the
    normalized functions keeps every intermediate bounded by pi^{-1/4}.
    """
    x = np.asarray(x, dtype=float)
    h = np.empty(x.shape + (m + 1,))
    h[..., 0] = HERMITE_SUP * np.exp(-0.5 * x * x)
    if m >= 1:
        h[..., 1] = math.sqrt(2.0) * x * h[..., 0]
    for j in range(1, m):
        h[..., j + 1] = (math.sqrt(2.0 / (j + 1)) * x * h[..., j]
                         - math.sqrt(j / (j + 1)) * h[..., j - 1])
    return h


def _trig_parts(spec: BasisSpec, x):
    x = np.asarray(x, dtype=float)
    J = (spec.m - 1) // 2
    freq = 2.0 * math.pi * np.arange(1, J + 1)
    angle = (x[..., None] - spec.lower) / spec.width * freq
    return x, freq, angle, spec.indicator(x)[..., None]


def eval_basis(spec: BasisSpec, x) -> np.ndarray:
    """Basis values, shape ``x.shape + (m,)``."""
    if not spec.compact:
        return hermite_functions(x, spec.m - 1)
    x, _, angle, ind = _trig_parts(spec, x)
    out = np.empty(x.shape + (spec.m,))
    out[..., 0] = 1.0 / math.sqrt(spec.width)
    amp = math.sqrt(2.0 / spec.width)
    out[..., 1::2] = amp * np.cos(angle)
    out[..., 2::2] = amp * np.sin(angle)
    return out * ind


def eval_basis_deriv(spec: BasisSpec, x) -> np.ndarray:
    """Derivatives of the basis functions, shape ``x.shape + (m,)``.

    Hermite: h_j' = sqrt(j/2) h_{j-1} - sqrt((j+1)/2) h_{j+1}.
    """
    if not spec.compact:
        h = hermite_functions(x, spec.m)
        j = np.arange(spec.m)
        out = -np.sqrt((j + 1) / 2.0) * h[..., 1:]
        out[..., 1:] += np.sqrt(j[1:] / 2.0) * h[..., :-2]
        return out
    x, freq, angle, ind = _trig_parts(spec, x)
    out = np.zeros(x.shape + (spec.m,))
    scale = math.sqrt(2.0 / spec.width) * freq / spec.width
    out[..., 1::2] = -scale * np.sin(angle)
    out[..., 2::2] = scale * np.cos(angle)
    return out * ind


def eval_basis_antideriv(spec: BasisSpec, x) -> np.ndarray:
    """int_l^x phi_j(y) dy for the trigonometric basis (constant past r)."""
    if not spec.compact:
        raise ValueError("antiderivatives are only provided on a compact interval")
    xc = np.clip(np.asarray(x, dtype=float), spec.lower, spec.upper)
    xc, freq, angle, _ = _trig_parts(spec, xc)
    out = np.empty(xc.shape + (spec.m,))
    out[..., 0] = (xc - spec.lower) / math.sqrt(spec.width)
    scale = math.sqrt(2.0 / spec.width) * spec.width / freq
    out[..., 1::2] = scale * np.sin(angle)
    out[..., 2::2] = scale * (1.0 - np.cos(angle))
    return out


def stability_quantities(spec: BasisSpec, probe_grid=None) -> tuple[float, float]:
    """L(m) = sup sum_j phi_j^2 and R(m) = sup sum_j phi_j'^2.

    Exact for the trigonometric basis, where both sums are constant on
    [l, r]. For Hermite functions the sup is taken over ``probe_grid``
    (default: 4097 points on [-12, 12]), so the values are lower bounds.
    """
    m = spec.m
    if spec.compact:
        width = spec.width
        L = m / width
        R = (2.0 * math.pi) ** 2 * m * (m * m - 1) / (12.0 * width**3)
        return L, R
    grid = HERMITE_PROBE if probe_grid is None else np.asarray(probe_grid, float)
    L = float(np.max(np.sum(eval_basis(spec, grid) ** 2, axis=-1)))
    R = float(np.max(np.sum(eval_basis_deriv(spec, grid) ** 2, axis=-1)))
    return L, R
