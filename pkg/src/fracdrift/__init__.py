"""Nonparametric drift estimation from i.i.d. paths of fractional SDEs.

The model is X(t) = x0 + int_0^t b(X(s)) ds + sigma B(t) with B a fractional
Brownian motion of Hurst index H in (1/2, 1), observed on [0, T] for N
independent individuals, each from two close initial conditions.
"""

from .basis import (
    BasisSpec,
    eval_basis,
    eval_basis_deriv,
    hermite,
    parse_basis,
    stability_quantities,
    trig,
)
from .estimators import (
    AnchoredPrimitive,
    FitResult,
    GramMatrix,
    epsilon_rule,
    fit_drift,
    fit_drift_derivative,
    gram,
    m_opt,
    primitive_from_derivative,
    truncation_constant,
    truncation_event,
)
from .experiments import (
    RiskReport,
    TrialConfig,
    empirical_risk,
    occupation_density,
    rate_sweep,
    run_trial,
)
from .fbm import FbmPath, TimeGrid, fbm_covariance, sample_fbm, sample_fbm_array
from .integrals import (
    KernelCache,
    skorokhod_surrogate,
    skorokhod_surrogate_shift,
    young_integral,
)
from .sde import (
    CoupledPaths,
    DriftModel,
    SdeConfig,
    SdePath,
    coupled_solve,
    euler_solve,
    flow_derivative,
    make_drift,
    ou_variance,
)

__version__ = "0.1.0"
