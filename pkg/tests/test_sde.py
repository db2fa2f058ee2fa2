import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdrift.fbm import TimeGrid, sample_fbm, sample_fbm_array
from fracdrift.sde import (
    OrderViolationError,
    SdeConfig,
    coupled_solve,
    coupled_solve_batch,
    damped_sine_drift,
    euler_array,
    euler_solve,
    flow_derivative,
    hurst_alpha,
    linear_drift,
    make_drift,
    ou_variance,
    shifted_tanh_drift,
)
from fracdrift.validation import ou_variance_quad

GRID = TimeGrid(1.0, 256)


def config(drift, sigma=1.0, x0=1.0, H=0.75, grid=GRID):
    return SdeConfig(drift, x0, sigma, grid, H)


def test_pure_noise_is_shifted_fbm():
    noise = sample_fbm(GRID, 0.75, 3)[0]
    X = euler_solve(config(linear_drift(0.0), x0=2.0), noise)
    assert np.allclose(X.values, 2.0 + noise.values, rtol=0, atol=1e-14)


@pytest.mark.parametrize("mu", [-2.0, -0.5, 0.7])
def test_deterministic_linear_ode(mu):
    noise = sample_fbm(GRID, 0.75, 0)[0]
    X = euler_solve(config(linear_drift(mu), sigma=0.0), noise)
    exact = np.exp(mu * GRID.times)
    rel = np.max(np.abs(X.values / exact - 1.0))
    # explicit Euler: relative error ~ mu^2 t dt / 2
    assert rel <= mu * mu * GRID.dt


def test_ou_variance_monte_carlo():
    grid = TimeGrid(1.0, 256)
    W = sample_fbm_array(grid, 0.75, seed=8, count=10_000)
    X = euler_array(linear_drift(-1.0), 1.0, 1.0, grid.dt, W)
    xt = X[:, -1]
    var = xt.var(ddof=1)
    se = var * math.sqrt(2.0 / (len(xt) - 1))
    target = ou_variance(-1.0, 1.0, 0.75, 1.0)
    assert abs(var - target) <= 3 * se + 2 * grid.dt


def test_coupled_difference_linear():
    mu, eps = -0.8, 1e-3
    noise = sample_fbm(GRID, 0.75, 1)[0]
    pair = coupled_solve(config(linear_drift(mu)), eps, noise)
    exact = eps * np.exp(mu * GRID.times)
    assert np.max(np.abs(pair.difference / exact - 1.0)) <= mu * mu * GRID.dt


def test_coupled_difference_scales_linearly():
    noise = sample_fbm(GRID, 0.75, 2)[0]
    cfg = config(linear_drift(-1.3))
    d1 = coupled_solve(cfg, 1e-2, noise).difference
    d2 = coupled_solve(cfg, 4e-2, noise).difference
    assert np.allclose(d2, 4.0 * d1, rtol=1e-9)


def test_damped_sine_difference_sandwich():
    drift = damped_sine_drift()
    assert (drift.m_bound, drift.M_bound) == (-1.5, -0.5)
    eps = 1e-3
    noises = sample_fbm(GRID, 0.75, 5, count=50)
    pairs = coupled_solve_batch(config(drift), eps, noises)
    t = GRID.times
    # explicit Euler contracts by (1 + b' dt) per step; bound the discrete flow
    lo = eps * (1.0 + drift.m_bound * GRID.dt) ** np.arange(GRID.n + 1)
    hi = eps * (1.0 + drift.M_bound * GRID.dt) ** np.arange(GRID.n + 1)
    for p in pairs:
        d = p.difference
        assert np.all(d >= lo * (1 - 1e-9)) and np.all(d <= hi * (1 + 1e-9))
    assert np.allclose(lo, eps * np.exp(-1.5 * t), rtol=5e-3)
    assert np.allclose(hi, eps * np.exp(-0.5 * t), rtol=5e-3)


def test_batch_matches_single():
    noises = sample_fbm(GRID, 0.75, 7, count=3)
    cfg = config(damped_sine_drift())
    batch = coupled_solve_batch(cfg, 1e-3, noises)
    for pair, w in zip(batch, noises):
        single = coupled_solve(cfg, 1e-3, w)
        assert np.array_equal(pair.low.values, single.low.values)
        assert np.array_equal(pair.high.values, single.high.values)


def test_order_violation_raised():
    # dt * b' < -1 makes explicit Euler flip the ordering
    grid = TimeGrid(1.0, 4)
    noise = sample_fbm(grid, 0.75, 0)[0]
    with pytest.raises(OrderViolationError):
        coupled_solve(config(linear_drift(-10.0), grid=grid), 1e-3, noise)


def test_noise_mismatch_rejected():
    noise = sample_fbm(TimeGrid(1.0, 8), 0.75, 0)[0]
    with pytest.raises(ValueError):
        euler_solve(config(linear_drift(1.0)), noise)
    with pytest.raises(ValueError):
        coupled_solve(config(linear_drift(1.0), grid=TimeGrid(1.0, 8)), 0.0, noise)


def test_config_validation():
    with pytest.raises(ValueError):
        config(linear_drift(1.0), sigma=-1.0)
    with pytest.warns(UserWarning):
        config(linear_drift(1.0), x0=0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        config(linear_drift(1.0), sigma=0.0)


def test_flow_derivative_linear_and_zero():
    noise = sample_fbm(GRID, 0.75, 1)[0]
    cfg = config(linear_drift(-0.6))
    X = euler_solve(cfg, noise)
    assert np.allclose(flow_derivative(cfg, X).values, np.exp(-0.6 * GRID.times), rtol=1e-12)
    cfg0 = config(linear_drift(0.0))
    assert np.all(flow_derivative(cfg0, euler_solve(cfg0, noise)).values == 1.0)


def test_flow_derivative_vs_left_riemann():
    noise = sample_fbm(GRID, 0.75, 4)[0]
    cfg = config(damped_sine_drift())
    X = euler_solve(cfg, noise)
    log_flow = np.log(flow_derivative(cfg, X).values)
    rate = cfg.drift.b_prime(X.values)
    left = np.concatenate([[0.0], np.cumsum(rate[:-1]) * GRID.dt])
    assert np.max(np.abs(log_flow - left)) <= 2.0 * GRID.dt


def test_flow_derivative_tracks_coupled_ratio():
    noise = sample_fbm(GRID, 0.75, 6)[0]
    cfg = config(damped_sine_drift())
    pair = coupled_solve(cfg, 1e-6, noise)
    ratio = pair.difference / 1e-6
    flow = flow_derivative(cfg, pair.low).values
    assert np.max(np.abs(ratio / flow - 1.0)) <= 5.0 * GRID.dt


def test_ou_variance_special_values():
    assert ou_variance(-1.0, 0.0, 0.75, 2.0) == 0.0
    assert ou_variance(0.0, 2.0, 0.75, 1.0) == pytest.approx(2.828427, abs=1e-6)


@given(t=st.floats(0.05, 5.0), H=st.floats(0.55, 0.95), sigma=st.floats(0.1, 3.0))
@settings(max_examples=40, deadline=None)
def test_ou_variance_zero_drift_closed_form(t, H, sigma):
    assert ou_variance(0.0, t, H, sigma) == pytest.approx(sigma**2 * t ** (2 * H), rel=1e-10)


@pytest.mark.parametrize("mu,t,H", [(-1.0, 1.0, 0.75), (-2.5, 2.0, 0.6), (0.8, 1.5, 0.9)])
def test_ou_variance_against_adaptive_quadrature(mu, t, H):
    assert ou_variance(mu, t, H, 0.7) == pytest.approx(ou_variance_quad(mu, t, H, 0.7), rel=1e-9)


def test_ou_variance_monotone_in_mu():
    values = [ou_variance(mu, 1.0, 0.75, 1.0) for mu in (-2.0, -1.0, 0.0, 1.0)]
    assert values == sorted(values)


def test_hurst_alpha():
    assert hurst_alpha(0.75) == pytest.approx(0.375)


def test_make_drift_lookup():
    d = make_drift("damped_sine", {"theta": 2.0, "a": 0.3})
    assert d.b(np.array(1.0)) == pytest.approx(-2.0 + 0.3 * math.sin(1.0))
    assert make_drift("linear", [-1.5]).b(np.array(2.0)) == pytest.approx(-3.0)
    with pytest.raises(ValueError):
        make_drift("cubic")


@pytest.mark.parametrize("factory", [damped_sine_drift, shifted_tanh_drift])
def test_certified_bounds(factory):
    d = factory(1.2, 0.7)
    x = np.linspace(-20, 20, 200_001)
    bp = d.b_prime(x)
    assert bp.min() >= d.m_bound - 1e-12 and bp.max() <= d.M_bound + 1e-12
    assert np.max(np.abs(d.b_second(x))) <= d.b_second_sup + 1e-12
    assert np.max(np.abs(d.b_second(x))) >= 0.99 * d.b_second_sup
    h = 1e-5
    assert np.allclose((d.b(x + h) - d.b(x - h)) / (2 * h), bp, atol=1e-7)
