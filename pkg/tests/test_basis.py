import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special
from scipy.integrate import quad

from fracdrift.basis import (
    HERMITE_SUP,
    BasisSpec,
    eval_basis,
    eval_basis_antideriv,
    eval_basis_deriv,
    hermite,
    hermite_functions,
    parse_basis,
    stability_quantities,
    trig,
)

odd_m = st.integers(0, 10).map(lambda k: 2 * k + 1)
interval = st.tuples(st.floats(-5, 5), st.floats(0.2, 6)).map(lambda p: (p[0], p[0] + p[1]))


def test_trig_m1_constant():
    assert eval_basis(trig(0, 1, 1), 0.3).tolist() == [1.0]


def test_hermite_h0():
    assert eval_basis(hermite(1), 0.0)[0] == pytest.approx(0.751126, abs=1e-6)
    assert HERMITE_SUP == pytest.approx(0.7511255444649425, rel=1e-15)


def test_hermite_h0_derivative():
    assert eval_basis_deriv(hermite(1), 1.0)[0] == pytest.approx(-0.455581, abs=1e-6)


def test_trig_phi0_derivative_zero():
    assert np.all(eval_basis_deriv(trig(-2, 2, 7), np.linspace(-2, 2, 9))[:, 0] == 0)


def test_hermite_against_scipy_polynomials():
    # independent oracle: physicists' Hermite polynomials from scipy
    x = np.linspace(-4, 4, 33)
    h = hermite_functions(x, 20)
    for j in range(21):
        norm = math.sqrt(2.0**j * math.factorial(j) * math.sqrt(math.pi))
        ref = special.eval_hermite(j, x) * np.exp(-x * x / 2) / norm
        assert np.allclose(h[:, j], ref, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(m=odd_m, iv=interval, u=st.floats(0, 1))
def test_trig_sum_of_squares_constant(m, iv, u):
    spec = trig(*iv, m)
    x = spec.lower + u * spec.width
    total = np.sum(eval_basis(spec, x) ** 2)
    L, _ = stability_quantities(spec)
    assert total == pytest.approx(L, rel=1e-10)
    assert L == pytest.approx(m / spec.width)


@settings(max_examples=30, deadline=None)
@given(m=odd_m, iv=interval, u=st.floats(0.001, 0.999))
def test_trig_derivative_sum_of_squares(m, iv, u):
    spec = trig(*iv, m)
    x = spec.lower + u * spec.width
    _, R = stability_quantities(spec)
    assert np.sum(eval_basis_deriv(spec, x) ** 2) == pytest.approx(R, rel=1e-9, abs=1e-12)
    assert R <= (2 * math.pi) ** 2 * m**3 / spec.width**3


def test_stability_trig_unit_interval():
    assert stability_quantities(trig(0, 1, 5))[0] == 5


@pytest.mark.parametrize("m", [1, 4, 16, 40])
def test_hermite_L_bound(m):
    L, R = stability_quantities(hermite(m))
    assert L <= m / math.sqrt(math.pi) + 1e-12
    assert R > 0


def test_trig_support_is_indicator():
    spec = trig(-1, 1, 5)
    out = eval_basis(spec, np.array([-1.5, 1.2, 3.0]))
    assert np.all(out == 0)
    assert np.all(eval_basis_deriv(spec, np.array([-1.5, 1.2])) == 0)


def test_gram_identity_trig_by_quadrature():
    spec = trig(-2, 2, 9)
    for j in range(9):
        for k in range(j, 9):
            val = quad(lambda y: eval_basis(spec, y)[j] * eval_basis(spec, y)[k], -2, 2,
                       limit=200)[0]
            assert val == pytest.approx(float(j == k), abs=1e-10)


def test_gram_identity_hermite():
    x, w = special.roots_hermite(200)
    phi = eval_basis(hermite(64), x)
    G = (phi * (w * np.exp(x * x))[:, None]).T @ phi
    assert np.max(np.abs(G - np.eye(64))) <= 1e-6


def test_hermite_sup_bound():
    x = np.linspace(-15, 15, 30_001)
    assert np.max(np.abs(eval_basis(hermite(64), x))) <= HERMITE_SUP + 1e-9


@pytest.mark.parametrize("spec", [hermite(30), trig(-2, 2, 15), trig(0.5, 1.5, 9)])
def test_derivative_finite_difference(spec):
    h = 1e-5
    if spec.compact:
        x = np.linspace(spec.lower + 1e-3, spec.upper - 1e-3, 301)
    else:
        x = np.linspace(-7, 7, 301)
    fd = (eval_basis(spec, x + h) - eval_basis(spec, x - h)) / (2 * h)
    assert np.max(np.abs(fd - eval_basis_deriv(spec, x))) <= 1e-6


def test_antiderivative_matches_quadrature():
    spec = trig(-2, 2, 7)
    for x in (-2.0, -0.7, 1.3, 2.0):
        ref = [quad(lambda y: eval_basis(spec, y)[j], -2, x)[0] for j in range(7)]
        assert np.allclose(eval_basis_antideriv(spec, x), ref, atol=1e-12)
    assert np.allclose(eval_basis_antideriv(spec, 5.0), eval_basis_antideriv(spec, 2.0))
    with pytest.raises(ValueError):
        eval_basis_antideriv(hermite(3), 0.0)


def test_even_dimension_coerced():
    with pytest.warns(UserWarning):
        spec = trig(0, 1, 4)
    assert spec.m == 3


def test_invalid_specs():
    with pytest.raises(ValueError):
        trig(1, 1, 3)
    with pytest.raises(ValueError):
        hermite(0)
    with pytest.raises(ValueError):
        BasisSpec("legendre", 3, 0, 1)


def test_parse_round_trip():
    assert parse_basis("trig(-2, 2, 5)") == trig(-2, 2, 5)
    assert parse_basis("hermite(12)") == hermite(12)
    assert parse_basis(str(trig(-1.5, 2.25, 3))) == trig(-1.5, 2.25, 3)
    for bad in ("trig(-2,2)", "fourier(3)", "hermite(x)", ""):
        with pytest.raises(ValueError):
            parse_basis(bad)


def test_shapes():
    x = np.zeros((4, 6))
    assert eval_basis(trig(0, 1, 5), x).shape == (4, 6, 5)
    assert eval_basis_deriv(hermite(7), x).shape == (4, 6, 7)
