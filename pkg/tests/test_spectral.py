import mpmath
import numpy as np
import pytest
from scipy.special import j0 as scipy_j0

from layergreen import (LayeredMedium, Side, NonConvergenceError, ProfileQuery, QuadratureSpec,
                        SingularFrequencyError, bessel_j0, green_value, hankel_invert,
                        laplace_hankel_check, profile_w, verify_profile_ode)
from layergreen.quadrature import integrate_panels, wynn_epsilon
from layergreen.spectral import hankel_invert_terms, profile_dw


@pytest.mark.parametrize("t, expected", [
    (0.0, 1.0),
    (1.0, 0.7651976865579666),
])
def test_j0_reference_values(t, expected):
    assert bessel_j0(t) == pytest.approx(expected, abs=1e-15)


def test_j0_first_root():
    assert abs(bessel_j0(2.404825557695773)) <= 1e-10


def test_j0_against_mpmath():
    ts = np.concatenate([np.linspace(0, 30, 301), [11.9, 12.0, 12.1, 50.5, 123.4, 999.9, 1000.0]])
    ref = np.array([float(mpmath.besselj(0, mpmath.mpf(float(t)))) for t in ts])
    assert np.max(np.abs(bessel_j0(ts) - ref)) <= 1e-10


def test_j0_against_scipy_dense():
    ts = np.linspace(0, 1000, 200_001)
    assert np.max(np.abs(bessel_j0(ts) - scipy_j0(ts))) <= 1e-10


def test_j0_rejects_negative():
    with pytest.raises(ValueError):
        bessel_j0(-1.0)


@pytest.mark.parametrize("medium, x3, expected", [
    ((1, 1), 2.0, np.exp(-1) / 2),
    ((2, 1), 2.0, np.exp(-1) / 4 + np.exp(-3) / 12),
])
def test_profile_examples(medium, x3, expected):
    assert profile_w(LayeredMedium(*medium), 1.0, x3, 1.0) == pytest.approx(expected, rel=1e-15)


def test_profile_frozen_decimals():
    assert profile_w(LayeredMedium(1, 1), 1.0, 2.0, 1.0) == pytest.approx(0.1839397, abs=5e-8)
    assert profile_w(LayeredMedium(2, 1), 1.0, 2.0, 1.0) == pytest.approx(0.0961188, abs=5e-8)


def test_profile_continuous_at_interface():
    m = LayeredMedium(2, 1)
    up, down = profile_w(m, 1.0, 1e-9, 1.0), profile_w(m, 1.0, -1e-9, 1.0)
    assert abs(up - down) <= 1e-8 * up


def test_profile_pole():
    with pytest.raises(SingularFrequencyError):
        profile_w(LayeredMedium(2, 1), 0.0, 1.0, 0.5)


def test_profile_query_validation():
    with pytest.raises(ValueError):
        ProfileQuery(nu=-1.0, x3=0.0, y3=1.0)
    with pytest.raises(ValueError):
        ProfileQuery(nu=1.0, x3=0.0, y3=0.0)


@pytest.mark.parametrize("medium, nu, y3", [
    ((2, 1), 1.0, 1.0),
    ((1, 1), 0.3, 2.0),
    ((1, 1), 4.0, -0.7),
    ((3, 1), 2.0, -0.5),
    ((0.2, 5.0), 0.5, 1.5),
])
def test_profile_ode_suite(medium, nu, y3):
    report = verify_profile_ode(LayeredMedium(*medium), nu, y3)
    assert report.passed, report.residuals
    assert max(report.residuals.values()) <= 1e-6


def test_free_space_jump_is_exact():
    m = LayeredMedium(1, 1)
    for nu in (0.1, 1.0, 7.0):
        jump = profile_dw(m, nu, 1.0, 1.0, side=Side.PLUS) - profile_dw(m, nu, 1.0, 1.0, side=Side.MINUS)
        assert jump == pytest.approx(-1.0, rel=1e-15)


def test_flux_condition_analytic():
    m = LayeredMedium(3, 1)
    up = m.a_plus * profile_dw(m, 2.0, 0.0, -0.5, side=Side.PLUS)
    down = m.a_minus * profile_dw(m, 2.0, 0.0, -0.5, side=Side.MINUS)
    assert abs(up - down) <= 1e-8 * abs(up)


@pytest.mark.parametrize("rho", [0.0, 0.5, 1.0, 3.0])
@pytest.mark.parametrize("t", [0.5, 1.0, 4.0])
def test_laplace_hankel_grid(rho, t):
    num, exact = laplace_hankel_check(rho, t)
    assert exact == 1 / np.hypot(rho, t)
    assert abs(num - exact) <= 1e-8


@pytest.mark.parametrize("rho, t, expected", [(0.0, 2.0, 0.5), (3.0, 4.0, 0.2),
                                              (1.0, 1.0, 0.7071068)])
def test_laplace_hankel_examples(rho, t, expected):
    num, exact = laplace_hankel_check(rho, t)
    assert exact == pytest.approx(expected, abs=5e-8)
    assert num == pytest.approx(expected, abs=5e-8)


def test_laplace_hankel_rejects_nonpositive_t():
    with pytest.raises(ValueError):
        laplace_hankel_check(1.0, 0.0)


@pytest.mark.parametrize("medium, x, y, expected", [
    ((1, 1), (1, 0, 1), (0, 0, 2), 1 / (4 * np.pi * np.sqrt(2))),
    ((2, 1), (0, 0, 2), (0, 0, 1), 5 / (36 * np.pi)),
    ((2, 1), (0, 0, -1), (0, 0, 1), 1 / (12 * np.pi)),
])
def test_hankel_invert_examples(medium, x, y, expected):
    assert hankel_invert(LayeredMedium(*medium), x, y) == pytest.approx(expected, rel=1e-8)


def test_hankel_invert_free_space_decimal():
    assert hankel_invert(LayeredMedium(1, 1), (1, 0, 1), (0, 0, 2)) == pytest.approx(0.0562698, abs=5e-8)


def test_hankel_same_height_uses_extrapolation():
    m = LayeredMedium(2, 1)
    x, y = np.array([1.3, 0.0, 0.4]), np.array([0.0, 0.0, 0.4])
    assert hankel_invert(m, x, y) == pytest.approx(green_value(m, x, y), rel=1e-8)


def test_hankel_linearity_terms():
    m = LayeredMedium(2, 1)
    x, y = np.array([0.7, -0.2, 0.9]), np.array([0.0, 0.3, 0.5])
    direct, image = hankel_invert_terms(m, x, y)
    r = np.linalg.norm(x - y)
    big_r = np.hypot(np.hypot(*(x - y)[:2]), abs(x[2]) + abs(y[2]))
    assert direct == pytest.approx(1 / (4 * np.pi * 2 * r), rel=1e-9)
    assert image == pytest.approx(m.b / (4 * np.pi * 2 * big_r), rel=1e-9)
    assert direct + image == pytest.approx(hankel_invert(m, x, y), rel=1e-12)


def test_hankel_reports_error_estimate():
    value, err = hankel_invert(LayeredMedium(2, 1), (0.5, 0, 1), (0, 0, 0.5), return_error=True)
    assert 0 <= err <= 1e-10 * value


def test_hankel_precondition():
    with pytest.raises(ValueError):
        hankel_invert(LayeredMedium(2, 1), (1, 0, 0.5), (0, 0, 0.0))


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0)
    with pytest.raises(ValueError):
        QuadratureSpec(nu_max=np.inf)


def test_integrate_panels_polynomial_exact():
    sums, err = integrate_panels(lambda t: t ** 5, [0.0, 1.0, 2.0])
    np.testing.assert_allclose(sums, [1 / 6, (64 - 1) / 6], rtol=1e-14)
    assert err <= 1e-12


def test_integrate_panels_cap_raises():
    # a jump that bisection cannot resolve in two splits
    f = lambda t: np.where(t > 1 / 3, 1.0, 0.0)
    with pytest.raises(NonConvergenceError):
        integrate_panels(f, [0.0, 1.0], abs_tol=1e-14, rel_tol=1e-14, max_subdivisions=2)


def test_wynn_epsilon_alternating_series():
    partial = np.cumsum([(-1) ** k / (k + 1) for k in range(20)])
    value, err = wynn_epsilon(partial)
    assert value == pytest.approx(np.log(2), abs=1e-12)
    assert err < 1e-8
