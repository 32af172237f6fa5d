import math

import numpy as np
import pytest
from scipy import integrate

from core.errors import DivergentIntegralError, DomainError
from core.fields import make_bump, make_gaussian, make_hardy_extremal, translate_field
from core.geometry import GrushinSpace
from core.params import integrable
from core.quadrature import (
    WeightedIntegrand,
    angular_mass,
    ball_volume,
    divergence_probe,
    graded_rule,
    integrate_cartesian,
    integrate_polar,
    monte_carlo_full,
    monte_carlo_oracle,
    radial_integral,
)


def test_graded_rule_is_a_rule_on_the_unit_interval():
    x, w = graded_rule(6, 4)
    assert np.all((x > 0) & (x < 1))
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.sum(w * x**5) == pytest.approx(1.0 / 6.0, abs=1e-14)


def test_angular_mass_against_direct_area():
    # |B_1| on (1, 1, 1) is 4 * int_0^1 sqrt(1 - s^4)/2 ds
    space = GrushinSpace(1, 1, 1)
    direct, _ = integrate.quad(lambda s: 2.0 * math.sqrt(1.0 - s**4), 0.0, 1.0)
    assert ball_volume(space, 1.0) == pytest.approx(direct, rel=1e-10)
    assert angular_mass(space) == pytest.approx(3.0 * direct, rel=1e-10)


def test_angular_mass_rejects_nonintegrable_weight():
    with pytest.raises(DivergentIntegralError):
        angular_mass(GrushinSpace(1, 1, 1), -1.0)


def test_ball_volume_homogeneity(space):
    one = integrate_polar(space, WeightedIntegrand(rho_range=(0.0, 1.0)), tol=1e-10)
    two = integrate_polar(space, WeightedIntegrand(rho_range=(0.0, 2.0)), tol=1e-10)
    assert two.value / one.value == pytest.approx(2.0 ** float(space.Q), rel=5e-3)
    assert one.value == pytest.approx(ball_volume(space, 1.0), rel=1e-6)


def test_ball_ratio_is_eight_on_the_plane(plane):
    one = integrate_cartesian(plane, WeightedIntegrand(rho_range=(0.0, 1.0)), tol=1e-10)
    two = integrate_cartesian(plane, WeightedIntegrand(rho_range=(0.0, 2.0)), tol=1e-10)
    assert two.value / one.value == pytest.approx(8.0, rel=5e-3)


@pytest.mark.parametrize("route", [integrate_polar, integrate_cartesian])
def test_gaussian_integral_is_pi(plane, route):
    res = route(plane, WeightedIntegrand(field=make_gaussian(plane), power=1.0), tol=1e-10)
    assert res.converged
    assert res.value == pytest.approx(math.pi, abs=1e-6)


def _corpus(space):
    bump = make_bump(space, 1.0, 2.0)
    ext = make_hardy_extremal(space, 2.0, 0.0, 0.25)
    mono = WeightedIntegrand.monomial
    return [
        mono(space, 0, 0, (0.0, 1.0)),
        mono(space, 0, -2, (0.0, 1.0)),
        mono(space, 1, -1, (0.0, 2.0)),
        mono(space, 2, -4, (0.0, 1.0)),
        mono(space, -0.5, 0, (0.0, 1.0)),
        mono(space, 0, -4, (1.0, math.inf)),
        mono(space, 2, -6, (1.0, math.inf)),
        mono(space, 0.5, -5, (1.0, math.inf)),
        WeightedIntegrand(field=bump, power=2.0, name="bump^2"),
        WeightedIntegrand(field=bump, power=2.0, gradient=True, name="|grad bump|^2"),
        WeightedIntegrand(a_weight=2.0, rho_weight=-2.0, field=bump, power=2.0, name="hardy lhs of bump"),
        WeightedIntegrand(field=make_gaussian(space), power=1.0, name="gaussian"),
        WeightedIntegrand(a_weight=2.0, rho_weight=-2.0, field=ext, power=2.0, name="hardy lhs of extremal"),
        WeightedIntegrand(field=ext, power=2.0, gradient=True, name="|grad extremal|^2"),
    ]


@pytest.mark.parametrize("index", range(14))
def test_polar_and_cartesian_routes_agree(plane, index):
    g = _corpus(plane)[index]
    polar = integrate_polar(plane, g, tol=1e-9)
    cart = integrate_cartesian(plane, g, tol=1e-9)
    assert polar.converged and cart.converged
    assert abs(polar.value - cart.value) <= polar.error_estimate + cart.error_estimate + 1e-6 * abs(polar.value)


def test_monomial_on_ball_matches_closed_form(plane):
    # |x|^2 rho^{-4} = (|x|/rho)^2 rho^{-2}: A(2) * int_0^1 rho^{Q-3} drho = A(2)
    res = integrate_polar(plane, WeightedIntegrand.monomial(plane, 2, -4, (0.0, 1.0)), tol=1e-10)
    assert res.value == pytest.approx(angular_mass(plane, 2.0), rel=1e-8)


def test_radial_path_matches_ball_volume(space):
    res = radial_integral(space, 0.0, lambda r: np.ones_like(r), 0.0, 1.0, tol=1e-10)
    assert res.value == pytest.approx(ball_volume(space, 1.0), rel=1e-8)


def test_radial_path_rejects_bad_range(plane):
    with pytest.raises(DomainError):
        radial_integral(plane, 0.0, lambda r: r, 1.0, 0.5)


@pytest.mark.parametrize(
    "g",
    [
        WeightedIntegrand(a_weight=0.0, rho_weight=-3.0, rho_range=(0.0, 1.0)),
        WeightedIntegrand(a_weight=0.0, rho_weight=-2.0, rho_range=(1.0, math.inf)),
        WeightedIntegrand(a_weight=-1.0, rho_weight=1.0, rho_range=(0.0, 1.0)),
    ],
    ids=["boundary_origin", "infinity", "along_x_zero"],
)
def test_divergent_integrals_refused_before_quadrature(plane, g):
    with pytest.raises(DivergentIntegralError):
        integrate_polar(plane, g)


@pytest.mark.parametrize("x_exp, rho_exp", [(0, -2), (0, -3), (0, -4), (2, -6)])
@pytest.mark.parametrize("region", ["near_origin", "near_infinity"])
def test_divergence_probe_matches_criteria(plane, x_exp, rho_exp, region):
    g = WeightedIntegrand.monomial(plane, x_exp, rho_exp)
    report = divergence_probe(plane, g, region)
    predicted = x_exp + rho_exp + 3
    assert report.predicted_exponent == pytest.approx(predicted)
    if predicted == 0:
        assert abs(report.fitted_exponent) <= 0.05
    else:
        assert report.fitted_exponent == pytest.approx(predicted, rel=0.05)
    assert report.convergent is bool(integrable(plane, x_exp, rho_exp, region))


def test_divergence_probe_unknown_region(plane):
    with pytest.raises(DomainError):
        divergence_probe(plane, WeightedIntegrand(), "sideways")


def test_monte_carlo_oracle_agrees_with_quadrature(plane):
    g = WeightedIntegrand(field=make_bump(plane, 1.0, 2.0), power=2.0)
    exact = integrate_polar(plane, g, tol=1e-10).value
    mc = monte_carlo_oracle(plane, g, ((0.0, 2.0), (0.0, 2.0)), 200_000, seed=3)
    assert abs(mc.value - exact) <= 5 * mc.error_estimate
    again = monte_carlo_oracle(plane, g, ((0.0, 2.0), (0.0, 2.0)), 200_000, seed=3)
    assert again.value == mc.value


def test_full_monte_carlo_sees_translation_invariance(plane):
    base = make_bump(plane, 0.5, 1.0)
    exact = integrate_polar(plane, WeightedIntegrand(field=base, power=2.0), tol=1e-10).value
    moved = translate_field(base, [3.0], [0.0], 1.0)
    center, half = moved.support_box()
    mc = monte_carlo_full(plane, WeightedIntegrand(field=moved, power=2.0), center, half, 100_000, seed=11)
    assert abs(mc.value - exact) <= 5 * mc.error_estimate


def test_monte_carlo_needs_samples(plane):
    with pytest.raises(DomainError):
        monte_carlo_oracle(plane, WeightedIntegrand(), ((0.0, 1.0), (0.0, 1.0)), 0, seed=0)


def test_polar_ball_volume_converges_on_the_plane(plane):
    res = integrate_polar(plane, WeightedIntegrand(rho_range=(0.0, 1.0)), tol=1e-10)
    assert res.converged
    assert res.value == pytest.approx(ball_volume(plane, 1.0), rel=1e-9)


def test_polar_gaussian_converges_to_pi_at_tight_tolerance(plane):
    res = integrate_polar(plane, WeightedIntegrand(field=make_gaussian(plane), power=1.0), tol=1e-9)
    assert res.converged
    assert res.value == pytest.approx(math.pi, abs=1e-8)


@pytest.mark.parametrize("power", [1.0, 2.0, 3.0])
def test_gaussian_gradient_routes_agree_for_fractional_mu(power):
    space = GrushinSpace(2, 3, 0.5)
    g = WeightedIntegrand(field=make_gaussian(space), power=power, gradient=True)
    polar = integrate_polar(space, g, tol=1e-8)
    cart = integrate_cartesian(space, g, tol=1e-8)
    assert polar.converged and cart.converged
    assert polar.value == pytest.approx(cart.value, rel=1e-6)


@pytest.mark.parametrize("x_exp", [-0.5, 0.5])
def test_fractional_x_power_converges_on_both_routes(plane, x_exp):
    g = WeightedIntegrand.monomial(plane, x_exp, 0, (0.0, 1.0))
    exact = angular_mass(plane, x_exp) / (float(plane.Q) + x_exp)
    for route in (integrate_polar, integrate_cartesian):
        res = route(plane, g, tol=1e-9)
        assert res.converged
        assert res.value == pytest.approx(exact, rel=1e-8)


def test_polar_matches_scipy_double_integral(plane):
    bump = make_bump(plane, 1.0, 2.0)
    # (s, t) density on (1, 1, 1) is s^0 t^0 times the two point-sphere areas
    direct, _ = integrate.dblquad(
        lambda t, s: float(bump.value_st(np.array(s), np.array(t))) ** 2,
        0.0, 2.0, 0.0, 2.0, epsabs=1e-11, epsrel=1e-11,
    )
    res = integrate_polar(plane, WeightedIntegrand(field=bump, power=2.0), tol=1e-10)
    assert res.converged
    assert res.value == pytest.approx(4.0 * direct, rel=1e-7)


def test_polar_order_knob_gives_the_same_value(plane):
    g = WeightedIntegrand(field=make_bump(plane, 1.0, 2.0), power=2.0, gradient=True)
    base = integrate_polar(plane, g, tol=1e-9)
    wide = integrate_polar(plane, g, tol=1e-9, order=20)
    assert wide.converged
    assert wide.value == pytest.approx(base.value, rel=1e-7)


def test_tightening_tolerance_stays_within_the_looser_error(plane):
    g = WeightedIntegrand(field=make_gaussian(plane), power=1.0)
    loose = integrate_polar(plane, g, tol=1e-6)
    tight = integrate_polar(plane, g, tol=1e-7)
    assert loose.converged and tight.converged
    assert abs(tight.value - loose.value) <= loose.error_estimate + 1e-12 * abs(loose.value)


def test_monte_carlo_error_shrinks_like_inverse_square_root(plane):
    g = WeightedIntegrand(field=make_bump(plane, 1.0, 2.0), power=2.0)
    box = ((0.0, 2.0), (0.0, 2.0))
    small = monte_carlo_oracle(plane, g, box, 20_000, seed=5)
    large = monte_carlo_oracle(plane, g, box, 80_000, seed=5)
    assert large.error_estimate / small.error_estimate == pytest.approx(0.5, rel=0.1)
