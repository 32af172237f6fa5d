from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.engine import (
    _leading_exponent,
    InequalitySpec,
    corpus_hardy_check,
    evaluate,
    gradient_check,
    lemma_lambda_check,
    lemma_p_probe,
    log_family_experiment,
    on_log_trigger,
    scaling_exponents,
    scaling_experiment,
    sharp_search,
    translation_experiment,
)
from core.errors import DomainError, InadmissibleError
from core.fields import dilate_field, make_bump, make_gaussian, make_hardy_extremal, make_indicator, scale_field
from core.geometry import GrushinSpace
from core.params import CknParams, HardyParams, WhsParams, remark_reduction

F = Fraction
LAMBDAS = (1.0, 0.5, 0.25, 0.125)


@pytest.fixture
def bump(plane):
    return make_bump(plane, 1.0, 2.0)


def _ckn(**kw):
    base = dict(p=F(2), q=F(2), r=F(3), a=F(1, 2), alpha=F(0), beta=F(0), sigma=F(0))
    base.update(kw)
    return CknParams(**base)


def test_hardy_bump_is_below_the_constant(plane, bump):
    rep = evaluate(InequalitySpec("hardy", plane, HardyParams(2, 0)), bump, tol=1e-8)
    assert rep.form == "integral"
    assert rep.constant == pytest.approx(4.0)
    assert 0 < rep.ratio <= 4.0
    assert rep.satisfied_at_constant is True
    assert rep.rhs == rep.rhs_grad_factor
    assert {"lhs:polar", "lhs:cartesian", "grad:polar", "grad:cartesian"} <= set(rep.provenance)


def test_report_rhs_combines_factors(plane, admissible_spec, bump):
    rep = evaluate(admissible_spec, bump, tol=1e-8, cross_check=False)
    assert rep.form == "norm"
    assert rep.a == 0.5
    assert rep.rhs == pytest.approx(rep.rhs_grad_factor**0.5 * rep.rhs_q_factor**0.5, rel=1e-14)
    assert rep.ratio == pytest.approx(rep.lhs / rep.rhs, rel=1e-14)
    assert rep.constant is None and rep.satisfied_at_constant is None


def test_whs_at_s_zero_is_sobolev(plane, bump):
    whs = evaluate(InequalitySpec("whs", plane, WhsParams(2.0, 0.0, 0.0)), bump, tol=1e-8, cross_check=False)
    sob = evaluate(InequalitySpec("sobolev", plane, 2.0), bump, tol=1e-8, cross_check=False)
    assert whs.lhs == pytest.approx(sob.lhs, rel=1e-12)
    assert whs.rhs == pytest.approx(sob.rhs, rel=1e-12)
    assert whs.ratio == pytest.approx(sob.ratio, rel=1e-12)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_reduced_ckn_matches_whs(plane, bump, s):
    whs = WhsParams(2.0, s, 0.0)
    ckn = remark_reduction(plane, whs)
    a = evaluate(InequalitySpec("whs", plane, whs), bump, tol=1e-8, cross_check=False)
    b = evaluate(InequalitySpec("ckn", plane, ckn), bump, tol=1e-8, cross_check=False)
    assert b.rhs_q_factor == 1.0
    assert "q" not in b.integrals
    for name in ("lhs", "grad"):
        assert b.integrals[name] == pytest.approx(a.integrals[name], rel=1e-12)
    assert b.ratio == pytest.approx(a.ratio, rel=1e-12)


@pytest.mark.parametrize("c", [-3.0, 0.25, 7.0])
def test_ratio_is_invariant_under_rescaling(plane, admissible_spec, bump, c):
    for spec in (InequalitySpec("hardy", plane, HardyParams(2, 0)), admissible_spec):
        plain = evaluate(spec, bump, tol=1e-10, cross_check=False)
        scaled = evaluate(spec, scale_field(bump, c), tol=1e-10, cross_check=False)
        assert scaled.ratio == pytest.approx(plain.ratio, rel=1e-11)


def test_inadmissible_tuple_is_refused_unless_forced(plane, bump):
    spec = InequalitySpec("ckn", plane, _ckn(r=F(2)))
    with pytest.raises(InadmissibleError) as info:
        evaluate(spec, bump)
    assert info.value.report.failing() == ["dimensional_balance"]
    rep = evaluate(spec, bump, tol=1e-8, force=True, cross_check=False)
    assert rep.ratio > 0


def test_field_without_gradient_is_rejected(plane):
    spec = InequalitySpec("hardy", plane, HardyParams(2, 0))
    with pytest.raises(DomainError):
        evaluate(spec, make_indicator(plane, 1.0), cross_check=False)


def test_spec_validates_its_parameters(plane):
    with pytest.raises(DomainError):
        InequalitySpec("hardy", plane, WhsParams(2, 0, 0))
    with pytest.raises(DomainError):
        InequalitySpec("sobolev", plane, HardyParams(2, 0))
    with pytest.raises(DomainError):
        InequalitySpec("poincare", plane, 2.0)


def test_predicted_scaling_exponents(plane):
    ok = scaling_exponents(InequalitySpec("ckn", plane, _ckn()))
    assert ok == pytest.approx({"lhs": -3.0, "grad": -1.0, "q": -3.0, "ratio": 0.0})
    bad = scaling_exponents(InequalitySpec("ckn", plane, _ckn(r=F(2))))
    assert bad["ratio"] == pytest.approx(-0.5)


def test_balanced_tuple_is_dilation_invariant(admissible_spec, bump):
    rep = scaling_experiment(admissible_spec, bump, LAMBDAS, tol=1e-8)
    assert abs(rep.ratio_fit.fitted) <= 1e-3
    assert rep.passed
    assert "unbalanced" not in rep.flags
    for fit in rep.fits:
        assert fit.r_squared >= 0.999
        assert fit.fitted == pytest.approx(fit.predicted, abs=1e-3)


def test_unbalanced_tuple_blows_up_under_dilation(plane, bump):
    rep = scaling_experiment(InequalitySpec("ckn", plane, _ckn(r=F(2))), bump, LAMBDAS, tol=1e-8)
    assert rep.ratio_fit.fitted == pytest.approx(-0.5, rel=0.05)
    assert "unbalanced" in rep.flags
    assert rep.extra["balance_residual"] == pytest.approx(1.0 / 6.0)
    ratios = np.asarray(rep.ratio_fit.values)
    # grid is ascending in lambda, so the ratio grows as lambda shrinks
    assert np.all(np.diff(ratios) < 0)


@pytest.mark.parametrize("grid", [(1.0,), (1.0, 1.0, 1.0), (1.0, 1.2, 1.5)])
def test_scaling_grid_needs_spread(admissible_spec, bump, grid):
    with pytest.raises(DomainError):
        scaling_experiment(admissible_spec, bump, grid)


def test_scaling_runs_only_on_ckn(plane, bump):
    with pytest.raises(DomainError):
        scaling_experiment(InequalitySpec("hardy", plane, HardyParams(2, 0)), bump, LAMBDAS)


TRANSLATION_LAMBDAS = (100.0, 300.0, 1000.0, 3000.0, 10000.0)


def test_translation_is_neutral_when_index_vanishes(plane):
    u = make_bump(plane, 0.5, 1.0)
    rep = translation_experiment(InequalitySpec("ckn", plane, _ckn()), u, [1.0], [0.0], TRANSLATION_LAMBDAS, seed=7)
    assert "contradiction" not in rep.flags
    assert rep.conclusion.startswith("equal growth rates")
    assert rep.fit("lhs").fitted == pytest.approx(0.0, abs=0.05)


def test_translation_flags_sigma_above_alpha(plane):
    u = make_bump(plane, 0.5, 1.0)
    spec = InequalitySpec("ckn", plane, _ckn(sigma=F(1)))
    rep = translation_experiment(spec, u, [1.0], [0.0], TRANSLATION_LAMBDAS, seed=7)
    gamma = float(spec.params.gamma)
    assert rep.fit("lhs").fitted == pytest.approx(gamma * 3.0, rel=0.05)
    assert rep.fit("grad").fitted == pytest.approx(0.0, abs=0.05)
    # gamma - a*alpha - (1-a)*beta = a*(sigma - alpha) = 1/2
    assert rep.ratio_fit.predicted == pytest.approx(0.5)
    assert rep.ratio_fit.fitted == pytest.approx(0.5, abs=0.05)
    assert "contradiction" in rep.flags


def test_translation_is_reproducible(plane):
    u = make_bump(plane, 0.5, 1.0)
    spec = InequalitySpec("ckn", plane, _ckn(sigma=F(1)))
    a = translation_experiment(spec, u, [1.0], [0.0], TRANSLATION_LAMBDAS, n_samples=2000, seed=3)
    b = translation_experiment(spec, u, [1.0], [0.0], TRANSLATION_LAMBDAS, n_samples=2000, seed=3)
    assert a.to_dict() == b.to_dict()


def test_translation_preconditions(plane):
    spec = InequalitySpec("ckn", plane, _ckn())
    small = make_bump(plane, 0.5, 1.0)
    with pytest.raises(DomainError):
        translation_experiment(spec, small, [0.0], [0.0], TRANSLATION_LAMBDAS)
    with pytest.raises(DomainError):
        translation_experiment(spec, small, [1.0], [0.0], (0.5, 5.0, 50.0))
    with pytest.raises(DomainError):
        translation_experiment(spec, make_bump(plane, 1.0, 2.0), [1.0], [0.0], TRANSLATION_LAMBDAS)


@pytest.fixture
def trigger_spec(plane):
    return InequalitySpec("ckn", plane, _ckn(beta=F(-1)))


def test_trigger_detection(trigger_spec, admissible_spec):
    assert on_log_trigger(trigger_spec)
    assert not on_log_trigger(admissible_spec)


def test_log_family_growth_exponents(trigger_spec):
    rep = log_family_experiment(trigger_spec, [1e-2, 1e-3, 1e-4, 1e-5], tol=1e-9)
    c = trigger_spec.params
    for name, expected in (("lhs", float(c.r) + 1), ("grad", float(c.p) + 1), ("q", float(c.q) + 1)):
        assert rep.fit(name).fitted == pytest.approx(expected, abs=0.2)
    assert rep.extra["forced_condition_holds"] is True
    assert rep.extra["profile_exponent"] == pytest.approx(-0.5)
    assert "log_growth_violation" not in rep.flags


def test_log_family_refuses_off_trigger(admissible_spec):
    with pytest.raises(DomainError):
        log_family_experiment(admissible_spec, [1e-2, 1e-3, 1e-4])


def test_log_family_flags_narrow_range(trigger_spec):
    rep = log_family_experiment(trigger_spec, [0.9, 0.8, 0.7], tol=1e-9)
    assert "slow_convergence:narrow_eps_range" in rep.flags


def test_log_family_eps_validation(trigger_spec):
    with pytest.raises(DomainError):
        log_family_experiment(trigger_spec, [1e-2, 1e-3])
    with pytest.raises(DomainError):
        log_family_experiment(trigger_spec, [1e-2, 1e-3, 2.0])


def test_sharp_grid_search_approaches_the_constant(plane):
    spec = InequalitySpec("hardy", plane, HardyParams(2, 0))
    rep = sharp_search(spec, method="grid", eps_shift_grid=(0.4, 0.2, 0.1, 0.05), tol=1e-8)
    ratios = [ratio for _, ratio in rep.trace]
    assert [params[0] for params, _ in rep.trace] == [0.4, 0.2, 0.1, 0.05]
    assert np.all(np.diff(ratios) > 0)
    assert rep.best_ratio == max(ratios) >= 3.6
    assert rep.fraction_of_target >= 0.9
    assert all(r <= 4.0 * (1 + 3e-8) for r in ratios)
    assert rep.best_so_far() == sorted(rep.best_so_far())


def test_far_from_extremal_profile_wastes_the_weight(plane):
    spec = InequalitySpec("hardy", plane, HardyParams(2, 0))
    # eps_shift 1/2 makes the inner profile constant
    flat = evaluate(spec, make_hardy_extremal(plane, 2.0, 0.0, 0.5, cutoff=(1.0, 2.0)), 1e-8, cross_check=False)
    assert flat.ratio < 0.75 * 4.0


@pytest.mark.slow
def test_sharp_golden_search(plane):
    spec = InequalitySpec("hardy", plane, HardyParams(2, 0))
    rep = sharp_search(spec, method="golden", bounds=(0.02, 0.5), max_evals=40, tol=1e-8)
    assert rep.fraction_of_target >= 0.9
    assert rep.best_ratio <= 4.0 * (1 + 3e-8)


def test_sharp_search_refuses_inapplicable_alpha(plane):
    with pytest.raises(InadmissibleError):
        sharp_search(InequalitySpec("hardy", plane, HardyParams(2, -1)))


def test_sharp_search_unknown_method(plane):
    with pytest.raises(DomainError):
        sharp_search(InequalitySpec("hardy", plane, HardyParams(2, 0)), method="annealing")


def test_lambda_lemma_equality_and_reduction():
    rng = np.random.default_rng(8)
    for _ in range(100):
        xi = rng.standard_normal(3)
        lam = rng.uniform(0.1, 5.0)
        assert abs(lemma_lambda_check(xi, xi, lam)) <= 1e-12 * max(1.0, np.linalg.norm(xi) ** (lam + 1))
        eta = rng.standard_normal(3)
        assert lemma_lambda_check(xi, eta, 1.0) == pytest.approx(np.sum((xi - eta) ** 2))


def test_lambda_lemma_is_nonnegative_on_many_samples():
    rng = np.random.default_rng(9)
    xi = rng.standard_normal((100_000, 3)) * 10.0 ** rng.uniform(-1.0, 1.0, size=(100_000, 1))
    eta = rng.standard_normal((100_000, 3)) * 10.0 ** rng.uniform(-1.0, 1.0, size=(100_000, 1))
    lam = rng.uniform(0.05, 6.0, size=100_000)
    worst = min(
        lemma_lambda_check(x, e, float(l)) / max(1.0, np.linalg.norm(x) ** (l + 1) + np.linalg.norm(e) ** (l + 1))
        for x, e, l in zip(xi, eta, lam)
    )
    assert worst >= -1e-12


@settings(max_examples=300, deadline=None)
@given(
    xi=st.lists(st.floats(-10, 10), min_size=2, max_size=2),
    eta=st.lists(st.floats(-10, 10), min_size=2, max_size=2),
    lam=st.floats(0.05, 8.0),
)
def test_lambda_lemma_property(xi, eta, lam):
    scale = max(1.0, np.linalg.norm(xi) ** (lam + 1) + np.linalg.norm(eta) ** (lam + 1))
    assert lemma_lambda_check(xi, eta, lam) >= -1e-12 * scale


def test_lambda_lemma_validates_input():
    with pytest.raises(DomainError):
        lemma_lambda_check([1.0], [1.0], 0.0)
    with pytest.raises(DomainError):
        lemma_lambda_check([1.0, 2.0], [1.0], 1.0)


def test_p_probe_is_an_identity_at_two():
    rep = lemma_p_probe(2.0, n_samples=20_000, seed=1)
    # cancellation in |xi1+xi2|^2 - |xi1|^2 when |xi2| << |xi1|
    assert rep.first_sup == pytest.approx(1.0, abs=1e-6)
    assert rep.second_bound_violations == 0


@pytest.mark.parametrize("p", [3.0, 4.5])
def test_p_probe_confirms_bounds_above_two(p):
    rep = lemma_p_probe(p, n_samples=100_000, seed=2)
    assert rep.first_bound_violations == 0
    assert rep.second_bound_violations == 0
    assert rep.second_inf > 0
    assert rep.first_sup <= 1.0 + 1e-6


@pytest.mark.parametrize("p", [1.2, 1.5, 2.0])
def test_p_probe_sup_is_finite_and_stable(p):
    small = lemma_p_probe(p, n_samples=10_000, seed=4)
    large = lemma_p_probe(p, n_samples=100_000, seed=4)
    assert np.isfinite(small.first_sup) and np.isfinite(large.first_sup)
    assert small.second_inf > 0 and large.second_inf > 0
    assert large.first_sup == pytest.approx(small.first_sup, rel=0.25)


def test_p_probe_is_seeded():
    assert lemma_p_probe(1.5, 5000, seed=6) == lemma_p_probe(1.5, 5000, seed=6)


def test_p_probe_needs_p_at_least_one():
    with pytest.raises(DomainError):
        lemma_p_probe(0.5)


def _corpus_fields():
    return [
        lambda s, p, a: make_bump(s, 1.0, 2.0),
        lambda s, p, a: make_bump(s, 0.5, 1.0),
        lambda s, p, a: make_bump(s, 0.2, 3.0),
        lambda s, p, a: dilate_field(make_bump(s, 1.0, 2.0), 0.3),
        lambda s, p, a: dilate_field(make_bump(s, 0.1, 0.4), 2.0),
        lambda s, p, a: make_gaussian(s),
        lambda s, p, a: make_hardy_extremal(s, p, a, 0.4),
        lambda s, p, a: make_hardy_extremal(s, p, a, 0.2),
        lambda s, p, a: make_hardy_extremal(s, p, a, 0.3, cutoff=(1.0, 2.0)),
        lambda s, p, a: make_hardy_extremal(s, p, a, 0.3, cutoff=(0.5, 4.0)),
    ]


@pytest.mark.slow
def test_hardy_bound_over_the_corpus():
    spaces = [GrushinSpace(1, 1, 1), GrushinSpace(2, 3, 0.5)]
    reports = corpus_hardy_check(spaces, [1.5, 2.0, 3.0], [0.0, 0.5, -0.2], _corpus_fields(), tol=1e-6)
    assert len(reports) >= 10 * 8
    for rep in reports:
        assert rep.ratio <= rep.constant * (1 + 3e-6)
        assert rep.satisfied_at_constant is True


def test_corpus_skips_inapplicable_configurations(plane):
    # Q - p + alpha*p = 0 for p = 3, alpha = 0 on (1, 1, 1)
    reports = corpus_hardy_check([plane], [3.0], [0.0], [lambda s, p, a: make_bump(s, 1.0, 2.0)])
    assert reports == []


def test_dilated_bump_keeps_the_hardy_ratio(plane, bump):
    spec = InequalitySpec("hardy", plane, HardyParams(2, 0))
    plain = evaluate(spec, bump, 1e-10, cross_check=False)
    dilated = evaluate(spec, dilate_field(bump, 3.0), 1e-10, cross_check=False)
    # both sides of the Hardy inequality scale like lambda^{p - Q}
    assert dilated.ratio == pytest.approx(plain.ratio, rel=1e-8)



def test_whs_on_the_plane_converges_through_the_polar_route(plane, bump):
    rep = evaluate(InequalitySpec("whs", plane, WhsParams(2.0, 0.0, 0.0)), bump, tol=1e-8)
    polar = {k: v for k, v in rep.provenance.items() if k.endswith(":polar")}
    assert polar
    assert all(res.converged for res in polar.values())
    assert rep.ratio > 0


@pytest.mark.parametrize("field", [lambda s: make_bump(s, 1.0, 2.0), make_gaussian])
def test_analytic_gradient_matches_finite_differences(space, field):
    gap = gradient_check(field(space), seed=4)
    assert gap is not None
    assert gap < 1e-5


def test_gradient_check_skips_nonsmooth_fields(plane):
    assert gradient_check(make_indicator(plane, 1.0)) is None
    assert gradient_check(make_hardy_extremal(plane, 2.0, 0.0, 0.25)) is None


def test_report_carries_the_gradient_gap(plane, bump):
    rep = evaluate(InequalitySpec("hardy", plane, HardyParams(2, 0)), bump, tol=1e-8, cross_check=False)
    assert rep.gradient_gap is not None and rep.gradient_gap < 1e-5
    assert "gradient_gap" in rep.to_dict()


def test_leading_exponent_is_a_straight_line_in_inverse_log():
    # log I = 2 log L - 3/L on a doubling grid: local slopes are exactly linear in 1/L
    L = 10.0 * 2.0 ** np.arange(5)
    lead, slopes = _leading_exponent(np.log(L), 2.0 * np.log(L) - 3.0 / L)
    assert lead == pytest.approx(2.0, abs=1e-10)
    assert np.all(slopes > 2.0)
