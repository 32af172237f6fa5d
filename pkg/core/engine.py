"""
Inequality evaluation and the experiments built on it.

``evaluate`` computes both sides of the Hardy, weighted Hardy–Sobolev, CKN and
Sobolev inequalities for one trial field. The experiments sweep a family of
fields (dilates, translates, log profiles, near-extremal Hardy profiles) and fit
growth exponents; the lemma probes sample the pointwise vector inequalities.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from numbers import Real
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize, stats

from .errors import (
    DomainError,
    InapplicableConstantError,
    FitError,
    InadmissibleError,
    OptimizerBudgetError,
    QuadratureError,
)
from .fields import SMOOTH, TrialField, dilate_field, make_hardy_extremal, make_log_family, translate_field
from .geometry import DEFAULT_EXCLUSION_RADIUS, DEFAULT_FD_STEP, GrushinSpace, fd_partials, gauge_st, random_points
from .params import (
    DEFAULT_PARAMS_TOL,
    CknParams,
    HardyParams,
    WhsParams,
    balance_residual,
    check_ckn,
    hardy_constant,
    hardy_hypothesis,
    p_star,
    sobolev_admissible,
    sobolev_exponent,
    whs_admissible,
)
from .quadrature import (
    DEFAULT_TOL,
    GAUSS_ORDER,
    WeightedIntegrand,
    integrate_cartesian,
    integrate_polar,
    monte_carlo_full,
    radial_integral,
)
from .reports import (
    AdmissibilityReport,
    InequalityReport,
    IntegralFit,
    LemmaReport,
    QuadratureResult,
    ScalingReport,
    SearchReport,
)

log = logging.getLogger(__name__)

KINDS = ("hardy", "whs", "ckn", "sobolev")
MIN_R_SQUARED = 0.999
MIN_LAMBDA_SPAN = 4.0
DEFAULT_MC_SAMPLES = 200_000
SATISFIED_SLACK = 3.0
VIOLATION_MARGIN = 10.0
GRADIENT_CHECK_POINTS = 16
GRADIENT_GAP_WARN = 1e-5


@dataclass(frozen=True)
class Term:
    """One integral ∫ (|x|/ρ)^{μ·a_weight} ρ^{rho_weight} |F|^{power}."""

    name: str
    a_weight: float
    rho_weight: float
    power: float
    gradient: bool = False

    def integrand(self, u: TrialField) -> WeightedIntegrand:
        return WeightedIntegrand(self.a_weight, self.rho_weight, u, self.power, self.gradient, name=self.name)


@dataclass(frozen=True)
class InequalitySpec:
    kind: str
    space: GrushinSpace
    params: Union[HardyParams, WhsParams, CknParams, Real]

    def __post_init__(self):
        expected = {"hardy": HardyParams, "whs": WhsParams, "ckn": CknParams}
        if self.kind not in KINDS:
            raise DomainError(f"unknown inequality kind {self.kind!r}; known: {', '.join(KINDS)}")
        if self.kind == "sobolev":
            if not isinstance(self.params, Real):
                raise DomainError("sobolev takes the exponent p as its parameter")
        elif not isinstance(self.params, expected[self.kind]):
            raise DomainError(f"{self.kind} needs {expected[self.kind].__name__}, got {type(self.params).__name__}")

    @property
    def a(self) -> float:
        return float(self.params.a) if self.kind == "ckn" else 1.0

    @property
    def form(self) -> str:
        return "integral" if self.kind == "hardy" else "norm"

    def admissibility(self, tol: Real = DEFAULT_PARAMS_TOL, trigger_tol: Optional[Real] = None) -> AdmissibilityReport:
        if self.kind == "hardy":
            return hardy_hypothesis(self.space, self.params)
        if self.kind == "whs":
            return whs_admissible(self.space, self.params)
        if self.kind == "ckn":
            return check_ckn(self.space, self.params, tol, trigger_tol)
        return sobolev_admissible(self.space, self.params)

    def terms(self) -> Dict[str, Term]:
        if self.kind == "hardy":
            p, alpha = float(self.params.p), float(self.params.alpha)
            return {
                "lhs": Term("lhs", p, alpha * p - p, p),
                "grad": Term("grad", 0.0, alpha * p, p, gradient=True),
            }
        if self.kind == "whs":
            w = self.params
            p, s, alpha = float(w.p), float(w.s), float(w.alpha)
            ps = float(p_star(self.space, w.p, w.s))
            return {
                "lhs": Term("lhs", s, alpha * ps - s, ps),
                "grad": Term("grad", 0.0, alpha * p, p, gradient=True),
            }
        if self.kind == "sobolev":
            p = float(self.params)
            return {
                "lhs": Term("lhs", 0.0, 0.0, float(sobolev_exponent(self.space, self.params))),
                "grad": Term("grad", 0.0, 0.0, p, gradient=True),
            }
        c = self.params
        p, q, r = float(c.p), float(c.q), float(c.r)
        alpha, beta, gamma = float(c.alpha), float(c.beta), float(c.gamma)
        return {
            "lhs": Term("lhs", (alpha - gamma) * r, gamma * r, r),
            "grad": Term("grad", 0.0, alpha * p, p, gradient=True),
            "q": Term("q", (alpha - beta) * q, beta * q, q),
        }


def integrate_term(
    space: GrushinSpace,
    g: WeightedIntegrand,
    tol: float = DEFAULT_TOL,
    cross_check: bool = True,
    seed: int = 0,
    mc_samples: int = DEFAULT_MC_SAMPLES,
    order: int = GAUSS_ORDER,
) -> Tuple[QuadratureResult, Dict[str, QuadratureResult]]:
    """
    Integrate one term. Bi-radial integrands go through the polar route (and,
    with ``cross_check``, the Cartesian route as well); translated fields
    through seeded Monte-Carlo over their support box.
    """
    routes: Dict[str, QuadratureResult] = {}
    if g.bi_radial:
        main = integrate_polar(space, g, tol, order)
        routes["polar"] = main
        if cross_check:
            other = integrate_cartesian(space, g, tol, order)
            routes["cartesian"] = other
            gap = abs(main.value - other.value)
            allowed = max(main.error_estimate + other.error_estimate, 100 * tol * abs(main.value))
            if gap > allowed:
                log.warning("%s: polar %r and cartesian %r differ by %g", g.name, main.value, other.value, gap)
        for res in routes.values():
            if not res.converged:
                raise QuadratureError(f"{g.name}: {res.route} quadrature did not converge to tol={tol}", res)
        return main, routes
    if not hasattr(g.field, "support_box"):
        raise DomainError(f"{g.name}: no integration route for a field that is neither bi-radial nor translated")
    center, half = g.field.support_box()
    main = monte_carlo_full(space, g, center, half, mc_samples, seed)
    routes["monte_carlo"] = main
    return main, routes


def evaluate(
    spec: InequalitySpec,
    u: TrialField,
    tol: float = DEFAULT_TOL,
    force: bool = False,
    params_tol: Real = DEFAULT_PARAMS_TOL,
    cross_check: bool = True,
    seed: int = 0,
    trigger_tol: Optional[Real] = None,
    gauss_order: int = GAUSS_ORDER,
    exclusion: float = DEFAULT_EXCLUSION_RADIUS,
    fd_step: float = DEFAULT_FD_STEP,
) -> InequalityReport:
    """
    Both sides of ``spec`` for the field ``u``; refuses inadmissible tuples unless
    ``force``. The analytic gradient behind the quadrature is compared with finite
    differences at points with |x| >= ``exclusion`` (``gradient_gap`` in the report).
    """
    report = spec.admissibility(params_tol, trigger_tol)
    if not report.verdict:
        if not force:
            raise InadmissibleError(f"{spec.kind} tuple fails {', '.join(report.failing())}", report)
        log.warning("evaluating inadmissible %s tuple (failing: %s)", spec.kind, ", ".join(report.failing()))

    terms = spec.terms()
    a = spec.a
    values: Dict[str, float] = {}
    provenance: Dict[str, QuadratureResult] = {}
    for name, term in terms.items():
        if name == "q" and a == 1.0:
            continue
        main, routes = integrate_term(spec.space, term.integrand(u), tol, cross_check, seed, order=gauss_order)
        values[name] = main.value
        for route, res in routes.items():
            provenance[f"{name}:{route}"] = res

    if spec.form == "norm":
        lhs = values["lhs"] ** (1.0 / terms["lhs"].power)
        grad = values["grad"] ** (1.0 / terms["grad"].power)
        qf = values["q"] ** (1.0 / terms["q"].power) if "q" in values else 1.0
    else:
        lhs, grad, qf = values["lhs"], values["grad"], 1.0
    rhs = grad**a * qf ** (1.0 - a)
    if rhs == 0:
        raise DomainError(f"right-hand side vanishes for {u!r}; the field has no weak gradient")
    ratio = lhs / rhs

    constant = satisfied = None
    if spec.kind == "hardy":
        try:
            constant = float(hardy_constant(spec.space, spec.params))
        except (DomainError, InapplicableConstantError) as e:
            log.warning("no Hardy constant: %s", e)
        if constant is not None:
            if lhs <= constant * rhs * (1 + SATISFIED_SLACK * tol):
                satisfied = True
            elif lhs > constant * rhs * (1 + VIOLATION_MARGIN * tol):
                satisfied = False
    log.info("%s on %s: lhs=%.12g rhs=%.12g ratio=%.12g", spec.kind, u.family, lhs, rhs, ratio)
    return InequalityReport(
        kind=spec.kind,
        form=spec.form,
        lhs=lhs,
        rhs_grad_factor=grad,
        rhs_q_factor=qf,
        a=a,
        rhs=rhs,
        ratio=ratio,
        constant=constant,
        satisfied_at_constant=satisfied,
        integrals=values,
        provenance=provenance,
        gradient_gap=gradient_check(u, seed=seed, exclusion=exclusion, fd_step=fd_step),
    )


def gradient_check(
    u: TrialField,
    n_points: int = GRADIENT_CHECK_POINTS,
    seed: int = 0,
    exclusion: float = DEFAULT_EXCLUSION_RADIUS,
    fd_step: float = DEFAULT_FD_STEP,
) -> Optional[float]:
    """
    Largest gap between the analytic Grushin gradient of ``u`` and its
    finite-difference value over seeded points with |x| >= ``exclusion``,
    relative to the largest analytic component seen. None for fields that are
    not smooth, not bi-radial or carry no analytic gradient.
    """
    if u.smoothness != SMOOTH or not u.bi_radial:
        return None
    space = u.space
    mu = float(space.mu)
    scale = min(u.support_radius, 4.0)
    rng = np.random.default_rng(seed)
    # stencils stay clear of x = 0
    pts = random_points(space, n_points, rng, scale=scale, exclusion=max(exclusion, 10.0 * fd_step))
    worst = peak = 0.0
    for pt in pts:
        parts = u.partials(pt.x[None, :], pt.y[None, :])
        if parts is None:
            return None
        dx, dy = (np.asarray(v, dtype=float).reshape(-1) for v in parts)
        fx, fy = fd_partials(u, pt, fd_step)
        ax = float(np.linalg.norm(pt.x)) ** mu
        analytic = np.concatenate([dx, ax * dy])
        worst = max(worst, float(np.max(np.abs(analytic - np.concatenate([fx, ax * fy])))))
        peak = max(peak, float(np.max(np.abs(analytic))))
    gap = worst / peak if peak > 0 else worst
    if gap > GRADIENT_GAP_WARN:
        log.warning("%s: analytic and finite-difference gradients differ by %.3g (relative)", u.family, gap)
    return gap


def _loglog_fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Least-squares slope and R² of y on x; a constant series is an exact fit with slope 0."""
    if np.ptp(y) <= 1e-12 * max(1.0, float(np.max(np.abs(y)))):
        return 0.0, 1.0
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.rvalue**2)


def _require_ckn(spec: InequalitySpec, what: str) -> CknParams:
    if spec.kind != "ckn":
        raise DomainError(f"{what} runs on CKN tuples, got {spec.kind}")
    return spec.params


def _check_grid(values: Sequence[float], name: str, min_span: float) -> np.ndarray:
    grid = np.asarray(sorted({float(v) for v in values}))
    if grid.size < 3:
        raise DomainError(f"{name} needs at least 3 distinct values, got {list(values)}")
    if np.any(grid <= 0):
        raise DomainError(f"{name} values must be positive")
    if grid[-1] / grid[0] < min_span:
        raise DomainError(f"{name} must span at least a factor {min_span:g}, got {grid[0]:g}..{grid[-1]:g}")
    return grid


def scaling_exponents(spec: InequalitySpec) -> Dict[str, float]:
    """Predicted dilation exponents of the three CKN integrals and of the ratio."""
    c = _require_ckn(spec, "scaling")
    Q = float(spec.space.Q)
    p, q, r, a = float(c.p), float(c.q), float(c.r), float(c.a)
    alpha, beta, gamma = float(c.alpha), float(c.beta), float(c.gamma)
    return {
        "lhs": -gamma * r - Q,
        "grad": -(alpha - 1) * p - Q,
        "q": -beta * q - Q,
        "ratio": (-gamma - Q / r) - (a * (-(alpha - 1) - Q / p) + (1 - a) * (-beta - Q / q)),
    }


def _ratio_series(spec: InequalitySpec, values: Dict[str, np.ndarray]) -> np.ndarray:
    t = spec.terms()
    a = spec.a
    return (
        np.log(values["lhs"]) / t["lhs"].power
        - a * np.log(values["grad"]) / t["grad"].power
        - (1 - a) * np.log(values["q"]) / t["q"].power
    )


def scaling_experiment(
    spec: InequalitySpec,
    u: TrialField,
    lambdas: Sequence[float],
    tol: float = 1e-8,
    fit_tol: float = 1e-3,
    gauss_order: int = GAUSS_ORDER,
) -> ScalingReport:
    """
    The three CKN integrals of u∘δ_λ over a λ grid, their fitted log-log slopes
    and the slope of the CKN ratio, which vanishes exactly under dimensional
    balance.
    """
    _require_ckn(spec, "scaling_experiment")
    grid = _check_grid(lambdas, "lambda grid", MIN_LAMBDA_SPAN)
    predicted = scaling_exponents(spec)
    terms = spec.terms()
    values: Dict[str, List[float]] = {name: [] for name in terms}
    for lam in grid:
        ul = dilate_field(u, lam)
        for name, term in terms.items():
            res, _ = integrate_term(spec.space, term.integrand(ul), tol, cross_check=False, order=gauss_order)
            values[name].append(res.value)
        log.info("scaling lambda=%g: %s", lam, {k: v[-1] for k, v in values.items()})

    x = np.log(grid)
    fits = []
    for name in terms:
        y = np.log(np.asarray(values[name]))
        slope, r2 = _loglog_fit(x, y)
        if r2 < MIN_R_SQUARED:
            raise FitError(f"scaling fit for {name} inconclusive (R^2={r2:.6f})", r2)
        ok = abs(slope - predicted[name]) <= fit_tol
        fits.append(IntegralFit(name, slope, predicted[name], r2, ok, tuple(values[name])))

    arrays = {k: np.asarray(v) for k, v in values.items()}
    ratios = _ratio_series(spec, arrays)
    slope, r2 = _loglog_fit(x, ratios)
    ratio_ok = abs(slope - predicted["ratio"]) <= fit_tol
    ratio_fit = IntegralFit("ratio", slope, predicted["ratio"], r2, ratio_ok, tuple(np.exp(ratios)))

    flags = []
    if abs(slope) <= fit_tol:
        conclusion = "ratio invariant under dilation: dimensional balance holds"
    else:
        direction = "lambda -> 0" if slope < 0 else "lambda -> infinity"
        conclusion = f"ratio grows like lambda^{slope:.6g}: unbounded as {direction}, dimensional balance fails"
        flags.append("unbalanced")
    return ScalingReport(
        experiment="scaling",
        grid_name="lambda",
        grid=tuple(grid),
        fits=tuple(fits),
        ratio_fit=ratio_fit,
        passed=all(f.passed for f in fits) and ratio_ok,
        conclusion=conclusion,
        flags=tuple(flags),
        extra={"balance_residual": float(balance_residual(spec.space, spec.params))},
    )


def translation_experiment(
    spec: InequalitySpec,
    u: TrialField,
    x0: Sequence[float],
    y0: Sequence[float],
    lambdas: Sequence[float],
    tol: float = 0.05,
    n_samples: int = 20_000,
    seed: int = 0,
) -> ScalingReport:
    """
    Growth in λ of the CKN integrals of u(· − δ_λ(x₀, y₀)). The value integrals
    are sampled on the translated support; the gradient integral keeps |∇_μu|
    at the untranslated point and moves only the weight ρ^{αp}. Both use the
    same seeded samples for every λ. The Grushin gradient of the translate
    itself is fitted as a diagnostic.
    """
    c = _require_ckn(spec, "translation_experiment")
    space = spec.space
    if u.support_radius > 1.0 + 1e-12:
        raise DomainError(f"translation needs a field supported in the unit ball, support radius {u.support_radius}")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    grid = _check_grid(lambdas, "lambda grid", MIN_LAMBDA_SPAN)
    norm_x0 = float(np.linalg.norm(x0))
    if norm_x0 == 0:
        raise DomainError("translation needs x0 != 0")
    if grid[0] * norm_x0 <= u.support_radius:
        raise DomainError(
            f"lambda={grid[0]:g} too small: the translated support meets x=0 (need lambda*|x0| > {u.support_radius:g})"
        )

    mu = float(space.mu)
    p, q, r, a = float(c.p), float(c.q), float(c.r), float(c.a)
    alpha, beta, gamma = float(c.alpha), float(c.beta), float(c.gamma)
    terms = spec.terms()
    values: Dict[str, List[float]] = {"lhs": [], "grad": [], "q": [], "grad_transported": []}
    for lam in grid:
        ut = translate_field(u, x0, y0, lam)
        center, half = ut.support_box()
        for name in ("lhs", "q"):
            res = monte_carlo_full(space, terms[name].integrand(ut), center, half, n_samples, seed)
            values[name].append(res.value)
        transported = monte_carlo_full(space, terms["grad"].integrand(ut), center, half, n_samples, seed)
        values["grad_transported"].append(transported.value)

        # frozen gradient: the draws of monte_carlo_full, shifted back to the base support
        rng = np.random.default_rng(seed)
        z = center + half * rng.uniform(-1.0, 1.0, size=(n_samples, space.n))
        xs, ys = z[:, : space.d], z[:, space.d :]
        xb, yb = xs - ut.shift_x, ys - ut.shift_y
        sb, tb = np.linalg.norm(xb, axis=-1), np.linalg.norm(yb, axis=-1)
        grad = u.grad_norm_st(sb, tb)
        rho_shifted = gauge_st(space, np.linalg.norm(xs, axis=-1), np.linalg.norm(ys, axis=-1))
        volume = float(np.prod(2.0 * half))
        values["grad"].append(volume * float(np.mean(rho_shifted ** (alpha * p) * np.abs(grad) ** p)))
        log.info("translation lambda=%g: %s", lam, {k: v[-1] for k, v in values.items()})

    x = np.log(grid)
    predicted = {"lhs": gamma * r, "grad": alpha * p, "q": beta * q, "grad_transported": alpha * p + mu * p}
    fits: List[IntegralFit] = []
    flags: List[str] = []
    slopes: Dict[str, float] = {}
    for name in ("lhs", "grad", "q", "grad_transported"):
        arr = np.asarray(values[name])
        if np.any(arr <= 0):
            raise FitError(f"translation integral {name} vanished; the field is trivial on its support")
        slope, r2 = _loglog_fit(x, np.log(arr))
        slopes[name] = slope
        ok = abs(slope - predicted[name]) <= tol * max(1.0, abs(predicted[name]))
        if r2 < MIN_R_SQUARED:
            flags.append(f"inconclusive_fit:{name}")
        verdict = ok if name != "grad_transported" else None
        fits.append(IntegralFit(name, slope, predicted[name], r2, verdict, tuple(arr)))

    lhs_rate = slopes["lhs"] / r
    rhs_rate = a * slopes["grad"] / p + (1 - a) * slopes["q"] / q
    gap = lhs_rate - rhs_rate
    predicted_gap = gamma - a * alpha - (1 - a) * beta
    gap_fit = IntegralFit("growth_gap", gap, predicted_gap, 1.0, abs(gap - predicted_gap) <= tol)
    if gap > tol:
        conclusion = (
            f"left side grows faster by lambda^{gap:.4g}: gamma > a*alpha+(1-a)*beta contradicts the inequality"
        )
        flags.append("contradiction")
    elif gap < -tol:
        conclusion = "right side grows faster: no contradiction"
    else:
        conclusion = "equal growth rates: experiment is neutral"
    return ScalingReport(
        experiment="translation",
        grid_name="lambda",
        grid=tuple(grid),
        fits=tuple(fits),
        ratio_fit=gap_fit,
        passed=all(f.passed for f in fits if f.passed is not None),
        conclusion=conclusion,
        flags=tuple(flags),
        extra={"x0": x0.tolist(), "y0": y0.tolist(), "n_samples": n_samples, "seed": seed},
    )


def on_log_trigger(spec: InequalitySpec, tol: Real = DEFAULT_PARAMS_TOL) -> bool:
    """Balance plus 1/p+(α−1)/Q = 1/q+β/Q = 1/r+γ/Q (the q-branch only matters for a < 1)."""
    c = _require_ckn(spec, "log_family_experiment")
    Q = float(spec.space.Q)
    target = 1 / float(c.r) + float(c.gamma) / Q
    grad_branch = 1 / float(c.p) + (float(c.alpha) - 1) / Q
    q_branch = 1 / float(c.q) + float(c.beta) / Q
    ok = abs(float(balance_residual(spec.space, c))) <= tol and abs(grad_branch - target) <= tol
    if float(c.a) < 1:
        ok = ok and abs(q_branch - target) <= tol
    return bool(ok)


def _leading_exponent(logs_l: np.ndarray, logs_i: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Local slopes d log I / d log L between consecutive grid points, extrapolated
    linearly in 1/L to 1/L = 0.
    """
    slopes = np.diff(logs_i) / np.diff(logs_l)
    z = np.exp(-(logs_l[:-1] + logs_l[1:]) / 2.0)
    if slopes.size == 1:
        return float(slopes[0]), slopes
    coef = np.polynomial.polynomial.polyfit(z, slopes, 1)
    return float(coef[0]), slopes


def log_family_experiment(
    spec: InequalitySpec,
    eps_list: Sequence[float],
    tol: float = 1e-8,
    params_tol: Real = DEFAULT_PARAMS_TOL,
    fit_tol: float = 0.2,
    gauss_order: int = GAUSS_ORDER,
) -> ScalingReport:
    """
    The CKN integrals of the log profiles u_ε against log(1/ε). On the equality
    trigger they grow like (log 1/ε)^{r+1}, (log 1/ε)^{p+1} and (log 1/ε)^{q+1},
    so the inequality forces 1 + 1/r ≤ a(1 + 1/p) + (1 − a)(1 + 1/q).
    """
    c = _require_ckn(spec, "log_family_experiment")
    if not on_log_trigger(spec, params_tol):
        raise DomainError("tuple is off the equality trigger; use scaling_experiment")
    eps = np.asarray(sorted({float(e) for e in eps_list}, reverse=True))
    if eps.size < 3:
        raise DomainError(f"eps list needs at least 3 distinct values, got {list(eps_list)}")
    if np.any((eps <= 0) | (eps >= 1)):
        raise DomainError("eps values must lie in (0, 1)")
    space = spec.space
    Q = float(space.Q)
    p, q, r, a = float(c.p), float(c.q), float(c.r), float(c.a)
    gamma = float(c.gamma)
    exponent = gamma + Q / r
    flags: List[str] = []
    if math.log10(eps[0] / eps[-1]) < 3:
        flags.append("slow_convergence:narrow_eps_range")

    terms = spec.terms()
    values: Dict[str, List[float]] = {name: [] for name in terms}
    for e in eps:
        u = make_log_family(space, e, gamma, r)
        for name, term in terms.items():
            if term.gradient:
                # |∇_μu| = |f'(ρ)|·(|x|/ρ)^μ
                weight = term.power
                f = lambda rho, t=term, uu=u: rho**t.rho_weight * np.abs(uu.dprofile(rho)) ** t.power
            else:
                weight = term.a_weight
                f = lambda rho, t=term, uu=u: rho**t.rho_weight * np.abs(uu.profile(rho)) ** t.power
            res = radial_integral(space, weight, f, 0.0, 1.0, breakpoints=(e,), tol=tol, order=gauss_order)
            if not res.converged:
                raise QuadratureError(f"log family {name} at eps={e:g} did not converge", res)
            values[name].append(res.value)
        log.info("log family eps=%g: %s", e, {k: v[-1] for k, v in values.items()})

    logs_l = np.log(np.log(1.0 / eps))
    predicted = {"lhs": r + 1.0, "grad": p + 1.0 if exponent != 0 else 1.0, "q": q + 1.0}
    if exponent == 0:
        flags.append("zero_profile_exponent:gradient_grows_like_log")
    fits: List[IntegralFit] = []
    leading: Dict[str, float] = {}
    for name in terms:
        arr = np.asarray(values[name])
        logs_i = np.log(arr)
        lead, local = _leading_exponent(logs_l, logs_i)
        plain, r2 = _loglog_fit(logs_l, logs_i)
        leading[name] = lead
        if local.size >= 2 and abs(local[-1] - local[-2]) > 0.1 * abs(local[-1]):
            flags.append(f"slow_convergence:{name}")
        ok = abs(lead - predicted[name]) <= fit_tol
        fits.append(IntegralFit(name, lead, predicted[name], r2, ok, tuple(arr)))
        log.debug("log family %s: leading %.4f, plain slope %.4f", name, lead, plain)

    growth_lhs = (r + 1) / r
    growth_rhs = a * predicted["grad"] / p + (1 - a) * predicted["q"] / q
    fitted_gap = leading["lhs"] / r - (a * leading["grad"] / p + (1 - a) * leading["q"] / q)
    predicted_gap = growth_lhs - growth_rhs
    ratio_fit = IntegralFit("ratio", fitted_gap, predicted_gap, 1.0, abs(fitted_gap - predicted_gap) <= fit_tol)
    forced = growth_lhs <= growth_rhs
    if forced:
        conclusion = "1+1/r <= a(1+1/p)+(1-a)(1+1/q): the log family stays bounded"
    else:
        conclusion = "1+1/r > a(1+1/p)+(1-a)(1+1/q): the ratio of u_eps is unbounded, the inequality fails"
        flags.append("log_growth_violation")
    return ScalingReport(
        experiment="log_family",
        grid_name="eps",
        grid=tuple(eps),
        fits=tuple(fits),
        ratio_fit=ratio_fit,
        passed=all(f.passed for f in fits),
        conclusion=conclusion,
        flags=tuple(dict.fromkeys(flags)),
        extra={
            "profile_exponent": -exponent,
            "plain_slopes": {name: _loglog_fit(logs_l, np.log(np.asarray(values[name])))[0] for name in terms},
            "forced_condition_holds": forced,
        },
    )


DEFAULT_EPS_SHIFT_GRID = (0.4, 0.2, 0.1, 0.05)


def sharp_search(
    spec: InequalitySpec,
    method: str = "grid",
    eps_shift_grid: Sequence[float] = DEFAULT_EPS_SHIFT_GRID,
    bounds: Tuple[float, float] = (0.02, 0.5),
    max_evals: int = 40,
    tol: float = 1e-8,
    seed: Optional[int] = None,
    gauss_order: int = GAUSS_ORDER,
) -> SearchReport:
    """
    Maximise the Hardy ratio over the near-extremal family: a fixed eps_shift
    grid, a bounded scalar search on eps_shift ("golden") or a Nelder–Mead
    simplex on (eps_shift, r_inner, r_outer) of the compactly cut-off variant.
    """
    if spec.kind != "hardy":
        raise DomainError(f"sharp_search runs on Hardy tuples, got {spec.kind}")
    hp = spec.params
    report = spec.admissibility()
    if not report.verdict:
        raise InadmissibleError(f"hardy tuple fails {', '.join(report.failing())}", report)
    target = float(hardy_constant(spec.space, hp))
    p, alpha = float(hp.p), float(hp.alpha)
    trace: List[Tuple[Tuple[float, ...], float]] = []

    def ratio(eps_shift: float, cutoff: Optional[Tuple[float, float]] = None) -> float:
        u = make_hardy_extremal(spec.space, p, alpha, eps_shift, cutoff)
        rep = evaluate(spec, u, tol, cross_check=False, gauss_order=gauss_order)
        if rep.ratio > target * (1 + SATISFIED_SLACK * tol):
            log.warning("ratio %.12g exceeds the Hardy constant %.12g at eps_shift=%g", rep.ratio, target, eps_shift)
        params = (eps_shift,) if cutoff is None else (eps_shift, *cutoff)
        trace.append((params, rep.ratio))
        log.info("sharp_search %s -> %.10g", params, rep.ratio)
        return rep.ratio

    budget_hit = False
    if method == "grid":
        for e in eps_shift_grid:
            ratio(float(e))
    elif method == "golden":
        lo, hi = bounds
        if not 0 < lo < hi:
            raise DomainError(f"eps_shift bounds must satisfy 0 < lo < hi, got {bounds}")
        res = optimize.minimize_scalar(
            lambda e: -ratio(float(e)), bounds=(lo, hi), method="bounded", options={"maxiter": max_evals, "xatol": 1e-3}
        )
        budget_hit = not res.success
    elif method == "nelder-mead":
        lo, hi = bounds
        start = np.array([(lo + hi) / 2.0, 1.0, 2.0])
        if seed is not None:
            start = start * (1.0 + 0.05 * np.random.default_rng(seed).uniform(-1.0, 1.0, size=3))

        def objective(v: np.ndarray) -> float:
            e, r_in, r_out = (float(t) for t in v)
            if not (lo <= e <= hi and 0 < r_in < r_out):
                return 0.0
            return -ratio(e, (r_in, r_out))

        res = optimize.minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={"maxfev": max_evals, "xatol": 1e-3, "fatol": 1e-6},
        )
        budget_hit = res.status == 1
    else:
        raise DomainError(f"unknown search method {method!r}; use grid, golden or nelder-mead")

    if not trace:
        raise OptimizerBudgetError(f"{method}: no feasible evaluation")
    best_params, best = max(trace, key=lambda item: item[1])
    out = SearchReport(
        method=method,
        best_ratio=best,
        best_parameters=best_params,
        trace=tuple(trace),
        target=target,
        fraction_of_target=best / target,
        seed=seed,
        n_evals=len(trace),
    )
    if budget_hit:
        raise OptimizerBudgetError(f"{method}: budget of {max_evals} evaluations exhausted before stabilising", out)
    return out


def lemma_lambda_check(xi: Sequence[float], eta: Sequence[float], lam: float) -> float:
    """|ξ|^{λ+1} + λ|η|^{λ+1} − (λ+1)|η|^{λ−1}⟨ξ,η⟩, nonnegative and zero iff ξ = η."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if xi.shape != eta.shape:
        raise DomainError(f"xi and eta must have the same shape, got {xi.shape} and {eta.shape}")
    nx, ne = float(np.linalg.norm(xi)), float(np.linalg.norm(eta))
    cross = 0.0 if ne == 0 else (lam + 1) * ne ** (lam - 1) * float(np.dot(xi, eta))
    return nx ** (lam + 1) + lam * ne ** (lam + 1) - cross


def _rowdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", a, b)


def lemma_p_probe(p: float, n_samples: int = 100_000, seed: int = 0, dim: int = 3) -> LemmaReport:
    """
    Seeded sampling of the two p-power vector inequalities. For p > 2 the first
    is checked against p(p−1)/2·(|ξ₁|+|ξ₂|)^{p−2}|ξ₂|²; for p ≤ 2 its constant is
    estimated as the sup over |ξ₂|^p. The second display's ratio is estimated as
    an inf and must stay positive.
    """
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if n_samples < 1:
        raise DomainError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    scale = 10.0 ** rng.uniform(-2.0, 2.0, size=(n_samples, 2))
    xi1 = rng.standard_normal((n_samples, dim)) * scale[:, :1]
    xi2 = rng.standard_normal((n_samples, dim)) * scale[:, 1:]
    n1, n2 = np.linalg.norm(xi1, axis=1), np.linalg.norm(xi2, axis=1)
    keep = (n1 > 1e-8) & (n2 > 1e-8)
    xi1, xi2, n1, n2 = xi1[keep], xi2[keep], n1[keep], n2[keep]

    first = np.linalg.norm(xi1 + xi2, axis=1) ** p - n1**p - p * n1 ** (p - 2) * _rowdot(xi1, xi2)
    diff = np.linalg.norm(xi2 - xi1, axis=1)
    second = n2**p - n1**p - p * n1 ** (p - 2) * _rowdot(xi1, xi2 - xi1)
    scale_terms = np.maximum(n1, n2) ** p
    notes: List[str] = []
    if p > 2:
        bound = p * (p - 1) / 2.0 * (n1 + n2) ** (p - 2) * n2**2
        first_ratio = first / bound
        first_violations = int(np.sum(first > bound + 1e-12 * scale_terms))
        second_ratio = second / diff**p
        notes.append("first display checked against p(p-1)/2 (|xi1|+|xi2|)^(p-2)|xi2|^2")
    else:
        first_ratio = first / n2**p
        first_violations = 0
        second_ratio = second * (n1 + n2) ** (2 - p) / diff**p
        notes.append("first display constant estimated as a sup")
    second_violations = int(np.sum(second < -1e-12 * scale_terms))
    if not (np.all(np.isfinite(first_ratio)) and np.all(np.isfinite(second_ratio))):
        raise DomainError(f"non-finite lemma samples at p={p}")
    return LemmaReport(
        lemma="p_power",
        p=float(p),
        n_samples=int(keep.sum()),
        seed=seed,
        first_sup=float(np.max(first_ratio)),
        first_bound_violations=first_violations,
        second_inf=float(np.min(second_ratio)),
        second_bound_violations=second_violations,
        notes=tuple(notes),
    )


FieldFactory = Callable[[GrushinSpace, float, float], TrialField]


def corpus_hardy_check(
    spaces: Iterable[GrushinSpace],
    ps: Iterable[float],
    alphas: Iterable[float],
    fields: Sequence[FieldFactory],
    tol: float = 1e-6,
) -> List[InequalityReport]:
    """
    Hardy reports for every (space, p, α, field) with an applicable constant;
    ``fields`` build a trial field from (space, p, α).
    """
    reports: List[InequalityReport] = []
    ps, alphas = list(ps), list(alphas)
    for space in spaces:
        for p in ps:
            for alpha in alphas:
                spec = InequalitySpec("hardy", space, HardyParams(p, alpha))
                if not spec.admissibility().verdict:
                    log.debug("skipping %s p=%g alpha=%g: constant inapplicable", space, p, alpha)
                    continue
                for make in fields:
                    reports.append(evaluate(spec, make(space, p, alpha), tol, cross_check=False))
    return reports
