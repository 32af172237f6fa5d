"""
Parameter tuples of the Hardy, weighted Hardy–Sobolev and CKN inequalities,
their admissibility predicates, dimensional balance and explicit constants.

Every function is written against ``numbers.Real`` so that a tuple built from
``fractions.Fraction`` values (and a space whose μ is a Fraction) is checked in
exact arithmetic; tolerances may then be 0.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from numbers import Real
from typing import Literal, Optional

from .errors import DegenerateEquationError, DomainError, InapplicableConstantError
from .geometry import GrushinSpace
from .reports import AdmissibilityReport, Check

log = logging.getLogger(__name__)

DEFAULT_PARAMS_TOL = 1e-9

Region = Literal["near_origin", "near_infinity"]
FreeParameter = Literal["r", "alpha", "beta", "sigma", "a"]


@dataclass(frozen=True)
class CknParams:
    p: Real
    q: Real
    r: Real
    a: Real
    alpha: Real
    beta: Real
    sigma: Real

    @property
    def gamma(self) -> Real:
        return self.a * self.sigma + (1 - self.a) * self.beta


@dataclass(frozen=True)
class WhsParams:
    p: Real
    s: Real
    alpha: Real

    def p_star(self, space: GrushinSpace) -> Real:
        return self.p * (space.Q - self.s) / (space.Q - self.p)


@dataclass(frozen=True)
class HardyParams:
    p: Real
    alpha: Real


@dataclass(frozen=True)
class Integrability:
    integrable: bool
    boundary: bool
    x_margin: Real
    rho_margin: Real

    def __bool__(self) -> bool:
        return self.integrable


@dataclass(frozen=True)
class BalanceSolution:
    name: str
    value: Real
    flagged: bool = False
    note: str = ""


def _exact(*values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def balance_residual(space: GrushinSpace, c: CknParams) -> Real:
    Q = space.Q
    lhs = Fraction(1) / c.r + c.gamma / Q if c.r != 0 else float("inf")
    rhs = c.a * (Fraction(1) / c.p + (c.alpha - 1) / Q) + (1 - c.a) * (Fraction(1) / c.q + c.beta / Q)
    return lhs - rhs


def trigger_residual(space: GrushinSpace, c: CknParams) -> Real:
    """1/p + (α−1)/Q − (1/r + γ/Q); the α−σ ≤ 1 requirement applies where this vanishes."""
    Q = space.Q
    if c.r == 0:
        return float("inf")
    return Fraction(1) / c.p + (c.alpha - 1) / Q - (Fraction(1) / c.r + c.gamma / Q)


def _positive(name: str, value: Real) -> Check:
    return Check(name, value, bool(value > 0))


def check_ckn(
    space: GrushinSpace,
    params: CknParams,
    tol: Real = DEFAULT_PARAMS_TOL,
    trigger_tol: Optional[Real] = None,
) -> AdmissibilityReport:
    """
    Evaluate every condition of the CKN theorem and return all residuals.

    ``trigger_tol`` decides when the equality 1/p+(α−1)/Q = 1/r+γ/Q counts as
    holding. It defaults to the params tolerance and is kept independent of
    ``tol`` so that the verdict is monotone in ``tol``.
    """
    if trigger_tol is None:
        trigger_tol = DEFAULT_PARAMS_TOL
    c = params
    Q, d, mu = space.Q, space.d, space.mu
    g = c.gamma
    checks = [
        Check("1<p<Q", min(c.p - 1, Q - c.p), bool(1 < c.p < Q)),
        Check("q>=1", c.q - 1, bool(c.q >= 1)),
        _positive("r>0", c.r),
        Check("0<=a<=1", min(c.a, 1 - c.a), bool(0 <= c.a <= 1)),
        _positive("d+mu(alpha-gamma)r>0", d + mu * (c.alpha - g) * c.r),
        _positive("d+mu(alpha-beta)q>0", d + mu * (c.alpha - c.beta) * c.q),
        _positive("alpha*p+Q>0", c.alpha * c.p + Q),
        _positive("beta*q+Q>0", c.beta * c.q + Q),
        _positive("gamma*r+Q>0", g * c.r + Q),
    ]
    bal = balance_residual(space, c) if c.r != 0 else float("inf")
    checks.append(Check("dimensional_balance", bal, bool(abs(bal) <= tol)))

    idx = c.alpha - c.sigma
    if c.a > 0:
        checks.append(Check("0<=alpha-sigma", idx, bool(idx >= 0)))
    else:
        checks.append(Check("0<=alpha-sigma", idx, True, note="not required: a=0"))

    trig = trigger_residual(space, c)
    if c.a > 0 and abs(trig) <= trigger_tol:
        checks.append(Check("alpha-sigma<=1", 1 - idx, bool(idx <= 1 + tol), note="equality trigger holds"))
    else:
        why = "not required: a=0" if not c.a > 0 else "not required: equality trigger off"
        checks.append(Check("alpha-sigma<=1", 1 - idx, True, note=why))

    notes = []
    if c.a == 1:
        notes.append("a=1: q and beta enter only through the predicates; the q-factor has exponent 0")
    verdict = all(ch.passed for ch in checks)
    log.debug("check_ckn %s %s -> %s", space, params, verdict)
    return AdmissibilityReport(verdict=verdict, checks=tuple(checks), balance_residual=bal, notes=tuple(notes))


def solve_balance(space: GrushinSpace, params: CknParams, free: FreeParameter) -> BalanceSolution:
    """
    Solve dimensional balance for one free parameter, the others fixed.

    The balance residual is affine in α, β, σ, a and in 1/r, so two evaluations
    determine the line; a zero slope is a degenerate equation (β always is: it
    cancels between γ/Q and the q-factor).
    """
    if free not in ("r", "alpha", "beta", "sigma", "a"):
        raise DomainError(f"unknown free parameter {free!r}")
    exact = _exact(space.mu, *(getattr(params, f) for f in ("p", "q", "a", "alpha", "beta", "sigma")))
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0

    if free == "r":
        # residual(r) = 1/r + const
        const = balance_residual(space, replace(params, r=one)) - one
        if const == 0:
            raise DegenerateEquationError("balance forces 1/r = 0")
        value = -1 / const
        flagged = bool(value <= 0)
        if flagged:
            log.warning("solve_balance: r = %s is not positive", value)
        return BalanceSolution("r", value, flagged, "r <= 0" if flagged else "")

    r0 = balance_residual(space, replace(params, **{free: zero}))
    r1 = balance_residual(space, replace(params, **{free: one}))
    slope = r1 - r0
    if (exact and slope == 0) or (not exact and abs(slope) <= 1e-15):
        raise DegenerateEquationError(f"balance does not depend on {free} for this tuple")
    value = -r0 / slope
    return BalanceSolution(free, value)


def hardy_hypothesis(space: GrushinSpace, hp: HardyParams) -> AdmissibilityReport:
    Q = space.Q
    margin = Fraction(1) / hp.p + hp.alpha / Q if _exact(hp.p, hp.alpha, space.mu) else 1 / hp.p + hp.alpha / Q
    checks = (
        Check("p>1", hp.p - 1, bool(hp.p > 1)),
        Check("1/p+alpha/Q>0", margin, bool(margin > 0)),
        Check("Q-p+alpha*p>0", Q - hp.p + hp.alpha * hp.p, bool(Q - hp.p + hp.alpha * hp.p > 0),
              note="needed by the explicit constant"),
    )
    return AdmissibilityReport(verdict=all(c.passed for c in checks), checks=checks)


def hardy_constant(space: GrushinSpace, hp: HardyParams) -> Real:
    if not hp.p > 1:
        raise DomainError(f"Hardy constant needs p > 1, got p={hp.p}")
    denom = space.Q - hp.p + hp.alpha * hp.p
    if not denom > 0:
        raise InapplicableConstantError(
            f"constant formula inapplicable: Q-p+alpha*p = {denom} <= 0 (Q={space.Q}, p={hp.p}, alpha={hp.alpha})"
        )
    return (hp.p / denom) ** hp.p


def p_star(space: GrushinSpace, p: Real, s: Real) -> Real:
    Q = space.Q
    if not 1 < p < Q:
        raise DomainError(f"p_star needs 1 < p < Q, got p={p}, Q={Q}")
    if not 0 <= s <= p:
        raise DomainError(f"p_star needs 0 <= s <= p, got s={s}")
    return p * (Q - s) / (Q - p)


def sobolev_exponent(space: GrushinSpace, p: Real) -> Real:
    return p_star(space, p, 0)


def whs_admissible(space: GrushinSpace, whs: WhsParams) -> AdmissibilityReport:
    Q = space.Q
    checks = (
        Check("1<p<Q", min(whs.p - 1, Q - whs.p), bool(1 < whs.p < Q)),
        Check("0<=s<=p", min(whs.s, whs.p - whs.s), bool(0 <= whs.s <= whs.p)),
        Check("alpha>(p-Q)/p", whs.alpha - (whs.p - Q) / whs.p, bool(whs.alpha > (whs.p - Q) / whs.p)),
    )
    return AdmissibilityReport(verdict=all(c.passed for c in checks), checks=checks)


def sobolev_admissible(space: GrushinSpace, p: Real) -> AdmissibilityReport:
    Q = space.Q
    checks = (Check("1<p<Q", min(p - 1, Q - p), bool(1 < p < Q)),)
    return AdmissibilityReport(verdict=checks[0].passed, checks=checks)


def integrable(space: GrushinSpace, x_exp: Real, rho_exp: Real, region: Region) -> Integrability:
    """
    Integrability of |x|^{x_exp} ρ^{rho_exp} near the origin (on B_2) or near
    infinity (off B_1). Boundary cases, where either criterion expression is
    exactly 0, are non-integrable and flagged.
    """
    x_margin = x_exp + space.d
    rho_margin = x_exp + rho_exp + space.Q
    if region == "near_origin":
        ok = x_margin > 0 and rho_margin > 0
    elif region == "near_infinity":
        ok = x_margin > 0 and rho_margin < 0
    else:
        raise DomainError(f"unknown region {region!r}")
    boundary = x_margin == 0 or rho_margin == 0
    return Integrability(bool(ok), bool(boundary), x_margin, rho_margin)


def remark_reduction(space: GrushinSpace, whs: WhsParams) -> CknParams:
    """
    The a=1 CKN tuple equivalent to a weighted Hardy–Sobolev tuple: with
    t = s/p, r = p(Q−tp)/(Q−p) and (α−σ)r = tp, β = σ and q = 1 (inert at a=1).
    """
    Q, p = space.Q, whs.p
    if not 1 < p < Q:
        raise DomainError(f"reduction needs 1 < p < Q, got p={p}")
    t = whs.s / p
    if not 0 <= t <= 1:
        raise DomainError(f"reduction needs t = s/p in [0, 1], got t={t}")
    r = p * (Q - t * p) / (Q - p)
    sigma = whs.alpha - t * p / r
    one = Fraction(1) if _exact(p, whs.s, whs.alpha, space.mu) else 1.0
    return CknParams(p=p, q=one, r=r, a=one, alpha=whs.alpha, beta=sigma, sigma=sigma)


def hardy_sobolev_constant_bound(space: GrushinSpace, p: Real, s: Real, c_sobolev: Real) -> Real:
    """(p/(Q−p))^s · C^{(1−s/p)p*}: the interpolated Hardy–Sobolev constant from a Sobolev constant C."""
    Q = space.Q
    ps = sobolev_exponent(space, p)
    return (p / (Q - p)) ** s * c_sobolev ** ((1 - s / p) * ps)
