"""
Integration of weighted bi-radial integrands over R^{d+k}.

An integrand is (|x|^μ/ρ^μ)^{a}·ρ^{b}·|F|^{power} where F is a trial field or
its Grushin-gradient norm. Bi-radial integrands reduce to two dimensions:

  cartesian  ∫ f dxdy = ω_{d−1}ω_{k−1} ∬ f(s, t) s^{d−1} t^{k−1} ds dt
  polar      s = ρ(sinθ)^{1/(1+μ)},  (1+μ)t = ρ^{1+μ}cosθ,  θ ∈ [0, π/2],
             dxdy = ω_{d−1}ω_{k−1}(1+μ)^{−k}(sinθ)^{d/(1+μ)−1}(cosθ)^{k−1} ρ^{Q−1} dρ dθ

Both routes cut the ρ-range into shells at the field's breakpoints, refine
dyadically toward the origin and use a composite Gauss–Legendre rule graded
geometrically toward both ends of every interval. The polar route integrates
the angle in σ = |x|/ρ = (sinθ)^{1/(1+μ)} with a Gauss–Jacobi rule whose weight
carries the endpoint powers of σ and 1 − σ. Each shell is refined until
two successive rules agree; unbounded ranges continue with factor-e shells and
a geometric tail extrapolation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache, partial
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from .errors import DivergentIntegralError, DomainError, FitError
from .fields import TrialField
from .geometry import GrushinSpace, gauge_st
from .params import Region, integrable
from .reports import DivergenceReport, QuadratureResult

log = logging.getLogger(__name__)

GAUSS_ORDER = 15
DEFAULT_TOL = 1e-8
MAX_PASSES = 6
MAX_TAIL_SHELLS = 400


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / special.gamma(n / 2.0)


def angular_mass(space: GrushinSpace, a_weight: float = 0.0) -> float:
    """
    ∫ over {ρ = 1} of (|x|/ρ)^{μ·a_weight} against the polar density:
    ω_{d−1}ω_{k−1}(1+μ)^{−k}·½B((d+μa)/(2+2μ), k/2).
    """
    d, k, mu = space.d, space.k, float(space.mu)
    first = (d + mu * a_weight) / (2.0 * (1.0 + mu))
    if first <= 0:
        raise DivergentIntegralError(f"angular weight (|x|/rho)^(mu*{a_weight}) is not integrable near x=0")
    return sphere_area(d) * sphere_area(k) * (1.0 + mu) ** (-k) * 0.5 * special.beta(first, k / 2.0)


def ball_volume(space: GrushinSpace, radius: float) -> float:
    Q = float(space.Q)
    return angular_mass(space) * radius**Q / Q


@lru_cache(maxsize=None)
def _gauss(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return (nodes + 1.0) / 2.0, weights / 2.0


@lru_cache(maxsize=None)
def graded_rule(levels: int, n_mid: int, order: int = GAUSS_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composite Gauss–Legendre rule on [0, 1], panels shrinking geometrically
    (ratio 1/2, ``levels`` panels) toward both endpoints, ``n_mid`` uniform
    panels in [1/4, 3/4].
    """
    left = [0.0] + [0.25 * 2.0 ** (-j) for j in range(levels, -1, -1)]
    mid = list(np.linspace(0.25, 0.75, n_mid + 1)[1:-1])
    right = [1.0 - e for e in reversed(left)]
    edges = np.array(left + mid + right)
    x, w = _gauss(order)
    lo, hi = edges[:-1], edges[1:]
    h = hi - lo
    nodes = (lo[:, None] + h[:, None] * x[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights


def _pass_rule(i: int, order: int = GAUSS_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    return graded_rule(4 + 4 * i, 2 * 2**i, order)


@dataclass(frozen=True)
class WeightedIntegrand:
    """(|x|^μ/ρ^μ)^{a_weight} ρ^{rho_weight} |F|^{power}, F = u or |∇_μu|; field None means F ≡ 1."""

    a_weight: float = 0.0
    rho_weight: float = 0.0
    field: Optional[TrialField] = None
    power: float = 0.0
    gradient: bool = False
    rho_range: Tuple[float, float] = (0.0, math.inf)
    name: str = ""

    @classmethod
    def monomial(
        cls, space: GrushinSpace, x_exp: float, rho_exp: float, rho_range=(0.0, math.inf)
    ) -> "WeightedIntegrand":
        """|x|^{x_exp} ρ^{rho_exp} rewritten as (|x|/ρ)^{x_exp}ρ^{x_exp+rho_exp}."""
        mu = float(space.mu)
        return cls(a_weight=x_exp / mu, rho_weight=x_exp + rho_exp, rho_range=tuple(rho_range),
                   name=f"|x|^{x_exp} rho^{rho_exp}")

    @property
    def bi_radial(self) -> bool:
        return self.field is None or self.field.bi_radial

    def domain(self) -> Tuple[float, float]:
        lo, hi = self.rho_range
        if self.field is not None:
            hi = min(hi, self.field.support_radius)
        return float(lo), float(hi)

    def radii(self) -> List[float]:
        lo, hi = self.domain()
        inner = [] if self.field is None else [b for b in self.field.breakpoints if lo < b < hi]
        out = [lo] + inner + ([hi] if math.isfinite(hi) else [])
        return sorted(set(out))

    def _field_factor(self, values: np.ndarray) -> np.ndarray:
        a = np.abs(values)
        if self.power == 0:
            return np.ones_like(a)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.where(a == 0, 0.0, a**self.power)

    def evaluate_st(self, space: GrushinSpace, s, t, rho=None) -> np.ndarray:
        mu = float(space.mu)
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        if rho is None:
            rho = gauge_st(space, s, t)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            w = (s / rho) ** (mu * self.a_weight) * rho**self.rho_weight
            if self.field is not None:
                f = self.field.grad_norm_st(s, t, rho) if self.gradient else self.field.value_st(s, t, rho)
                w = w * self._field_factor(f)
        lo, hi = self.rho_range
        inside = (rho >= lo) & (rho <= hi)
        return np.where(inside, w, 0.0)

    def evaluate_xy(self, space: GrushinSpace, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Pointwise evaluation in R^{d+k}; works for fields that are not bi-radial."""
        mu = float(space.mu)
        s = np.linalg.norm(x, axis=-1)
        rho = gauge_st(space, s, np.linalg.norm(y, axis=-1))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            w = (s / rho) ** (mu * self.a_weight) * rho**self.rho_weight
            if self.field is not None:
                if self.gradient:
                    parts = self.field.partials(x, y)
                    if parts is None:
                        raise DomainError(f"{self.field.family} supplies no gradient for pointwise evaluation")
                    dx, dy = parts
                    f = np.sqrt(np.sum(dx**2, axis=-1) + s ** (2 * mu) * np.sum(dy**2, axis=-1))
                else:
                    f = self.field.evaluate(x, y)
                w = w * self._field_factor(f)
        lo, hi = self.rho_range
        return np.where((rho >= lo) & (rho <= hi), w, 0.0)

    def exponents(self, space: GrushinSpace, region: Region) -> Optional[Tuple[float, float]]:
        """
        Leading (x-exponent, ρ-exponent) of the integrand in ``region``, or None
        when the field contributes nothing there (gradient of a plateau).
        """
        mu = float(space.mu)
        x_exp = mu * self.a_weight
        rho_exp = self.rho_weight - mu * self.a_weight
        if self.field is None or self.power == 0:
            return x_exp, rho_exp
        u = self.field
        if region == "near_origin":
            order = u.origin_order
        else:
            if math.isfinite(u.support_radius):
                return None
            order = u.infinity_order if u.infinity_order is not None else 0.0
        if self.gradient:
            if not u.rho_radial or order == 0:
                return x_exp, rho_exp
            return x_exp + mu * self.power, rho_exp + self.power * (order - 1.0 - mu)
        return x_exp, rho_exp + self.power * order


def check_integrability(space: GrushinSpace, g: WeightedIntegrand) -> None:
    """Raise DivergentIntegralError when the exponent criteria rule the integral out."""
    lo, hi = g.domain()
    x_exp = float(space.mu) * g.a_weight
    if g.field is not None and g.gradient and g.field.rho_radial and g.field.origin_order != 0:
        x_exp += float(space.mu) * g.power
    if not x_exp + space.d > 0:
        raise DivergentIntegralError(f"{g.name or 'integrand'}: |x|-exponent {x_exp} <= -d, divergent along x=0", "x")
    checks = []
    if lo == 0:
        checks.append("near_origin")
    if math.isinf(hi):
        checks.append("near_infinity")
    for region in checks:
        ex = g.exponents(space, region)
        if ex is None:
            continue
        verdict = integrable(space, ex[0], ex[1], region)
        if not verdict:
            raise DivergentIntegralError(
                f"{g.name or 'integrand'} diverges {region} (x-exp {ex[0]:g}, rho-exp {ex[1]:g}, "
                f"boundary={verdict.boundary})",
                region,
            )


ShellFn = Callable[[GrushinSpace, WeightedIntegrand, float, float, int], Tuple[float, int]]


@lru_cache(maxsize=None)
def _jacobi(n: int, alpha: float, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    return special.roots_jacobi(n, alpha, beta)


def _angular_order(i: int) -> int:
    return 8 * 2**i


def absorbed_power(space: GrushinSpace, g: WeightedIntegrand) -> float:
    """
    Leading power of σ = |x|/ρ in the integrand at σ → 0: the x-weight plus,
    for gradients, the σ^μ of a ρ-radial field (σ^{min(1, μ)} otherwise).
    """
    mu = float(space.mu)
    c = mu * g.a_weight
    if g.field is not None and g.gradient and g.power != 0:
        c += (mu if g.field.rho_radial else min(1.0, mu)) * g.power
    return c


def _polar_shell(
    space: GrushinSpace, g: WeightedIntegrand, a: float, b: float, i: int, order: int = GAUSS_ORDER
) -> Tuple[float, int]:
    # in σ the angular density is (1+μ)σ^{d−1}(1−σ^{2+2μ})^{(k−2)/2}; the endpoint
    # powers σ^{d−1+c} and (1−σ)^{(k−2)/2} go into the Gauss–Jacobi weight
    mu = float(space.mu)
    d, k, Q = space.d, space.k, float(space.Q)
    xr, wr = _pass_rule(i, order)
    rho = a + (b - a) * xr
    wrho = (b - a) * wr
    c = absorbed_power(space, g)
    alpha, beta = 0.5 * (k - 2), d - 1.0 + c
    xs, ws = _jacobi(_angular_order(i), alpha, beta)
    sigma = 0.5 * (1.0 + xs)
    gap = 0.5 * (1.0 - xs)
    h = -np.expm1((2.0 + 2.0 * mu) * np.log(sigma)) / gap  # (1 − σ^{2+2μ}) / (1 − σ)
    R, S = np.meshgrid(rho, sigma, indexing="ij")
    s = R * S
    t = R ** (1.0 + mu) * np.sqrt(gap * h) / (1.0 + mu)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = g.evaluate_st(space, s, t, R) / S**c
    ang = (1.0 + mu) ** (1 - k) * 2.0 ** (-(alpha + beta + 1.0)) * ws * h**alpha
    measure = (wrho * rho ** (Q - 1.0))[:, None] * ang[None, :]
    total = sphere_area(d) * sphere_area(k) * float(np.sum(np.where(measure != 0, vals * measure, 0.0)))
    return total, vals.size


def _s_bound(space: GrushinSpace, radius: float, t: np.ndarray) -> np.ndarray:
    mu = float(space.mu)
    inner = radius ** (2 + 2 * mu) - (1 + mu) ** 2 * t**2
    return np.maximum(inner, 0.0) ** (1.0 / (2 + 2 * mu))


def _cartesian_shell(
    space: GrushinSpace, g: WeightedIntegrand, a: float, b: float, i: int, order: int = GAUSS_ORDER
) -> Tuple[float, int]:
    mu = float(space.mu)
    d, k = space.d, space.k
    xo, wo = _pass_rule(i, order)
    xi, wi = _pass_rule(i, order)
    t_a = a ** (1 + mu) / (1 + mu)
    t_b = b ** (1 + mu) / (1 + mu)
    pieces = [(0.0, t_a), (t_a, t_b)] if a > 0 else [(0.0, t_b)]
    # a fractional s-power at s = 0 goes into a Gauss–Jacobi weight
    c = absorbed_power(space, g)
    beta = d - 1.0 + c
    fractional = not float(beta).is_integer()
    if fractional:
        xj, wj = _jacobi(2 * _angular_order(i), 0.0, beta)
    total = 0.0
    count = 0
    for t0, t1 in pieces:
        t = t0 + (t1 - t0) * xo
        wt = (t1 - t0) * wo
        from_zero = a == 0 or t0 >= t_a
        s_lo = _s_bound(space, a, t) if a > 0 else np.zeros_like(t)
        s_hi = _s_bound(space, b, t)
        if fractional and from_zero:
            half = 0.5 * s_hi
            s = half[:, None] * (1.0 + xj)[None, :]
            ws = half[:, None] ** (beta + 1.0) * wj[None, :]
            T = np.broadcast_to(t[:, None], s.shape)
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = g.evaluate_st(space, s, T) / s**c
                meas = ws * T ** (k - 1)
            total += float(np.sum(wt[:, None] * np.where(ws > 0, vals * meas, 0.0)))
            count += vals.size
            continue
        length = np.maximum(s_hi - s_lo, 0.0)
        s = s_lo[:, None] + length[:, None] * xi[None, :]
        ws = length[:, None] * wi[None, :]
        T = np.broadcast_to(t[:, None], s.shape)
        vals = g.evaluate_st(space, s, T)
        with np.errstate(invalid="ignore"):
            meas = ws * s ** (d - 1) * T ** (k - 1)
        total += float(np.sum(wt[:, None] * np.where(ws > 0, vals * meas, 0.0)))
        count += vals.size
    return sphere_area(d) * sphere_area(k) * total, count


def _refine_shell(space, g, a, b, tol, shell: ShellFn) -> Tuple[float, float, int, bool]:
    prev, n = shell(space, g, a, b, 0)
    total_evals = n
    for i in range(1, MAX_PASSES):
        cur, n = shell(space, g, a, b, i)
        total_evals += n
        err = abs(cur - prev)
        if err <= tol * abs(cur) or err == 0.0:
            return cur, err, total_evals, True
        prev = cur
    log.debug("shell [%g, %g] not converged: value %g, change %g", a, b, cur, err)
    return cur, err, total_evals, False


def _finite_shells(radii: Sequence[float]) -> List[Tuple[float, float]]:
    """Consecutive radii split further so that no shell spans more than a factor 2."""
    shells: List[Tuple[float, float]] = []
    for a, b in zip(radii[:-1], radii[1:]):
        edges = [a]
        while edges[-1] * 2.0 < b:
            edges.append(edges[-1] * 2.0)
        edges.append(b)
        shells.extend(zip(edges[:-1], edges[1:]))
    return shells


@dataclass
class _Sum:
    value: float = 0.0
    err: float = 0.0
    evals: int = 0
    converged: bool = True

    def add(self, v: float, e: float, n: int, ok: bool) -> None:
        self.value += v
        self.err += e
        self.evals += n
        self.converged &= ok


def _shell_series(
    space, g, start: float, factor: float, tol: float, shell: ShellFn, acc: _Sum, region: Region, label: str
) -> None:
    """
    Shells [start·factor^j, start·factor^{j+1}] (factor < 1 walks toward the
    origin) until the shell masses decay geometrically; the remainder is summed
    as a geometric series.
    """
    previous: Optional[float] = None
    ratios: List[float] = []
    for j in range(MAX_TAIL_SHELLS):
        a, b = sorted((start * factor**j, start * factor ** (j + 1)))
        v, e, n, ok = _refine_shell(space, g, a, b, tol, shell)
        acc.add(v, e, n, ok)
        if previous is not None and previous != 0:
            ratios.append(v / previous)
        if v == 0.0 and previous == 0.0:
            return
        previous = v
        if len(ratios) < 3:
            continue
        q, q_prev = ratios[-1], ratios[-2]
        if 0 <= q < 1:
            rest = v * q / (1 - q)
            drift = abs(q - q_prev) / (1 - q) ** 2 * abs(v)
            if abs(rest) <= 0.5 * tol * abs(acc.value) or drift <= 0.5 * tol * abs(acc.value):
                acc.add(rest, drift, 0, True)
                log.debug("%s: %s remainder from rho=%g summed with ratio %g", label, region, a if factor < 1 else b, q)
                return
        elif j >= 10 and min(ratios[-5:]) >= 1:
            raise DivergentIntegralError(f"{label}: shell masses do not decay {region}", region)
    log.warning("%s: %s series not settled after %d shells", label, region, MAX_TAIL_SHELLS)
    acc.converged = False


def _integrate_range(
    space, g, radii: List[float], hi: float, tol: float, shell: ShellFn, route: str, label: str
) -> QuadratureResult:
    acc = _Sum()
    positive = [r for r in radii if r > 0]
    if not positive:
        positive = [1.0]
    for a, b in _finite_shells(positive):
        acc.add(*_refine_shell(space, g, a, b, tol, shell))
    if radii[0] == 0:
        _shell_series(space, g, positive[0], 0.5, tol, shell, acc, "near_origin", label)
    if math.isinf(hi):
        _shell_series(space, g, positive[-1], math.e, tol, shell, acc, "near_infinity", label)
    converged = acc.converged and not (acc.value != 0 and acc.err > tol * abs(acc.value))
    return QuadratureResult(
        value=acc.value, error_estimate=acc.err, n_evals=acc.evals, converged=bool(converged), route=route, tol=tol
    )


def _integrate(space: GrushinSpace, g: WeightedIntegrand, tol: float, shell: ShellFn, route: str) -> QuadratureResult:
    if not tol > 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    if not g.bi_radial:
        raise DomainError(f"{route} route needs a bi-radial integrand; use monte_carlo_full")
    check_integrability(space, g)
    lo, hi = g.domain()
    if not hi > lo:
        return QuadratureResult(0.0, 0.0, 0, True, route, tol)
    result = _integrate_range(space, g, g.radii(), hi, tol, shell, route, g.name or "integrand")
    log.debug("%s %s: %r", route, g.name, result)
    return result


def integrate_cartesian(
    space: GrushinSpace, g: WeightedIntegrand, tol: float = DEFAULT_TOL, order: int = GAUSS_ORDER
) -> QuadratureResult:
    return _integrate(space, g, tol, partial(_cartesian_shell, order=order), "cartesian")


def integrate_polar(
    space: GrushinSpace, g: WeightedIntegrand, tol: float = DEFAULT_TOL, order: int = GAUSS_ORDER
) -> QuadratureResult:
    return _integrate(space, g, tol, partial(_polar_shell, order=order), "polar")


def radial_integral(
    space: GrushinSpace,
    a_weight: float,
    f: Callable[[np.ndarray], np.ndarray],
    rho_lo: float,
    rho_hi: float,
    breakpoints: Sequence[float] = (),
    tol: float = DEFAULT_TOL,
    order: int = GAUSS_ORDER,
) -> QuadratureResult:
    """
    A(a_weight)·∫ f(ρ) ρ^{Q−1} dρ, the one-dimensional path for integrands
    (|x|/ρ)^{μa}·f(ρ). The caller is responsible for integrability.
    """
    if not rho_hi > rho_lo >= 0:
        raise DomainError(f"need 0 <= rho_lo < rho_hi, got [{rho_lo}, {rho_hi}]")
    Q = float(space.Q)
    mass = angular_mass(space, a_weight)

    def shell(space_, g_, a, b, i):
        x, w = _pass_rule(i, order)
        r = a + (b - a) * x
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vals = np.asarray(f(r), dtype=float) * r ** (Q - 1.0)
        return float(np.sum((b - a) * w * vals)), r.size

    inner = [b for b in breakpoints if rho_lo < b < rho_hi]
    radii = sorted({rho_lo, *inner, *([rho_hi] if math.isfinite(rho_hi) else [])})
    res = _integrate_range(space, None, radii, rho_hi, tol, shell, "radial", "radial integrand")
    return replace(res, value=mass * res.value, error_estimate=mass * res.error_estimate)


def monte_carlo_oracle(
    space: GrushinSpace,
    g: WeightedIntegrand,
    bounding_box: Tuple[Tuple[float, float], Tuple[float, float]],
    n: int,
    seed: int,
) -> QuadratureResult:
    """Plain seeded Monte-Carlo over a box in (s, t); error estimate is the standard error."""
    if n < 1:
        raise DomainError(f"need at least one sample, got n={n}")
    (s0, s1), (t0, t1) = bounding_box
    rng = np.random.default_rng(seed)
    s = rng.uniform(s0, s1, size=n)
    t = rng.uniform(t0, t1, size=n)
    vals = g.evaluate_st(space, s, t) * s ** (space.d - 1) * t ** (space.k - 1)
    if not np.all(np.isfinite(vals)):
        raise DomainError("non-finite Monte-Carlo sample")
    area = (s1 - s0) * (t1 - t0) * sphere_area(space.d) * sphere_area(space.k)
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return QuadratureResult(area * mean, area * se, n, True, f"monte_carlo(seed={seed})", 0.0)


def monte_carlo_full(
    space: GrushinSpace,
    g: WeightedIntegrand,
    center: np.ndarray,
    half_width: np.ndarray,
    n: int,
    seed: int,
) -> QuadratureResult:
    """Seeded Monte-Carlo in R^{d+k} over an axis-aligned box; for integrands that are not bi-radial."""
    if n < 2:
        raise DomainError(f"need at least two samples, got n={n}")
    rng = np.random.default_rng(seed)
    center = np.asarray(center, dtype=float)
    half_width = np.asarray(half_width, dtype=float)
    z = center + half_width * rng.uniform(-1.0, 1.0, size=(n, space.n))
    vals = g.evaluate_xy(space, z[:, : space.d], z[:, space.d :])
    if not np.all(np.isfinite(vals)):
        raise DomainError("non-finite Monte-Carlo sample")
    volume = float(np.prod(2.0 * half_width))
    return QuadratureResult(
        volume * float(np.mean(vals)),
        volume * float(np.std(vals, ddof=1)) / math.sqrt(n),
        n,
        True,
        f"monte_carlo_full(seed={seed})",
        0.0,
    )


def divergence_probe(
    space: GrushinSpace,
    g: WeightedIntegrand,
    region: Region,
    n_annuli: int = 12,
    base_radius: float = 1.0,
    tol: float = 1e-10,
    min_r_squared: float = 0.999,
    margin: float = 0.05,
) -> DivergenceReport:
    """
    Dyadic annulus masses m_j near the origin (ρ ∈ [2^{−j−1}, 2^{−j}]·R) or near
    infinity (ρ ∈ [2^j, 2^{j+1}]·R) and the log-log slope of m_j against the
    annulus radius. The integral converges iff the slope is positive (origin) or
    negative (infinity); for |x|^{x}ρ^{q} the slope is x + q + Q.
    """
    if region not in ("near_origin", "near_infinity"):
        raise DomainError(f"unknown region {region!r}")
    radii, masses = [], []
    for j in range(n_annuli):
        if region == "near_origin":
            lo, hi = base_radius * 2.0 ** (-j - 1), base_radius * 2.0 ** (-j)
        else:
            lo, hi = base_radius * 2.0**j, base_radius * 2.0 ** (j + 1)
        res = integrate_polar(space, replace(g, rho_range=(lo, hi)), tol)
        radii.append(hi)
        masses.append(res.value)
    m = np.asarray(masses)
    if np.any(m <= 0):
        raise FitError("annulus masses must be positive for a log-log fit")
    fit = stats.linregress(np.log(radii), np.log(m))
    r2 = float(fit.rvalue**2)
    slope = float(fit.slope)
    ex = g.exponents(space, region)
    predicted = None if ex is None else ex[0] + ex[1] + float(space.Q)
    if r2 < min_r_squared and np.ptp(np.log(m)) > 1e-6:
        raise FitError(f"divergence fit inconclusive (R^2={r2:.4f})", r2)
    if abs(slope) < 1e-9:
        r2 = 1.0
    convergent = slope > margin if region == "near_origin" else slope < -margin
    log.info("divergence probe %s: slope %.6f (predicted %s), convergent=%s", region, slope, predicted, convergent)
    return DivergenceReport(region, slope, predicted, r2, bool(convergent), tuple(radii), tuple(masses))
