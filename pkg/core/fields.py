"""
Trial-function families.

A field is evaluated pointwise on arrays ``x`` (..., d), ``y`` (..., k). Bi-radial
fields also expose ``value_st`` / ``grad_norm_st`` as functions of
(s, t) = (|x|, |y|) (and of ρ, passed in to avoid recomputing it), which is all
the quadrature routes need. ρ-radial fields are built from a profile f(ρ) and
its derivative: ∇_μ f(ρ) = f'(ρ)∇_μρ, so |∇_μ u| = |f'(ρ)|·|x|^μ/ρ^μ.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, InapplicableConstantError
from .geometry import GrushinSpace, gauge, gauge_st, rho_partials
from .params import HardyParams, hardy_constant, integrable

log = logging.getLogger(__name__)

SMOOTH = "smooth"
LIPSCHITZ = "lipschitz_piecewise"
PIECEWISE_CONSTANT = "piecewise_constant"

Profile = Callable[[np.ndarray], np.ndarray]


class TrialField:
    """Base class; subclasses fill in evaluation."""

    family = "field"

    def __init__(
        self,
        space: GrushinSpace,
        support_radius: float = math.inf,
        bi_radial: bool = False,
        rho_radial: bool = False,
        smoothness: str = SMOOTH,
        breakpoints: Sequence[float] = (),
        origin_order: float = 0.0,
        infinity_order: Optional[float] = None,
        params: Optional[dict] = None,
    ):
        self.space = space
        self.support_radius = float(support_radius)
        self.bi_radial = bi_radial
        self.rho_radial = rho_radial
        self.smoothness = smoothness
        self.breakpoints = tuple(sorted({float(b) for b in breakpoints}))
        # leading ρ-exponent of |u| at the origin / at infinity
        self.origin_order = float(origin_order)
        self.infinity_order = infinity_order
        self.params = dict(params or {})

    def evaluate(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def partials(self, x, y) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        return None

    def value_st(self, s, t, rho=None) -> np.ndarray:
        raise NotImplementedError(f"{self.family} is not bi-radial")

    def grad_norm_st(self, s, t, rho=None) -> np.ndarray:
        raise NotImplementedError(f"{self.family} is not bi-radial")

    def describe(self) -> dict:
        return {"family": self.family, **self.params}

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.describe()}>"


class RadialField(TrialField):
    def __init__(self, space: GrushinSpace, f: Profile, df: Profile, **kw):
        kw.setdefault("bi_radial", True)
        kw.setdefault("rho_radial", True)
        super().__init__(space, **kw)
        self._f = f
        self._df = df

    def profile(self, rho) -> np.ndarray:
        return self._f(np.asarray(rho, dtype=float))

    def dprofile(self, rho) -> np.ndarray:
        return self._df(np.asarray(rho, dtype=float))

    def evaluate(self, x, y) -> np.ndarray:
        return self.profile(gauge(self.space, x, y))

    def partials(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = gauge(self.space, x, y)
        with np.errstate(divide="ignore", invalid="ignore"):
            dx, dy = rho_partials(self.space, x, y)
            fp = self.dprofile(r)
        ok = (r > 0)[..., None]
        return np.where(ok, fp[..., None] * dx, 0.0), np.where(ok, fp[..., None] * dy, 0.0)

    def value_st(self, s, t, rho=None) -> np.ndarray:
        if rho is None:
            rho = gauge_st(self.space, s, t)
        return self.profile(rho)

    def grad_norm_st(self, s, t, rho=None) -> np.ndarray:
        if rho is None:
            rho = gauge_st(self.space, s, t)
        mu = float(self.space.mu)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.abs(self.dprofile(rho)) * (np.asarray(s) / rho) ** mu
        return np.where(rho > 0, g, 0.0)


def _smooth_step(tau: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """S(τ) rising 0 → 1 on [0, 1] from ψ(t) = exp(−1/t), and S'(τ)."""
    tau = np.clip(np.asarray(tau, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(tau > 0, np.exp(-1.0 / tau), 0.0)
        b = np.where(tau < 1, np.exp(-1.0 / (1.0 - tau)), 0.0)
        da = np.where(tau > 0, a / tau**2, 0.0)
        db = np.where(tau < 1, b / (1.0 - tau) ** 2, 0.0)
        den = a + b
        s = a / den
        ds = (da * b + a * db) / den**2
    return s, ds


def make_bump(space: GrushinSpace, r_inner: float, r_outer: float) -> RadialField:
    """Φ = 1 on ρ ≤ r_inner, 0 on ρ ≥ r_outer, smooth and nonincreasing in between."""
    if not 0 < r_inner < r_outer:
        raise DomainError(f"bump needs 0 < r_inner < r_outer, got ({r_inner}, {r_outer})")
    width = r_outer - r_inner

    def f(rho):
        s, _ = _smooth_step((r_outer - rho) / width)
        return s

    def df(rho):
        _, ds = _smooth_step((r_outer - rho) / width)
        return -ds / width

    field = RadialField(
        space, f, df,
        support_radius=r_outer,
        breakpoints=(r_inner, r_outer),
        params={"r_inner": r_inner, "r_outer": r_outer},
    )
    field.family = "bump"
    return field


def make_log_family(space: GrushinSpace, eps: float, gamma: float, r: float) -> RadialField:
    """
    u_ε = ε^{−c}log(1/ε) for ρ ≤ ε, ρ^{−c}log(1/ρ) for ε ≤ ρ ≤ 1, 0 for ρ ≥ 1,
    with c = γ + Q/r. Lipschitz across ρ = ε and ρ = 1; the interfaces take
    the inner branch.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    c = float(gamma) + float(space.Q) / float(r)
    plateau = eps ** (-c) * math.log(1.0 / eps)

    def f(rho):
        with np.errstate(divide="ignore", invalid="ignore"):
            mid = rho ** (-c) * np.log(1.0 / rho)
        return np.where(rho <= eps, plateau, np.where(rho < 1.0, mid, 0.0))

    def df(rho):
        with np.errstate(divide="ignore", invalid="ignore"):
            mid = -(rho ** (-c - 1.0)) * (c * np.log(1.0 / rho) + 1.0)
        return np.where((rho > eps) & (rho < 1.0), mid, 0.0)

    field = RadialField(
        space, f, df,
        support_radius=1.0,
        smoothness=LIPSCHITZ,
        breakpoints=(eps, 1.0),
        params={"eps": eps, "gamma": gamma, "r": r, "exponent": -c},
    )
    field.family = "log"
    return field


def make_hardy_extremal(
    space: GrushinSpace,
    p: float,
    alpha: float,
    eps_shift: float,
    cutoff: Optional[Tuple[float, float]] = None,
) -> RadialField:
    """
    Near-extremal Hardy profile with κ = (Q−p+αp)/p: ρ^{−κ+ε} inside B₁.
    Outside B₁ the profile continues as ρ^{−κ−ε} (``cutoff=None``) or the inner
    power is multiplied by ``make_bump(*cutoff)``.
    """
    hardy_constant(space, HardyParams(p, alpha))  # raises when inapplicable
    if not eps_shift > 0:
        raise DomainError(f"eps_shift must be positive, got {eps_shift}")
    Q, mu = float(space.Q), float(space.mu)
    kappa = (Q - p + alpha * p) / p
    e_in = -kappa + eps_shift
    e_out = -kappa - eps_shift

    # both Hardy integrands behave like |x|^{μp} ρ^{αp−p−μp+p·e} for a profile ρ^e
    for region, e in (("near_origin", e_in), ("near_infinity", e_out)):
        if region == "near_infinity" and cutoff is not None:
            continue
        if not integrable(space, mu * p, alpha * p - p - mu * p + p * e, region):
            raise DomainError(
                f"extremal profile not integrable {region} against the Hardy weights (eps_shift={eps_shift})"
            )

    if cutoff is None:
        def f(rho):
            with np.errstate(divide="ignore"):
                return np.where(rho <= 1.0, rho**e_in, rho**e_out)

        def df(rho):
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(rho <= 1.0, e_in * rho ** (e_in - 1.0), e_out * rho ** (e_out - 1.0))

        field = RadialField(
            space, f, df,
            support_radius=math.inf,
            smoothness=LIPSCHITZ,
            breakpoints=(1.0,),
            origin_order=e_in,
            infinity_order=e_out,
            params={"p": p, "alpha": alpha, "eps_shift": eps_shift, "cutoff": None},
        )
    else:
        r_in, r_out = cutoff
        bump = make_bump(space, r_in, r_out)

        def f(rho):
            with np.errstate(divide="ignore"):
                return rho**e_in * bump.profile(rho)

        def df(rho):
            with np.errstate(divide="ignore", invalid="ignore"):
                return e_in * rho ** (e_in - 1.0) * bump.profile(rho) + rho**e_in * bump.dprofile(rho)

        field = RadialField(
            space, f, df,
            support_radius=r_out,
            breakpoints=(r_in, r_out),
            origin_order=e_in,
            params={"p": p, "alpha": alpha, "eps_shift": eps_shift, "cutoff": [r_in, r_out]},
        )
    field.family = "hardy_extremal"
    return field


def make_gauge_power(space: GrushinSpace, exponent: float) -> RadialField:
    """ρ^e on the whole space (no support bound); ρ^{2−Q} is the fundamental-solution profile."""
    e = float(exponent)

    def f(rho):
        with np.errstate(divide="ignore"):
            return rho**e

    def df(rho):
        with np.errstate(divide="ignore", invalid="ignore"):
            return e * rho ** (e - 1.0)

    field = RadialField(space, f, df, origin_order=e, infinity_order=e, params={"exponent": e})
    field.family = "gauge_power"
    return field


def make_indicator(space: GrushinSpace, radius: float = 1.0) -> RadialField:
    """Indicator of B_R; its a.e. gradient is 0."""
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    field = RadialField(
        space,
        lambda rho: np.where(rho < radius, 1.0, 0.0),
        lambda rho: np.zeros_like(rho),
        support_radius=radius,
        smoothness=PIECEWISE_CONSTANT,
        breakpoints=(radius,),
        params={"radius": radius},
    )
    field.family = "indicator"
    return field


class GaussianField(TrialField):
    """exp(−|x|²−|y|²), truncated where it is below exp(−49)."""

    family = "gaussian"
    CUT = 7.0

    def __init__(self, space: GrushinSpace):
        c = self.CUT
        radius = float(gauge_st(space, c, c))
        super().__init__(space, support_radius=radius, bi_radial=True, breakpoints=(radius,))

    def value_st(self, s, t, rho=None):
        if rho is None:
            rho = gauge_st(self.space, s, t)
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.where(rho <= self.support_radius, np.exp(-(s**2) - t**2), 0.0)

    def grad_norm_st(self, s, t, rho=None):
        mu = float(self.space.mu)
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        v = self.value_st(s, t, rho)
        return 2.0 * v * np.sqrt(s**2 + s ** (2 * mu) * t**2)

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.value_st(np.linalg.norm(x, axis=-1), np.linalg.norm(y, axis=-1))

    def partials(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        v = self.evaluate(x, y)[..., None]
        return -2.0 * x * v, -2.0 * y * v


def make_gaussian(space: GrushinSpace) -> GaussianField:
    return GaussianField(space)


class FunctionField(TrialField):
    """A field from vectorised callables; programmatic use only (tests, probes)."""

    family = "function"

    def __init__(self, space: GrushinSpace, f, partials=None, **kw):
        super().__init__(space, **kw)
        self._fn = f
        self._partials = partials

    def evaluate(self, x, y):
        return np.asarray(self._fn(np.asarray(x, dtype=float), np.asarray(y, dtype=float)), dtype=float)

    def partials(self, x, y):
        if self._partials is None:
            return None
        return self._partials(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


class DilatedField(TrialField):
    """u∘δ_λ; bi-radiality, breakpoints and support follow by homogeneity."""

    family = "dilation"
    kind = "dilation"

    def __init__(self, base: TrialField, lam: float):
        if not lam > 0:
            raise DomainError(f"dilation factor must be positive, got {lam}")
        super().__init__(
            base.space,
            support_radius=base.support_radius / lam,
            bi_radial=base.bi_radial,
            rho_radial=base.rho_radial,
            smoothness=base.smoothness,
            breakpoints=[b / lam for b in base.breakpoints],
            origin_order=base.origin_order,
            infinity_order=base.infinity_order,
            params={"lambda": lam},
        )
        self.base = base
        self.lam = float(lam)
        self._ly = self.lam ** (1 + float(base.space.mu))

    def evaluate(self, x, y):
        return self.base.evaluate(self.lam * np.asarray(x, dtype=float), self._ly * np.asarray(y, dtype=float))

    def partials(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inner = self.base.partials(self.lam * x, self._ly * y)
        if inner is None:
            return None
        dx, dy = inner
        return self.lam * np.asarray(dx), self._ly * np.asarray(dy)

    def value_st(self, s, t, rho=None):
        r = None if rho is None else self.lam * np.asarray(rho)
        return self.base.value_st(self.lam * np.asarray(s), self._ly * np.asarray(t), r)

    def grad_norm_st(self, s, t, rho=None):
        r = None if rho is None else self.lam * np.asarray(rho)
        return self.lam * self.base.grad_norm_st(self.lam * np.asarray(s), self._ly * np.asarray(t), r)

    def describe(self) -> dict:
        return {"family": self.base.family, **self.base.params, "transform": {"kind": "dilation", "lambda": self.lam}}


class ScaledField(TrialField):
    family = "scaled"

    def __init__(self, base: TrialField, c: float):
        super().__init__(
            base.space,
            support_radius=base.support_radius,
            bi_radial=base.bi_radial,
            rho_radial=base.rho_radial,
            smoothness=base.smoothness,
            breakpoints=base.breakpoints,
            origin_order=base.origin_order,
            infinity_order=base.infinity_order,
            params={"c": c},
        )
        self.base = base
        self.c = float(c)

    def evaluate(self, x, y):
        return self.c * self.base.evaluate(x, y)

    def partials(self, x, y):
        inner = self.base.partials(x, y)
        return None if inner is None else (self.c * inner[0], self.c * inner[1])

    def value_st(self, s, t, rho=None):
        return self.c * self.base.value_st(s, t, rho)

    def grad_norm_st(self, s, t, rho=None):
        return abs(self.c) * self.base.grad_norm_st(s, t, rho)

    def describe(self) -> dict:
        return {**self.base.describe(), "scale": self.c}


class TranslatedField(TrialField):
    """u(x − λx₀, y − λ^{1+μ}y₀): a Euclidean shift by δ_λ(x₀, y₀); never bi-radial."""

    family = "translation"
    kind = "translation"

    def __init__(self, base: TrialField, x0, y0, lam: float):
        space = base.space
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        y0 = np.atleast_1d(np.asarray(y0, dtype=float))
        if x0.shape != (space.d,) or y0.shape != (space.k,):
            raise DomainError(f"translation vector must have lengths ({space.d}, {space.k})")
        if not np.linalg.norm(x0) > 0:
            raise DomainError("translation needs x0 != 0")
        if not lam > 0:
            raise DomainError(f"translation scale must be positive, got {lam}")
        if not math.isfinite(base.support_radius):
            raise DomainError("translation needs a compactly supported base field")
        mu = float(space.mu)
        self.base = base
        self.x0, self.y0, self.lam = x0, y0, float(lam)
        self.shift_x = self.lam * x0
        self.shift_y = self.lam ** (1 + mu) * y0
        r0 = base.support_radius
        # base support {ρ ≤ r0} lies in |x| ≤ r0, |y| ≤ r0^{1+μ}/(1+μ)
        self.half_x = r0
        self.half_y = r0 ** (1 + mu) / (1 + mu)
        reach_x = self.half_x + np.linalg.norm(self.shift_x)
        reach_y = self.half_y + np.linalg.norm(self.shift_y)
        outer = float(gauge_st(space, reach_x, reach_y))
        super().__init__(
            space,
            support_radius=outer,
            bi_radial=False,
            smoothness=base.smoothness,
            params={"x0": x0.tolist(), "y0": y0.tolist(), "lambda": self.lam},
        )

    def evaluate(self, x, y):
        return self.base.evaluate(np.asarray(x, dtype=float) - self.shift_x, np.asarray(y, dtype=float) - self.shift_y)

    def partials(self, x, y):
        return self.base.partials(np.asarray(x, dtype=float) - self.shift_x, np.asarray(y, dtype=float) - self.shift_y)

    def support_box(self) -> Tuple[np.ndarray, np.ndarray]:
        """Center and half-widths of a box in R^{d+k} containing the support."""
        space = self.space
        center = np.concatenate([self.shift_x, self.shift_y])
        half = np.concatenate([np.full(space.d, self.half_x), np.full(space.k, self.half_y)])
        return center, half

    def describe(self) -> dict:
        return {"family": self.base.family, **self.base.params, "transform": {"kind": "translation", **self.params}}


def dilate_field(u: TrialField, lam: float) -> DilatedField:
    return DilatedField(u, lam)


def translate_field(u: TrialField, x0, y0, lam: float) -> TranslatedField:
    return TranslatedField(u, x0, y0, lam)


def scale_field(u: TrialField, c: float) -> ScaledField:
    if c == 0:
        raise DomainError("scaling by 0 gives the trivial field")
    return ScaledField(u, c)


FAMILIES = {
    "bump": lambda space, p: make_bump(space, p.get("r_inner", 1.0), p.get("r_outer", 2.0)),
    "log": lambda space, p: make_log_family(space, p["eps"], p["gamma"], p["r"]),
    "hardy_extremal": lambda space, p: make_hardy_extremal(
        space, p["p"], p["alpha"], p["eps_shift"], tuple(p["cutoff"]) if p.get("cutoff") else None
    ),
    "gaussian": lambda space, p: make_gaussian(space),
    "indicator": lambda space, p: make_indicator(space, p.get("radius", 1.0)),
}


def build_field(space: GrushinSpace, family: str, params: dict, transform: Optional[dict] = None) -> TrialField:
    try:
        maker = FAMILIES[family]
    except KeyError:
        raise DomainError(f"unknown field family {family!r}; known: {sorted(FAMILIES)}") from None
    try:
        u = maker(space, params)
    except KeyError as e:
        raise DomainError(f"field family {family!r} needs parameter {e.args[0]!r}") from e
    except InapplicableConstantError:
        raise
    if transform:
        kind = transform["kind"]
        if kind == "dilation":
            u = dilate_field(u, transform["lambda"])
        elif kind == "translation":
            u = translate_field(u, transform["x0"], transform["y0"], transform["lambda"])
        elif kind == "scale":
            u = scale_field(u, transform["c"])
        else:
            raise DomainError(f"unknown transform {kind!r}")
    return u
