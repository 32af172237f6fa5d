"""
Grushin ambient structure on R^{d+k} = R^d_x × R^k_y.

Gauge ρ = (|x|^{2+2μ} + (1+μ)²|y|²)^{1/(2+2μ)}, anisotropic dilations
δ_λ(x, y) = (λx, λ^{1+μ}y), the Grushin gradient ∇_μ = (∇_x, |x|^μ∇_y) and the
operator G_μ = Δ_x + |x|^{2μ}Δ_y. Pointwise helpers accept arrays shaped
(..., d) and (..., k) so that quadrature can evaluate whole node sets at once.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from numbers import Real
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DimensionError, DomainError

log = logging.getLogger(__name__)

DEFAULT_FD_STEP = 1e-4
DEFAULT_EXCLUSION_RADIUS = 1e-3


@dataclass(frozen=True)
class GrushinSpace:
    d: int
    k: int
    mu: Real

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"d must be a positive integer, got {self.d!r}")
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k!r}")
        if not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu!r}")

    @property
    def Q(self) -> Real:
        # homogeneous dimension; exact when mu is a Fraction
        return self.d + (1 + self.mu) * self.k

    @property
    def n(self) -> int:
        return self.d + self.k

    def __str__(self) -> str:
        return f"(d={self.d}, k={self.k}, mu={self.mu})"


@dataclass(frozen=True)
class Point:
    x: np.ndarray
    y: np.ndarray

    @classmethod
    def of(cls, x, y) -> "Point":
        return cls(np.atleast_1d(np.asarray(x, dtype=float)), np.atleast_1d(np.asarray(y, dtype=float)))

    def check(self, space: GrushinSpace) -> "Point":
        if self.x.shape[-1] != space.d or self.y.shape[-1] != space.k:
            raise DimensionError(
                f"point has (|x|, |y|) lengths ({self.x.shape[-1]}, {self.y.shape[-1]}), "
                f"space {space} expects ({space.d}, {space.k})"
            )
        return self


def gauge(space: GrushinSpace, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    ax = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
    ay = np.linalg.norm(np.asarray(y, dtype=float), axis=-1)
    return gauge_st(space, ax, ay)


def gauge_st(space: GrushinSpace, s, t) -> np.ndarray:
    """ρ as a function of (s, t) = (|x|, |y|)."""
    mu = float(space.mu)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return (s ** (2 + 2 * mu) + (1 + mu) ** 2 * t**2) ** (1.0 / (2 + 2 * mu))


def rho(space: GrushinSpace, p: Point) -> float:
    p.check(space)
    return float(gauge(space, p.x, p.y))


def dilate(space: GrushinSpace, lam: float, p: Point) -> Point:
    if not lam > 0:
        raise DomainError(f"dilation factor must be positive, got {lam!r}")
    p.check(space)
    return Point(lam * p.x, lam ** (1 + float(space.mu)) * p.y)


def rho_partials(space: GrushinSpace, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic (∂_x ρ, ∂_y ρ); undefined at the origin."""
    mu = float(space.mu)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ax = np.linalg.norm(x, axis=-1)
    r = gauge(space, x, y)
    denom = r ** (1 + 2 * mu)
    dx = (ax ** (2 * mu) / denom)[..., None] * x
    dy = ((1 + mu) / denom)[..., None] * y
    return dx, dy


def _steps(coords: np.ndarray, base: float) -> np.ndarray:
    return base * np.maximum(1.0, np.abs(coords))


def fd_partials(u, p: Point, base_step: float = DEFAULT_FD_STEP) -> Tuple[np.ndarray, np.ndarray]:
    """
    Central differences at steps h and h/2 combined by Richardson extrapolation
    (error O(h^4) for smooth u). h_i = base_step * max(1, |coordinate_i|).
    """
    z = np.concatenate([p.x, p.y])
    d = p.x.shape[-1]
    h = _steps(z, base_step)
    n = z.size
    eye = np.eye(n)

    def central(hh: np.ndarray) -> np.ndarray:
        plus = z[None, :] + eye * hh[:, None]
        minus = z[None, :] - eye * hh[:, None]
        fp = np.asarray(u.evaluate(plus[:, :d], plus[:, d:]), dtype=float)
        fm = np.asarray(u.evaluate(minus[:, :d], minus[:, d:]), dtype=float)
        return (fp - fm) / (2 * hh)

    grad = (4 * central(h / 2) - central(h)) / 3
    if not np.all(np.isfinite(grad)):
        raise DomainError(f"non-finite finite-difference derivative at x={p.x}, y={p.y}")
    return grad[:d], grad[d:]


def partials(u, p: Point, base_step: float = DEFAULT_FD_STEP) -> Tuple[np.ndarray, np.ndarray]:
    analytic = u.partials(p.x, p.y) if hasattr(u, "partials") else None
    if analytic is None:
        return fd_partials(u, p, base_step)
    dx, dy = (np.asarray(a, dtype=float) for a in analytic)
    if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dy))):
        raise DomainError(f"non-finite derivative at x={p.x}, y={p.y}")
    return dx, dy


def grushin_gradient(space: GrushinSpace, u, p: Point, base_step: float = DEFAULT_FD_STEP) -> np.ndarray:
    p.check(space)
    dx, dy = partials(u, p, base_step)
    ax = float(np.linalg.norm(p.x))
    return np.concatenate([dx, ax ** float(space.mu) * dy])


def fd_grushin_laplacian(
    space: GrushinSpace,
    u,
    p: Point,
    step: float = DEFAULT_FD_STEP,
    extrapolate: bool = True,
) -> float:
    """
    Second-order central differences for G_μu = Δ_x u + |x|^{2μ}Δ_y u.
    With ``extrapolate`` the h and h/2 stencils are Richardson-combined.
    """
    p.check(space)
    if not step > 0:
        raise DomainError(f"step must be positive, got {step!r}")
    ax = float(np.linalg.norm(p.x))
    if ax < 10 * step:
        raise DomainError(f"step {step} too large for |x|={ax:g} (need |x| >= 10*step)")
    z = np.concatenate([p.x, p.y])
    d = space.d
    n = z.size
    h = _steps(z, step)
    eye = np.eye(n)
    f0 = float(u.evaluate(p.x[None, :], p.y[None, :])[0])

    def second(hh: np.ndarray) -> np.ndarray:
        plus = z[None, :] + eye * hh[:, None]
        minus = z[None, :] - eye * hh[:, None]
        fp = np.asarray(u.evaluate(plus[:, :d], plus[:, d:]), dtype=float)
        fm = np.asarray(u.evaluate(minus[:, :d], minus[:, d:]), dtype=float)
        return (fp - 2 * f0 + fm) / hh**2

    sec = second(h)
    if extrapolate:
        sec = (4 * second(h / 2) - sec) / 3
    if not np.all(np.isfinite(sec)):
        raise DomainError(f"non-finite second difference at x={p.x}, y={p.y}")
    return float(sec[:d].sum() + ax ** (2 * float(space.mu)) * sec[d:].sum())


def grushin_divergence(
    space: GrushinSpace,
    field: Callable[[np.ndarray, np.ndarray], np.ndarray],
    p: Point,
    step: float = DEFAULT_FD_STEP,
) -> float:
    """div_μ F = Σ ∂_{x_i}F_i + |x|^μ Σ ∂_{y_j}F_{d+j}, F given as (x, y) -> (..., d+k)."""
    p.check(space)
    z = np.concatenate([p.x, p.y])
    d = space.d
    n = z.size
    h = _steps(z, step)
    eye = np.eye(n)

    def diag_central(hh: np.ndarray) -> np.ndarray:
        plus = z[None, :] + eye * hh[:, None]
        minus = z[None, :] - eye * hh[:, None]
        fp = np.asarray(field(plus[:, :d], plus[:, d:]), dtype=float)
        fm = np.asarray(field(minus[:, :d], minus[:, d:]), dtype=float)
        # component i differentiated along coordinate i
        return (np.diagonal(fp) - np.diagonal(fm)) / (2 * hh)

    der = (4 * diag_central(h / 2) - diag_central(h)) / 3
    ax = float(np.linalg.norm(p.x))
    return float(der[:d].sum() + ax ** float(space.mu) * der[d:].sum())


def away_from_degenerate(p: Point, radius: float = DEFAULT_EXCLUSION_RADIUS) -> bool:
    """True when the point is outside the exclusion tube |x| < radius around {x=0}."""
    return float(np.linalg.norm(p.x)) >= radius


def random_points(
    space: GrushinSpace,
    n: int,
    rng: np.random.Generator,
    scale: float = 2.0,
    exclusion: Optional[float] = DEFAULT_EXCLUSION_RADIUS,
) -> list[Point]:
    """Seeded sample of points in [-scale, scale]^{d+k}, rejecting |x| < exclusion."""
    out: list[Point] = []
    while len(out) < n:
        z = rng.uniform(-scale, scale, size=space.n)
        p = Point(z[: space.d], z[space.d :])
        if exclusion is None or away_from_degenerate(p, exclusion):
            out.append(p)
    return out
