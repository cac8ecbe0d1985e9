"""Curves defined by trigonometric support functions.

A closed locally convex curve with rotation number n can be encoded by the
oriented distance p(theta) from the origin to its tangent line with normal
(cos theta, sin theta).  The curve point, tangent direction and curvature
all come out of p and its first two derivatives in closed form, so nothing
downstream ever needs finite differences on the main path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateCurvature, NotARosette

TWO_PI = 2.0 * math.pi

# Relative guard separating a genuine curvature zero from round-off.
CURVATURE_GUARD = 1e-9


@dataclass(frozen=True)
class SupportTerm:
    """One harmonic of a support function; oscillates j times per full period."""

    j: int
    cos_amp: float = 0.0
    sin_amp: float = 0.0

    def __post_init__(self):
        if not isinstance(self.j, int) or self.j < 1:
            raise ValueError(f"term frequency numerator must be a positive integer, got {self.j!r}")


@dataclass(frozen=True)
class TrigSupportFunction:
    """Finite trigonometric polynomial p(theta) with period 2*pi*rotation_number.

    Frequencies are the exact rationals j / rotation_number, stored as the
    integer numerators j, so periodicity survives floating-point evaluation.
    """

    rotation_number: int
    constant: float
    terms: tuple[SupportTerm, ...] = ()

    def __post_init__(self):
        if not isinstance(self.rotation_number, int) or self.rotation_number < 1:
            raise ValueError(f"rotation number must be a positive integer, got {self.rotation_number!r}")
        object.__setattr__(self, "terms", tuple(self.terms))
        numerators = [t.j for t in self.terms]
        if len(set(numerators)) != len(numerators):
            raise ValueError("frequency numerators must be distinct")

    @property
    def period(self) -> float:
        return TWO_PI * self.rotation_number

    @property
    def max_numerator(self) -> int:
        return max((t.j for t in self.terms), default=1)

    @property
    def amplitude_scale(self) -> float:
        """Magnitude scale of p, used for relative tolerances."""
        return max(1.0, abs(self.constant) + sum(abs(t.cos_amp) + abs(t.sin_amp) for t in self.terms))


def eval_p(f: TrigSupportFunction, theta, derivative_order: int = 0):
    """Evaluate p or one of its derivatives, term by term and exactly.

    Orders 0..2 are the public surface; order 3 exists because the analytic
    velocity of a centre-symmetry branch needs the derivative of the radius
    of curvature.
    """
    if derivative_order not in (0, 1, 2, 3):
        raise ValueError(f"derivative_order must be 0..3, got {derivative_order!r}")
    th = np.asarray(theta, dtype=float)
    n = f.rotation_number
    out = np.zeros_like(th)
    if derivative_order == 0:
        out = out + f.constant
    for term in f.terms:
        freq = term.j / n
        angle = (term.j * th) / n
        c, s = term.cos_amp, term.sin_amp
        if derivative_order == 0:
            out = out + c * np.cos(angle) + s * np.sin(angle)
        elif derivative_order == 1:
            out = out + freq * (-c * np.sin(angle) + s * np.cos(angle))
        elif derivative_order == 2:
            out = out - freq * freq * (c * np.cos(angle) + s * np.sin(angle))
        else:
            out = out + freq ** 3 * (c * np.sin(angle) - s * np.cos(angle))
    if np.isscalar(theta) or (isinstance(theta, np.ndarray) and theta.ndim == 0):
        return float(out)
    return out


def radius_of_curvature(f: TrigSupportFunction, theta):
    """rho(theta) = p + p''; the curve's speed and 1/curvature in this parametrization."""
    return eval_p(f, theta, 0) + eval_p(f, theta, 2)


def radius_of_curvature_prime(f: TrigSupportFunction, theta):
    return eval_p(f, theta, 1) + eval_p(f, theta, 3)


def curve_position(f: TrigSupportFunction, theta) -> np.ndarray:
    """Curve point(s) in polar-tangential coordinates; shape (..., 2)."""
    th = np.asarray(theta, dtype=float)
    p = eval_p(f, th, 0)
    dp = eval_p(f, th, 1)
    return np.stack([p * np.cos(th) - dp * np.sin(th), p * np.sin(th) + dp * np.cos(th)], axis=-1)


def tangent_direction(theta) -> np.ndarray:
    """Unit tangent; depends only on the parameter, not on the curve."""
    th = np.asarray(theta, dtype=float)
    return np.stack([-np.sin(th), np.cos(th)], axis=-1)


@dataclass(frozen=True)
class CurvePoint:
    theta: float
    position: np.ndarray
    tangent_dir: np.ndarray
    curvature: float


def gamma(f: TrigSupportFunction, theta: float) -> CurvePoint:
    """Full curve data at one parameter value.

    Raises DegenerateCurvature when |p + p''| is below the round-off guard,
    i.e. the input is not locally convex at theta.
    """
    theta = float(theta)
    rho = radius_of_curvature(f, theta)
    if abs(rho) < CURVATURE_GUARD * f.amplitude_scale:
        raise DegenerateCurvature(f"p + p'' = {rho:g} at theta = {theta:g}; curve is not locally convex there")
    return CurvePoint(
        theta=theta,
        position=curve_position(f, theta),
        tangent_dir=tangent_direction(theta),
        curvature=1.0 / rho,
    )


@dataclass(frozen=True)
class RosetteValidity:
    verdict: str  # "rosette" | "not_locally_convex"
    min_rho: float
    theta_at_min: float
    samples: int

    @property
    def is_rosette(self) -> bool:
        return self.verdict == "rosette"


def validate_rosette(f: TrigSupportFunction, samples_per_period: int | None = None) -> RosetteValidity:
    """Check p + p'' > 0 over one full period, via a dense grid plus local refinement.

    samples_per_period counts grid points over [0, 2*n*pi) and must be at
    least 4x the highest frequency numerator, so no oscillation of the
    radius of curvature can slip between grid points.
    """
    max_j = f.max_numerator
    if samples_per_period is None:
        samples_per_period = max(512, 32 * max_j)
    if samples_per_period < max(4, 4 * max_j):
        raise ValueError(f"samples_per_period={samples_per_period} is below the 4x{max_j} sampling floor")

    period = f.period
    grid = np.linspace(0.0, period, samples_per_period, endpoint=False)
    rho = radius_of_curvature(f, grid)

    # Refine every local minimum of the grid (circular neighbours).
    h = period / samples_per_period
    best_val = math.inf
    best_theta = 0.0
    left = np.roll(rho, 1)
    right = np.roll(rho, -1)
    for i in np.nonzero((rho <= left) & (rho <= right))[0]:
        res = minimize_scalar(
            lambda t: radius_of_curvature(f, t),
            bounds=(grid[i] - h, grid[i] + h),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun < best_val:
            best_val = float(res.fun)
            best_theta = float(res.x) % period
    verdict = "rosette" if best_val > 0.0 else "not_locally_convex"
    return RosetteValidity(verdict=verdict, min_rho=best_val, theta_at_min=best_theta, samples=samples_per_period)


@dataclass(frozen=True)
class RosetteCurve:
    """A support function bundled with vectorized curve evaluators."""

    support: TrigSupportFunction

    @property
    def n(self) -> int:
        return self.support.rotation_number

    @property
    def period(self) -> float:
        return self.support.period

    def p(self, theta, order: int = 0):
        return eval_p(self.support, theta, order)

    def rho(self, theta):
        return radius_of_curvature(self.support, theta)

    def rho_prime(self, theta):
        return radius_of_curvature_prime(self.support, theta)

    def curvature(self, theta):
        return 1.0 / self.rho(theta)

    def position(self, theta) -> np.ndarray:
        return curve_position(self.support, theta)

    def tangent(self, theta) -> np.ndarray:
        return tangent_direction(theta)

    def point(self, theta: float) -> CurvePoint:
        return gamma(self.support, theta)

    def diameter(self, samples: int = 4096) -> float:
        return _diameter(self.support, samples)

    def validity(self) -> RosetteValidity:
        return _validity(self.support)


@lru_cache(maxsize=256)
def _diameter(f: TrigSupportFunction, samples: int) -> float:
    pts = curve_position(f, np.linspace(0.0, f.period, samples, endpoint=False))
    spans = pts.max(axis=0) - pts.min(axis=0)
    return float(np.hypot(spans[0], spans[1]))


@lru_cache(maxsize=256)
def _validity(f: TrigSupportFunction) -> RosetteValidity:
    return validate_rosette(f)


def ensure_rosette(curve: RosetteCurve) -> None:
    """Raise NotARosette unless the curve's support function is locally convex."""
    report = curve.validity()
    if not report.is_rosette:
        raise NotARosette(
            f"p + p'' reaches {report.min_rho:g} at theta = {report.theta_at_min:g}; not locally convex"
        )
