"""Numerical parallel-pair machinery for curves not given by support functions.

Closed curves are coordinate trigonometric polynomials (exact derivatives);
open arcs are cubic splines through user samples.  Parallel pairs are found
by lifting the tangent angle to a continuous function and bracketing the
zeros of sin(phi(t1) - phi(t2)) in t2 for every grid value of t1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import ChainTooShort, NotALoop, NotRegular
from .supportfn import RosetteCurve

TWO_PI = 2.0 * math.pi

# Relative tolerances; all scale-free (diameter- or domain-relative).
REGULARITY_GUARD = 1e-6
CLOSE_GUARD = 1e-6
CONVEXITY_SLACK = 1e-9


@dataclass(frozen=True)
class HarmonicTerm:
    """One coordinate harmonic: cos_amp*cos(m t) + sin_amp*sin(m t)."""

    m: int
    cos_amp: float = 0.0
    sin_amp: float = 0.0

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 0:
            raise ValueError(f"harmonic index must be a non-negative integer, got {self.m!r}")


def _eval_harmonics(terms: tuple[HarmonicTerm, ...], t: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros_like(t)
    for term in terms:
        m = float(term.m)
        angle = term.m * t
        c, s = term.cos_amp, term.sin_amp
        if order == 0:
            out = out + c * np.cos(angle) + s * np.sin(angle)
        elif order == 1:
            out = out + m * (-c * np.sin(angle) + s * np.cos(angle))
        else:
            out = out - m * m * (c * np.cos(angle) + s * np.sin(angle))
    return out


class ParametricCurve:
    """Shared surface of the two curve representations."""

    domain: tuple[float, float]
    closed: bool

    def position(self, t) -> np.ndarray:
        raise NotImplementedError

    def velocity(self, t) -> np.ndarray:
        raise NotImplementedError

    def acceleration(self, t) -> np.ndarray:
        raise NotImplementedError

    @property
    def length_of_domain(self) -> float:
        return self.domain[1] - self.domain[0]

    @cached_property
    def diameter(self) -> float:
        t = np.linspace(self.domain[0], self.domain[1], 4096)
        pts = self.position(t)
        spans = pts.max(axis=0) - pts.min(axis=0)
        return float(np.hypot(spans[0], spans[1]))

    @cached_property
    def min_speed(self) -> float:
        t = np.linspace(self.domain[0], self.domain[1], 4096)
        return float(np.min(np.linalg.norm(self.velocity(t), axis=-1)))

    @property
    def is_regular(self) -> bool:
        return self.min_speed > REGULARITY_GUARD * self.diameter / self.length_of_domain

    def check_regular(self) -> None:
        if not self.is_regular:
            raise NotRegular(f"minimum speed {self.min_speed:g} is below the regularity floor")


class ClosedTrigCurve(ParametricCurve):
    """Closed curve with trig-polynomial coordinates on [0, 2*pi)."""

    def __init__(self, x_terms, y_terms):
        self.x_terms = tuple(x_terms)
        self.y_terms = tuple(y_terms)
        self.domain = (0.0, TWO_PI)
        self.closed = True

    @property
    def max_harmonic(self) -> int:
        return max((t.m for t in self.x_terms + self.y_terms), default=1)

    def _eval(self, t, order: int) -> np.ndarray:
        tt = np.asarray(t, dtype=float)
        return np.stack(
            [_eval_harmonics(self.x_terms, tt, order), _eval_harmonics(self.y_terms, tt, order)], axis=-1
        )

    def position(self, t) -> np.ndarray:
        return self._eval(t, 0)

    def velocity(self, t) -> np.ndarray:
        return self._eval(t, 1)

    def acceleration(self, t) -> np.ndarray:
        return self._eval(t, 2)


class SplineArc(ParametricCurve):
    """Open arc: a cubic spline through at least 16 samples on [t1, t2]."""

    MIN_SAMPLES = 16

    def __init__(self, samples, t_range):
        pts = np.asarray(samples, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("samples must be an (m, 2) array of points")
        if len(pts) < self.MIN_SAMPLES:
            raise ValueError(f"need at least {self.MIN_SAMPLES} samples, got {len(pts)}")
        t1, t2 = float(t_range[0]), float(t_range[1])
        if not t2 > t1:
            raise ValueError("t_range must be increasing")
        self.samples = pts
        self.domain = (t1, t2)
        self.closed = False
        self._spline = CubicSpline(np.linspace(t1, t2, len(pts)), pts, axis=0)
        self._dspline = self._spline.derivative()
        self._ddspline = self._dspline.derivative()

    def position(self, t) -> np.ndarray:
        return self._spline(np.asarray(t, dtype=float))

    def velocity(self, t) -> np.ndarray:
        return self._dspline(np.asarray(t, dtype=float))

    def acceleration(self, t) -> np.ndarray:
        return self._ddspline(np.asarray(t, dtype=float))


def from_support_curve(curve: RosetteCurve) -> ClosedTrigCurve:
    """Exact conversion of a rosette to coordinate trig polynomials on [0, 2*pi).

    With t = theta / n, the products p*cos(theta) etc. expand through the
    product-to-sum identities into integer harmonics j +- n of t.
    """
    f = curve.support
    n = f.rotation_number
    x_amp: dict[int, list[float]] = {}
    y_amp: dict[int, list[float]] = {}

    def add(amps: dict[int, list[float]], m: int, cos_amp: float, sin_amp: float) -> None:
        if m < 0:
            m, sin_amp = -m, -sin_amp
        if m == 0:
            sin_amp = 0.0
        entry = amps.setdefault(m, [0.0, 0.0])
        entry[0] += cos_amp
        entry[1] += sin_amp

    add(x_amp, n, f.constant, 0.0)
    add(y_amp, n, 0.0, f.constant)
    for term in f.terms:
        freq = term.j / n
        c, s = term.cos_amp, term.sin_amp
        lo, hi = term.j - n, term.j + n
        add(x_amp, lo, 0.5 * c * (1.0 + freq), 0.5 * s * (1.0 + freq))
        add(x_amp, hi, 0.5 * c * (1.0 - freq), 0.5 * s * (1.0 - freq))
        add(y_amp, lo, 0.5 * s * (1.0 + freq), -0.5 * c * (1.0 + freq))
        add(y_amp, hi, -0.5 * s * (1.0 - freq), 0.5 * c * (1.0 - freq))

    to_terms = lambda amps: tuple(
        HarmonicTerm(m, ca, sa) for m, (ca, sa) in sorted(amps.items()) if ca != 0.0 or sa != 0.0
    )
    return ClosedTrigCurve(to_terms(x_amp), to_terms(y_amp))


class TangentAngleLift:
    """Continuous lift of the tangent angle of a regular curve.

    Calling it evaluates atan2 of the velocity exactly and picks the 2*pi
    branch from the nearest sample of a dense unwrapped reference grid, so
    the lift carries no interpolation error.
    """

    def __init__(self, curve: ParametricCurve, samples: int | None = None):
        curve.check_regular()
        if samples is None:
            if isinstance(curve, ClosedTrigCurve):
                samples = max(4096, 64 * curve.max_harmonic)
            elif isinstance(curve, SplineArc):
                samples = max(4096, 16 * len(curve.samples))
            else:
                samples = 4096
        self.curve = curve
        self.grid = np.linspace(curve.domain[0], curve.domain[1], samples + 1)
        vel = curve.velocity(self.grid)
        self.phi_ref = np.unwrap(np.arctan2(vel[..., 1], vel[..., 0]))
        if curve.closed:
            turns = (self.phi_ref[-1] - self.phi_ref[0]) / TWO_PI
            if abs(turns - round(turns)) > 1e-6:
                raise NotRegular(f"tangent lift of a closed curve must turn whole circles, got {turns:g}")

    def __call__(self, t):
        tt = np.asarray(t, dtype=float)
        vel = self.curve.velocity(tt)
        raw = np.arctan2(vel[..., 1], vel[..., 0])
        h = (self.grid[-1] - self.grid[0]) / (len(self.grid) - 1)
        idx = np.clip(np.round((tt - self.grid[0]) / h).astype(int), 0, len(self.grid) - 1)
        k = np.round((self.phi_ref[idx] - raw) / TWO_PI)
        out = raw + TWO_PI * k
        return float(out) if out.ndim == 0 else out

    @property
    def total_turn(self) -> float:
        return float(self.phi_ref[-1] - self.phi_ref[0])

    @property
    def rotation_number(self) -> float:
        return self.total_turn / TWO_PI


def tangent_angle_lift(curve: ParametricCurve, samples: int | None = None) -> TangentAngleLift:
    return TangentAngleLift(curve, samples)


@dataclass(frozen=True)
class ParallelPair:
    t1: float
    t2: float
    orientation: str  # "same" | "opposite"


def find_parallel_pairs(curve: ParametricCurve, grid: int = 1024) -> list[ParallelPair]:
    """All parameter pairs t1 < t2 with parallel tangents, t1 on the grid.

    For each grid t1 the zeros of sin(phi(t1) - phi(t2)) in t2 are bracketed
    on the same grid and refined by bisection; close-of-period duplicates of
    (t0, t) pairs are dropped for closed curves.
    """
    if grid < 256:
        raise ValueError(f"grid must be at least 256, got {grid}")
    curve.check_regular()
    lift = tangent_angle_lift(curve)
    t0, t1 = curve.domain
    nodes = np.linspace(t0, t1, grid + 1)
    phi = lift(nodes)

    pairs: list[ParallelPair] = []
    for i in range(grid):
        target = phi[i]
        f_vals = np.sin(target - phi)
        # The bracket touching t1 itself is skipped: sin vanishes at t2 = t1
        # by construction, and a genuine partner needs the tangent to turn by
        # a multiple of pi, which cannot happen within one grid cell of a
        # regular curve sampled at this density.
        roots: list[float] = []
        for j in np.nonzero(f_vals[i + 1 :] == 0.0)[0] + (i + 1):
            roots.append(float(nodes[j]))
        hit = np.nonzero(f_vals[i + 1 : -1] * f_vals[i + 2 :] < 0.0)[0] + (i + 1)
        for j in hit:
            roots.append(float(brentq(lambda s: math.sin(target - lift(s)), nodes[j], nodes[j + 1], xtol=1e-10)))
        roots.sort()
        kept: list[float] = []
        for r in roots:
            if kept and r - kept[-1] < 1e-9:
                continue
            if curve.closed and r > t1 - 1e-9:
                continue  # same point pair as (t0, nodes[i]) seen from the seam
            kept.append(r)
        for r in kept:
            orientation = "same" if math.cos(target - lift(r)) > 0.0 else "opposite"
            pairs.append(ParallelPair(float(nodes[i]), r, orientation))
    return pairs


@dataclass(frozen=True)
class Chain:
    """One continuity class of equidistant points, ordered by t1.

    tangents holds the source curve's unit tangent at t1; by the envelope
    property that is also the chain's own tangent direction at regular
    points, which is what the reversal detector compares against.
    """

    t1: np.ndarray
    t2: np.ndarray
    points: np.ndarray
    tangents: np.ndarray

    def __len__(self) -> int:
        return len(self.t1)


def equidistant_cloud(curve: ParametricCurve, pairs: list[ParallelPair], lam: float) -> list[Chain]:
    """Group the pair-wise points lam*g(t1) + (1-lam)*g(t2) into chains.

    Chains break where consecutive t1 values jump by more than 4x the median
    grid spacing, or where the t2 solution branch jumps (pairs appearing or
    disappearing at inflection events).
    """
    if not pairs:
        return []
    ordered = sorted(pairs, key=lambda pr: (pr.t1, pr.t2))
    levels: dict[float, list[ParallelPair]] = {}
    for pr in ordered:
        levels.setdefault(pr.t1, []).append(pr)
    level_keys = sorted(levels)
    if len(level_keys) > 1:
        med_dt1 = float(np.median(np.diff(level_keys)))
    else:
        med_dt1 = curve.length_of_domain
    t1_gap = 4.0 * med_dt1
    # t2 continuity window; pair branches of the curves handled here drift
    # with bounded slope, so a footprint of a few grid cells is enough.
    t2_gap = 16.0 * med_dt1

    open_chains: list[dict] = []
    done: list[list[ParallelPair]] = []
    for key in level_keys:
        still_open = []
        for chain in open_chains:
            if key - chain["last_t1"] > t1_gap:
                done.append(chain["items"])
            else:
                chain["taken"] = False
                still_open.append(chain)
        open_chains = still_open
        for pr in levels[key]:
            best = None
            best_gap = t2_gap
            for chain in open_chains:
                if chain["taken"]:
                    continue
                gap = abs(pr.t2 - chain["last_t2"])
                if gap <= best_gap:
                    best, best_gap = chain, gap
            if best is None:
                open_chains.append({"items": [pr], "last_t1": pr.t1, "last_t2": pr.t2, "taken": True})
            else:
                best["items"].append(pr)
                best["last_t1"], best["last_t2"], best["taken"] = pr.t1, pr.t2, True
    done.extend(chain["items"] for chain in open_chains)
    done.sort(key=lambda items: (items[0].t1, items[0].t2))

    chains = []
    for items in done:
        t1s = np.asarray([pr.t1 for pr in items])
        t2s = np.asarray([pr.t2 for pr in items])
        pts = lam * curve.position(t1s) + (1.0 - lam) * curve.position(t2s)
        vel = curve.velocity(t1s)
        tang = vel / np.linalg.norm(vel, axis=-1, keepdims=True)
        chains.append(Chain(t1s, t2s, pts, tang))
    return chains


def detect_chain_singularities(chain: Chain) -> list[int]:
    """Indices where the chain reverses direction against the curve tangent.

    Equidistant chains run parallel to the source tangent at t1 wherever they
    are regular, so a sign flip of segment . tangent marks one singular point.
    """
    m = len(chain)
    if m < 32:
        raise ChainTooShort(f"chain has {m} points; need at least 32")
    pts = chain.points
    spans = pts.max(axis=0) - pts.min(axis=0)
    scale = max(1.0, float(np.max(np.abs(pts))))
    if float(np.hypot(spans[0], spans[1])) < 1e-9 * scale:
        raise ChainTooShort("chain is a degenerate point cloud")

    seg = np.diff(pts, axis=0)
    dots = np.einsum("ij,ij->i", seg, chain.tangents[:-1])
    floor = 1e-12 * scale
    singular: list[int] = []
    last_sign = 0.0
    for i, value in enumerate(dots):
        if abs(value) < floor:
            continue
        sign = math.copysign(1.0, value)
        if last_sign and sign != last_sign:
            singular.append(i)
        last_sign = sign
    return singular


@dataclass(frozen=True)
class LoopSegment:
    """An arc whose endpoints coincide, with non-vanishing curvature."""

    curve: ParametricCurve
    rotation_index: float


def make_loop(curve: ParametricCurve) -> LoopSegment:
    """Validate the loop conditions and compute the rotation index."""
    curve.check_regular()
    a, b = curve.domain
    gap = float(np.linalg.norm(curve.position(a) - curve.position(b)))
    if gap > CLOSE_GUARD * curve.diameter:
        raise NotALoop(f"endpoints are {gap:g} apart; the arc does not close up")
    t = np.linspace(a, b, 4096)
    vel = curve.velocity(t)
    acc = curve.acceleration(t)
    speed = np.linalg.norm(vel, axis=-1)
    kappa = (vel[:, 0] * acc[:, 1] - vel[:, 1] * acc[:, 0]) / speed**3
    if np.min(np.abs(kappa)) < 1e-9 * np.max(np.abs(kappa)):
        raise NotALoop("curvature vanishes on the arc")
    lift = tangent_angle_lift(curve)
    return LoopSegment(curve, lift.rotation_number)


def classify_loop(segment: LoopSegment) -> str:
    """Return "convex" when |rotation index| <= 1, else "non_convex"."""
    return "convex" if abs(segment.rotation_index) <= 1.0 + CONVEXITY_SLACK else "non_convex"
