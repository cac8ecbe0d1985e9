"""Branch parametrizations of midpoint caustics, affine equidistants and
centre symmetry sets of rosettes.

An n-rosette pairs the parameter theta with theta + k*pi for k = 1..n; every
set handled here is built from those parallel pairs.  Affine branches are
plain convex combinations and their velocity is a scalar multiple of the
tangent direction, which makes cusp detection a 1-D sign problem.  Centre
symmetry branches are the envelope of the chords: the envelope point divides
the chord through gamma(theta), gamma(theta + k*pi) in the ratio of the radii
of curvature, giving

    [kappa1 * gamma1 + s * kappa2 * gamma2] / [kappa1 + s * kappa2],
    s = (-1)**(k+1),

whose denominator can vanish only for even k (same-oriented tangent pairs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateBranch, InvalidLambda
from .supportfn import RosetteCurve, ensure_rosette

WIGNER_CAUSTIC = "wigner_caustic"
EQUIDISTANT = "equidistant"
CSS = "css"

PI = math.pi

# Relative floor under which a CSS denominator counts as a pole.
POLE_GUARD = 1e-8
# Relative spread under which a CSS branch counts as a single point.
COLLAPSE_GUARD = 1e-8


@dataclass(frozen=True)
class AffineBranch:
    """One smooth branch of a Wigner caustic or affine equidistant.

    Points are weight*gamma(theta) + (1-weight)*gamma(theta + k*pi); the
    branch velocity is speed_factor(theta) times the unit tangent, so the
    scalar speed_factor is the exact cusp condition.
    """

    kind: str
    lam: float
    pair_offset: int
    index: int
    domain: tuple[float, float]
    curve: RosetteCurve
    weight: float

    @property
    def label(self) -> str:
        if self.kind == WIGNER_CAUSTIC:
            return f"wigner k={self.pair_offset}"
        return f"equidistant lambda={self.lam:g} branch={self.index} k={self.pair_offset}"

    def point(self, theta) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        a = self.curve.position(th)
        b = self.curve.position(th + self.pair_offset * PI)
        return self.weight * a + (1.0 - self.weight) * b

    def speed_factor(self, theta):
        th = np.asarray(theta, dtype=float)
        sign = (-1.0) ** self.pair_offset
        out = self.weight * self.curve.rho(th) + (1.0 - self.weight) * sign * self.curve.rho(th + self.pair_offset * PI)
        return float(out) if out.ndim == 0 else out

    def speed_factor_prime(self, theta):
        th = np.asarray(theta, dtype=float)
        sign = (-1.0) ** self.pair_offset
        out = self.weight * self.curve.rho_prime(th) + (1.0 - self.weight) * sign * self.curve.rho_prime(
            th + self.pair_offset * PI
        )
        return float(out) if out.ndim == 0 else out

    def velocity(self, theta) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        return np.asarray(self.speed_factor(th))[..., None] * self.curve.tangent(th)


@dataclass(frozen=True)
class CssBranch:
    """One branch of the centre symmetry set (envelope of affine chords).

    degenerate is set when the curve is centrally symmetric along this pair
    offset, so every chord passes through one point and the branch collapses
    to it (reported as center).
    """

    pair_offset: int
    index: int
    domain: tuple[float, float]
    curve: RosetteCurve
    degenerate: bool = False
    center: tuple[float, float] | None = None

    kind = CSS
    lam = None

    @property
    def label(self) -> str:
        return f"css k={self.pair_offset}"

    @property
    def sign(self) -> float:
        return (-1.0) ** (self.pair_offset + 1)

    def numerator(self, theta) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        k1 = np.asarray(self.curve.curvature(th))
        k2 = np.asarray(self.curve.curvature(th + self.pair_offset * PI))
        a = self.curve.position(th)
        b = self.curve.position(th + self.pair_offset * PI)
        return k1[..., None] * a + self.sign * k2[..., None] * b

    def denominator(self, theta):
        th = np.asarray(theta, dtype=float)
        out = np.asarray(self.curve.curvature(th)) + self.sign * np.asarray(
            self.curve.curvature(th + self.pair_offset * PI)
        )
        return float(out) if out.ndim == 0 else out

    def point(self, theta) -> np.ndarray:
        den = np.asarray(self.denominator(theta))
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.numerator(theta) / den[..., None]

    def velocity(self, theta) -> np.ndarray:
        """Analytic branch velocity via the quotient rule.

        d/dtheta kappa = -rho' / rho**2; the curve-position contributions of
        the two chord ends cancel, leaving only curvature-derivative terms.
        """
        th = np.asarray(theta, dtype=float)
        th2 = th + self.pair_offset * PI
        k1p = -np.asarray(self.curve.rho_prime(th)) * np.asarray(self.curve.curvature(th)) ** 2
        k2p = -np.asarray(self.curve.rho_prime(th2)) * np.asarray(self.curve.curvature(th2)) ** 2
        num_prime = k1p[..., None] * self.curve.position(th) + self.sign * k2p[..., None] * self.curve.position(th2)
        den = np.asarray(self.denominator(th))
        den_prime = k1p + self.sign * k2p
        with np.errstate(divide="ignore", invalid="ignore"):
            return (num_prime - self.point(th) * den_prime[..., None]) / den[..., None]

    @property
    def pole_threshold(self) -> float:
        return _pole_threshold(self.curve, self.pair_offset)

    def is_pole(self, theta):
        return np.abs(self.denominator(theta)) < self.pole_threshold

    def pole_parameters(self, samples: int = 4096) -> np.ndarray:
        """Zeros of the denominator over the branch domain, refined by bracketing."""
        lo, hi = self.domain
        grid = np.linspace(lo, hi, samples + 1)
        den = np.asarray(self.denominator(grid))
        roots: list[float] = []
        for i in np.nonzero(den == 0.0)[0]:
            roots.append(float(grid[i]))
        for i in np.nonzero(den[:-1] * den[1:] < 0.0)[0]:
            roots.append(float(brentq(lambda t: self.denominator(t), grid[i], grid[i + 1], xtol=1e-12)))
        length = hi - lo
        roots = sorted(((r - lo) % length) + lo for r in roots)
        deduped: list[float] = []
        for r in roots:
            if not deduped or r - deduped[-1] > 1e-9:
                deduped.append(r)
        # first and last may be the same root seen across the periodic seam
        if len(deduped) > 1 and (deduped[0] - lo) + (hi - deduped[-1]) < 1e-9:
            deduped.pop()
        return np.asarray(deduped)


Branch = AffineBranch | CssBranch


@dataclass(frozen=True)
class BranchSet:
    curve: RosetteCurve
    branches: tuple[Branch, ...]
    kind: str
    lam: float | None = None

    def __iter__(self):
        return iter(self.branches)

    def __len__(self) -> int:
        return len(self.branches)

    def __getitem__(self, i):
        return self.branches[i]


@lru_cache(maxsize=512)
def _pole_threshold(curve: RosetteCurve, pair_offset: int) -> float:
    grid = np.linspace(0.0, curve.period, 4096, endpoint=False)
    kappa_max = max(np.max(np.abs(curve.curvature(grid))), np.max(np.abs(curve.curvature(grid + pair_offset * PI))))
    return POLE_GUARD * float(kappa_max)


def wigner_branches(curve: RosetteCurve) -> BranchSet:
    """The n branches of the midpoint (Wigner) caustic of an n-rosette."""
    ensure_rosette(curve)
    n = curve.n
    full = 2.0 * n * PI
    branches = [
        AffineBranch(WIGNER_CAUSTIC, 0.5, k, k, (0.0, full), curve, 0.5) for k in range(1, n)
    ]
    branches.append(AffineBranch(WIGNER_CAUSTIC, 0.5, n, n, (0.0, n * PI), curve, 0.5))
    return BranchSet(curve, tuple(branches), WIGNER_CAUSTIC, 0.5)


def equidistant_branches(curve: RosetteCurve, lam: float) -> BranchSet:
    """The 2n-1 branches of the affine lambda-equidistant, for lambda in (0,1) \\ {0.5}."""
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise InvalidLambda(f"lambda must lie in (0, 1), got {lam!r}")
    if lam == 0.5:
        raise InvalidLambda("lambda = 0.5 is the Wigner caustic; use wigner_branches")
    ensure_rosette(curve)
    n = curve.n
    full = (0.0, 2.0 * n * PI)
    branches: list[AffineBranch] = []
    for k in range(1, n):
        branches.append(AffineBranch(EQUIDISTANT, lam, k, k, full, curve, lam))
    branches.append(AffineBranch(EQUIDISTANT, lam, n, n, full, curve, lam))
    for k in range(1, n):
        branches.append(AffineBranch(EQUIDISTANT, lam, k, n + k, full, curve, 1.0 - lam))
    return BranchSet(curve, tuple(branches), EQUIDISTANT, lam)


def css_branches(curve: RosetteCurve) -> BranchSet:
    """The n branches of the centre symmetry set of an n-rosette."""
    ensure_rosette(curve)
    n = curve.n
    branches: list[CssBranch] = []
    for k in range(1, n + 1):
        domain = (0.0, n * PI) if k == n else (0.0, 2.0 * n * PI)
        branches.append(_build_css_branch(curve, k, domain, index=k))
    return BranchSet(curve, tuple(branches), CSS, None)


def _build_css_branch(curve: RosetteCurve, k: int, domain: tuple[float, float], index: int) -> CssBranch:
    probe = CssBranch(k, index, domain, curve)
    grid = np.linspace(domain[0], domain[1], 2048, endpoint=False)
    den = np.asarray(probe.denominator(grid))
    valid = np.abs(den) >= probe.pole_threshold
    if not valid.any():
        # Denominator identically ~0: every chord passes through the symmetry
        # center, which is the midpoint of any pair.
        mid = 0.5 * (curve.position(0.0) + curve.position(k * PI))
        return CssBranch(k, index, domain, curve, degenerate=True, center=(float(mid[0]), float(mid[1])))
    pts = probe.point(grid[valid])
    mean = pts.mean(axis=0)
    spread = float(np.max(np.hypot(pts[:, 0] - mean[0], pts[:, 1] - mean[1])))
    if spread < COLLAPSE_GUARD * curve.diameter():
        return CssBranch(k, index, domain, curve, degenerate=True, center=(float(mean[0]), float(mean[1])))
    return probe


def equidistant_point(curve: RosetteCurve, theta, pair_offset: int, lam: float) -> np.ndarray:
    """lam*gamma(theta) + (1-lam)*gamma(theta + k*pi), for any real lam."""
    th = np.asarray(theta, dtype=float)
    return lam * curve.position(th) + (1.0 - lam) * curve.position(th + pair_offset * PI)


def require_not_degenerate(branch: Branch) -> None:
    if isinstance(branch, CssBranch) and branch.degenerate:
        raise DegenerateBranch(f"{branch.label} collapses to the point {branch.center}")
