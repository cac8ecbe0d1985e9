"""Cusp location and counting, plus the structural checks built on it.

Affine branches have velocity speed_factor(theta) * (-sin theta, cos theta)
with a never-vanishing direction factor, so their cusps are exactly the
zeros of the scalar speed factor: a robust 1-D bracketing problem solved to
machine precision.  Centre-symmetry branches get a numeric detector instead:
a refined local minimum of the analytic speed that also reverses the unit
velocity across it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .equidistants import (
    CSS,
    EQUIDISTANT,
    WIGNER_CAUSTIC,
    AffineBranch,
    Branch,
    BranchSet,
    CssBranch,
    css_branches,
    equidistant_branches,
    wigner_branches,
)
from .errors import DegenerateBranch, TangentZeroWarning
from .supportfn import RosetteCurve

PI = math.pi

# Identically-zero detection for the cusp condition, relative to max |rho|.
DEGENERATE_GUARD = 1e-12
# |condition'| below this (relative) marks a non-simple zero.
SIMPLE_ZERO_GUARD = 1e-7
# Velocity-reversal probe offset for the CSS cusp detector.
REVERSAL_DELTA = 1e-4


@dataclass(frozen=True)
class CuspReport:
    branch_label: str
    cusp_parameters: np.ndarray
    cusp_positions: np.ndarray
    count: int
    parity: str  # "even" | "odd"
    warnings: tuple[str, ...] = field(default=())


def cusp_condition(curve: RosetteCurve, pair_offset: int, lam: float):
    """The scalar whose zeros are the cusps of the (lam, k) affine branch."""
    sign = (-1.0) ** pair_offset

    def condition(theta):
        th = np.asarray(theta, dtype=float)
        out = lam * np.asarray(curve.rho(th)) + (1.0 - lam) * sign * np.asarray(curve.rho(th + pair_offset * PI))
        return float(out) if out.ndim == 0 else out

    return condition


def _report(branch: Branch, params: list[float], notes: list[str]) -> CuspReport:
    lo, hi = branch.domain
    arr = np.sort(np.asarray([((t - lo) % (hi - lo)) + lo for t in params], dtype=float))
    positions = branch.point(arr) if arr.size else np.zeros((0, 2))
    return CuspReport(
        branch_label=branch.label,
        cusp_parameters=arr,
        cusp_positions=positions,
        count=int(arr.size),
        parity="odd" if arr.size % 2 else "even",
        warnings=tuple(notes),
    )


def find_cusps(branch: AffineBranch) -> CuspReport:
    """All simple zeros of the cusp condition on the branch domain.

    Raises DegenerateBranch when the condition vanishes identically (the
    whole branch is a point, e.g. the midpoint caustic of a circle).
    """
    if not isinstance(branch, AffineBranch):
        raise TypeError("find_cusps handles Wigner/equidistant branches; use find_css_cusps for CSS")
    lo, hi = branch.domain
    length = hi - lo
    max_j = branch.curve.support.max_numerator
    m = max(512, 64 * max_j)
    grid = np.linspace(lo, hi, m + 1)
    values = np.asarray(branch.speed_factor(grid))

    rho_scale = float(
        max(
            np.max(np.abs(branch.curve.rho(grid))),
            np.max(np.abs(branch.curve.rho(grid + branch.pair_offset * PI))),
        )
    )
    if np.max(np.abs(values)) < DEGENERATE_GUARD * rho_scale:
        raise DegenerateBranch(f"{branch.label}: cusp condition vanishes identically")

    roots: list[float] = []
    notes: list[str] = []
    for i in np.nonzero(values == 0.0)[0]:
        roots.append(float(grid[i]))
    for i in np.nonzero(values[:-1] * values[1:] < 0.0)[0]:
        roots.append(float(brentq(branch.speed_factor, grid[i], grid[i + 1], xtol=1e-12, rtol=8.9e-16)))

    # Tangential touches: near-zero local minima of |condition| with no sign change.
    mag = np.abs(values)
    touch = (mag < 1e-9 * rho_scale) & (mag <= np.roll(mag, 1)) & (mag <= np.roll(mag, -1))
    for i in np.nonzero(touch)[0]:
        t = float(grid[i])
        if all(abs(t - r) > 1e-6 and abs(abs(t - r) - length) > 1e-6 for r in roots):
            notes.append(f"non-simple zero near theta = {t:.6g}")
            warnings.warn(notes[-1], TangentZeroWarning, stacklevel=2)
            roots.append(t)

    deduped: list[float] = []
    for r in sorted(((r - lo) % length) + lo for r in roots):
        if not deduped or r - deduped[-1] > 1e-9:
            deduped.append(r)
    if len(deduped) > 1 and (deduped[0] - lo) + (hi - deduped[-1]) < 1e-9:
        deduped.pop()

    for r in deduped:
        slope = abs(branch.speed_factor_prime(r))
        if slope < SIMPLE_ZERO_GUARD * rho_scale:
            msg = f"zero at theta = {r:.6g} is not simple (|condition'| = {slope:.3g})"
            if msg not in notes:
                notes.append(msg)
                warnings.warn(msg, TangentZeroWarning, stacklevel=2)
    return _report(branch, deduped, notes)


def find_css_cusps(branch: CssBranch) -> CuspReport:
    """Cusps of a centre-symmetry branch: refined speed minima that reverse direction."""
    if not isinstance(branch, CssBranch):
        raise TypeError("find_css_cusps handles CSS branches only")
    if branch.degenerate:
        raise DegenerateBranch(f"{branch.label} collapses to the point {branch.center}")

    lo, hi = branch.domain
    length = hi - lo
    poles = branch.pole_parameters()

    # The branch is periodic over its domain, so arcs live on the circle.
    if poles.size == 0:
        probe = np.linspace(lo, hi, 1024, endpoint=False)
        speeds = np.linalg.norm(branch.velocity(probe), axis=-1)
        start = float(probe[int(np.argmax(speeds))])
        arcs = [(start, start + length)]
    else:
        arcs = [(float(poles[i]), float(poles[i + 1])) for i in range(len(poles) - 1)]
        arcs.append((float(poles[-1]), float(poles[0]) + length))

    max_j = branch.curve.support.max_numerator
    samples = max(1024, 64 * max_j)
    margin_of = lambda a, b: max(2.0 * REVERSAL_DELTA, 1e-4 * (b - a))

    # Speed tolerance from the branch extent (sampled away from poles).
    all_pts = []
    arc_grids = []
    for a, b in arcs:
        m = margin_of(a, b)
        if b - a <= 2.5 * m:
            arc_grids.append(None)
            continue
        grid = np.linspace(a + m, b - m, samples)
        arc_grids.append(grid)
        all_pts.append(branch.point(grid))
    if not all_pts:
        raise DegenerateBranch(f"{branch.label}: no pole-free arc wide enough to analyze")
    pts = np.vstack(all_pts)
    spans = pts.max(axis=0) - pts.min(axis=0)
    diameter = float(np.hypot(spans[0], spans[1]))
    v_tol = 1e-5 * diameter / length

    def speed(t: float) -> float:
        return float(np.linalg.norm(branch.velocity(t)))

    cusps: list[float] = []
    for grid in arc_grids:
        if grid is None:
            continue
        sp = np.linalg.norm(branch.velocity(grid), axis=-1)
        interior = np.nonzero((sp[1:-1] < sp[:-2]) & (sp[1:-1] < sp[2:]))[0] + 1
        for i in interior:
            res = minimize_scalar(speed, bounds=(grid[i - 1], grid[i + 1]), method="bounded", options={"xatol": 1e-10})
            t0 = float(res.x)
            if float(res.fun) >= v_tol:
                continue
            va = branch.velocity(t0 - REVERSAL_DELTA)
            vb = branch.velocity(t0 + REVERSAL_DELTA)
            na, nb = np.linalg.norm(va), np.linalg.norm(vb)
            if na == 0.0 or nb == 0.0:
                continue
            if float(np.dot(va, vb)) / (na * nb) < 0.0:
                cusps.append(t0)

    deduped: list[float] = []
    for t in sorted(((t - lo) % length) + lo for t in cusps):
        if not deduped or t - deduped[-1] > 1e-8:
            deduped.append(t)
    if len(deduped) > 1 and (deduped[0] - lo) + (hi - deduped[-1]) < 1e-8:
        deduped.pop()
    return _report(branch, deduped, [])


@dataclass(frozen=True)
class TheoremCheck:
    name: str
    verdict: str  # "pass" | "fail" | "vacuous" | "skipped"
    detail: str


@dataclass(frozen=True)
class TheoremReport:
    rotation_number: int
    checks: tuple[TheoremCheck, ...]
    wigner_counts: tuple[int, ...]
    css_counts: tuple[int, ...]
    equidistant_counts: dict[float, tuple[int, ...]]

    def verdict(self, name: str) -> str:
        for check in self.checks:
            if check.name == name:
                return check.verdict
        raise KeyError(name)


def _branch_cusp_counts(branch_set: BranchSet) -> tuple[list[int | None], list[CuspReport | None]]:
    counts: list[int | None] = []
    reports: list[CuspReport | None] = []
    for branch in branch_set:
        try:
            rep = find_css_cusps(branch) if isinstance(branch, CssBranch) else find_cusps(branch)
            counts.append(rep.count)
            reports.append(rep)
        except DegenerateBranch:
            counts.append(None)
            reports.append(None)
    return counts, reports


def check_theorems(curve: RosetteCurve, lambdas: tuple[float, ...] = (0.2, 0.3, 0.45)) -> TheoremReport:
    """Evaluate the structural claims about cusp counts for one rosette.

    Parity and the Wigner-vs-CSS inequality are stated for ovals, so they are
    skipped for rotation number > 1; branch-count checks always run.
    Degenerate branches (centrally symmetric inputs) yield vacuous verdicts.
    """
    n = curve.n
    checks: list[TheoremCheck] = []

    wc = wigner_branches(curve)
    cs = css_branches(curve)
    eqs = {lam: equidistant_branches(curve, lam) for lam in lambdas}

    expected = {"wigner": n, "css": n}
    ok = len(wc) == n and len(cs) == n and all(len(bs) == 2 * n - 1 for bs in eqs.values())
    detail = f"wigner={len(wc)}/{n} css={len(cs)}/{n} " + " ".join(
        f"eq[{lam:g}]={len(bs)}/{2 * n - 1}" for lam, bs in eqs.items()
    )
    checks.append(TheoremCheck("branch_counts", "pass" if ok else "fail", detail))

    wc_counts, _ = _branch_cusp_counts(wc)
    css_counts, _ = _branch_cusp_counts(cs)
    eq_counts = {lam: _branch_cusp_counts(bs)[0] for lam, bs in eqs.items()}

    def _parity_check(name: str, counts: list[int | None], want_odd: bool) -> TheoremCheck:
        if n != 1:
            return TheoremCheck(name, "skipped", f"stated for ovals (n={n})")
        if any(c is None for c in counts):
            return TheoremCheck(name, "vacuous", "degenerate branch")
        bad = [c for c in counts if c % 2 != (1 if want_odd else 0)]
        verdict = "pass" if not bad else "fail"
        return TheoremCheck(name, verdict, f"counts={counts}")

    checks.append(_parity_check("wigner_cusps_odd", wc_counts, want_odd=True))
    checks.append(_parity_check("css_cusps_odd", css_counts, want_odd=True))

    if n != 1:
        checks.append(TheoremCheck("wigner_at_least_css", "skipped", f"stated for ovals (n={n})"))
    elif any(c is None for c in wc_counts) or any(c is None for c in css_counts):
        checks.append(TheoremCheck("wigner_at_least_css", "vacuous", "degenerate branch"))
    else:
        wtot, ctot = sum(wc_counts), sum(css_counts)
        checks.append(
            TheoremCheck("wigner_at_least_css", "pass" if wtot >= ctot else "fail", f"wigner={wtot} css={ctot}")
        )

    all_even = True
    vacuous = False
    details = []
    for lam, counts in eq_counts.items():
        if any(c is None for c in counts):
            vacuous = True
        else:
            all_even = all_even and all(c % 2 == 0 for c in counts)
        details.append(f"lambda={lam:g}: {counts}")
    verdict = "vacuous" if vacuous else ("pass" if all_even else "fail")
    checks.append(TheoremCheck("equidistant_cusps_even", verdict, "; ".join(details)))

    return TheoremReport(
        rotation_number=n,
        checks=tuple(checks),
        wigner_counts=tuple(-1 if c is None else c for c in wc_counts),
        css_counts=tuple(-1 if c is None else c for c in css_counts),
        equidistant_counts={lam: tuple(-1 if c is None else c for c in counts) for lam, counts in eq_counts.items()},
    )
