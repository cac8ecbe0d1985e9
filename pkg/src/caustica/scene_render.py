"""String-art line families and the deterministic SVG renderer.

A scene is a set of named curves plus an ordered list of line families
(curve tangents, affine chords, equidistant tangents).  Each family sweeps a
parameter range at a fixed step, every line is clipped to the world window,
and the result is written as layered SVG with fixed 3-decimal coordinates,
so identical scenes produce byte-identical files.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .errors import EmptyScene, UnknownCurveReference
from .generic_curves import ParametricCurve
from .supportfn import RosetteCurve

CURVE_TANGENTS = "curve_tangents"
AFFINE_CHORDS = "affine_chords"
EQUIDISTANT_TANGENTS = "equidistant_tangents"
FAMILY_KINDS = (CURVE_TANGENTS, AFFINE_CHORDS, EQUIDISTANT_TANGENTS)

_HEX_COLOR = re.compile(r"#[0-9A-Fa-f]{6}$")

# Pairs closer than this are treated as coincident and their chord skipped.
DEGENERATE_CHORD = 1e-12


def _check_color(color: str) -> str:
    if not _HEX_COLOR.match(color):
        raise ValueError(f"color must be an #RRGGBB hex string, got {color!r}")
    return color


@dataclass(frozen=True)
class LineFamily:
    source: str
    kind: str
    param_range: tuple[float, float]
    step: float
    color: str
    opacity: float
    stroke_width: float
    pair_offset: int | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.step <= 0.0:
            raise ValueError("step must be positive")
        if not 0.0 <= self.opacity <= 1.0:
            raise ValueError("opacity must lie in [0, 1]")
        if self.stroke_width <= 0.0:
            raise ValueError("stroke_width must be positive")
        _check_color(self.color)
        if self.kind == CURVE_TANGENTS and (self.lam is not None or self.pair_offset is not None):
            raise ValueError("curve_tangents takes neither lambda nor pair_offset")
        if self.kind == AFFINE_CHORDS and self.lam is not None:
            raise ValueError("affine_chords takes no lambda")
        if self.kind == EQUIDISTANT_TANGENTS and self.lam is None:
            raise ValueError("equidistant_tangents requires lambda")

    @property
    def offset(self) -> int:
        return 1 if self.pair_offset is None else self.pair_offset

    def thetas(self) -> np.ndarray:
        start, end = self.param_range
        count = math.floor((end - start) / self.step) + 1
        return start + self.step * np.arange(count)


@dataclass(frozen=True)
class Canvas:
    width: int = 1000
    height: int = 1000
    background: str = "#FFFFFF"
    world_window: tuple[float, float, float, float] | None = None  # None = auto
    margin: float = 0.05

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("canvas size must be positive")
        if self.margin < 0.0:
            raise ValueError("margin must be non-negative")
        _check_color(self.background)
        if self.world_window is not None:
            x0, x1, y0, y1 = self.world_window
            if not (x1 > x0 and y1 > y0):
                raise ValueError("world_window must have positive extent")


@dataclass(frozen=True)
class Overlay:
    source: str
    color: str
    opacity: float = 1.0
    stroke_width: float = 1.0
    samples: int = 1024

    def __post_init__(self):
        _check_color(self.color)
        if self.samples < 2:
            raise ValueError("overlay needs at least 2 samples")


SceneCurve = RosetteCurve | ParametricCurve


@dataclass(frozen=True)
class Scene:
    canvas: Canvas
    curves: tuple[tuple[str, SceneCurve], ...]
    families: tuple[LineFamily, ...] = ()
    overlays: tuple[Overlay, ...] = ()

    def curve(self, name: str) -> SceneCurve:
        for cid, curve in self.curves:
            if cid == name:
                return curve
        raise UnknownCurveReference(f"scene declares no curve {name!r}")


@dataclass(frozen=True)
class FamilyLines:
    points: np.ndarray  # (m, 2) anchor points
    directions: np.ndarray  # (m, 2)
    skipped: int


def _curve_domain(curve: SceneCurve) -> tuple[float, float]:
    if isinstance(curve, RosetteCurve):
        return (0.0, curve.period)
    return curve.domain


def _sample_positions(curve: SceneCurve, samples: int, endpoint: bool) -> np.ndarray:
    lo, hi = _curve_domain(curve)
    t = np.linspace(lo, hi, samples, endpoint=endpoint)
    return curve.position(t)


def family_lines(scene: Scene, family: LineFamily) -> FamilyLines:
    """Anchor points and directions of every line in the family.

    Chords of coincident pairs are dropped and counted in `skipped`.
    """
    curve = scene.curve(family.source)
    thetas = family.thetas()
    if family.kind == CURVE_TANGENTS:
        if isinstance(curve, RosetteCurve):
            return FamilyLines(curve.position(thetas), curve.tangent(thetas), 0)
        vel = curve.velocity(thetas)
        return FamilyLines(curve.position(thetas), vel / np.linalg.norm(vel, axis=-1, keepdims=True), 0)

    if not isinstance(curve, RosetteCurve):
        raise ValueError(f"{family.kind} families need a support-function curve, got {family.source!r}")
    k = family.offset
    a = curve.position(thetas)
    b = curve.position(thetas + k * math.pi)
    if family.kind == AFFINE_CHORDS:
        chord = b - a
        lengths = np.linalg.norm(chord, axis=-1)
        keep = lengths >= DEGENERATE_CHORD
        return FamilyLines(a[keep], chord[keep] / lengths[keep, None], int((~keep).sum()))
    anchors = family.lam * a + (1.0 - family.lam) * b
    return FamilyLines(anchors, curve.tangent(thetas), 0)


def clip_line(point, direction, window) -> tuple[np.ndarray, np.ndarray] | None:
    """Clip the infinite line point + t*direction to the window, or None.

    Exact parametric (enter/exit) clipping; returned endpoints sit on the
    window boundary up to round-off.
    """
    x0, x1, y0, y1 = window
    p = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    t_lo, t_hi = -math.inf, math.inf
    for axis, (lo, hi) in enumerate(((x0, x1), (y0, y1))):
        if d[axis] == 0.0:
            if not lo <= p[axis] <= hi:
                return None
            continue
        ta = (lo - p[axis]) / d[axis]
        tb = (hi - p[axis]) / d[axis]
        if ta > tb:
            ta, tb = tb, ta
        t_lo = max(t_lo, ta)
        t_hi = min(t_hi, tb)
    if not t_lo < t_hi:
        return None
    return p + t_lo * d, p + t_hi * d


@dataclass(frozen=True)
class FamilyStats:
    index: int
    kind: str
    source: str
    lines: int
    skipped: int
    clipped_out: int

    @property
    def drawn(self) -> int:
        return self.lines - self.clipped_out


@dataclass(frozen=True)
class RenderReport:
    window: tuple[float, float, float, float]
    window_mode: str  # "auto" | "explicit"
    families: tuple[FamilyStats, ...] = ()
    overlays: int = 0

    def to_text(self) -> str:
        lines = ["render report"]
        x0, x1, y0, y1 = self.window
        lines.append(f"world_window = [{x0:.6g}, {x1:.6g}] x [{y0:.6g}, {y1:.6g}] ({self.window_mode})")
        for st in self.families:
            lines.append(
                f"family[{st.index}] kind={st.kind} curve={st.source} "
                f"lines={st.lines} skipped={st.skipped} clipped_out={st.clipped_out} drawn={st.drawn}"
            )
        lines.append(f"overlays = {self.overlays}")
        return "\n".join(lines) + "\n"


def _auto_window(scene: Scene) -> tuple[float, float, float, float]:
    pts = np.vstack([_sample_positions(curve, 4096, endpoint=True) for _, curve in scene.curves])
    x0, y0 = pts.min(axis=0)
    x1, y1 = pts.max(axis=0)
    margin = scene.canvas.margin
    pad = margin * max(x1 - x0, y1 - y0, 1e-9)
    return (x0 - pad, x1 + pad, y0 - pad, y1 + pad)


def _effective_window(scene: Scene) -> tuple[tuple[float, float, float, float], str]:
    """Window matched to the canvas aspect ratio by expanding the short side.

    Uniform scale plus centering: the declared window is never distorted,
    only padded, so lines run to the canvas edges.
    """
    if scene.canvas.world_window is not None:
        window, mode = scene.canvas.world_window, "explicit"
    else:
        window, mode = _auto_window(scene), "auto"
    x0, x1, y0, y1 = window
    w, h = x1 - x0, y1 - y0
    cw, ch = scene.canvas.width, scene.canvas.height
    if w * ch >= h * cw:
        want_h = w * ch / cw
        cy = 0.5 * (y0 + y1)
        y0, y1 = cy - 0.5 * want_h, cy + 0.5 * want_h
    else:
        want_w = h * cw / ch
        cx = 0.5 * (x0 + x1)
        x0, x1 = cx - 0.5 * want_w, cx + 0.5 * want_w
    return (x0, x1, y0, y1), mode


def _fmt(value: float) -> str:
    # fixed 3 decimals, round-half-even, no negative zero
    text = f"{value:.3f}"
    return "0.000" if text == "-0.000" else text


def render_svg(scene: Scene) -> tuple[str, RenderReport]:
    """Render the scene to an SVG document string plus a render report.

    Output is deterministic: same scene, same bytes, regardless of worker
    thread count.
    """
    if not scene.curves:
        raise EmptyScene("scene declares no curves")
    for fam in scene.families:
        scene.curve(fam.source)
    for ov in scene.overlays:
        scene.curve(ov.source)

    window, mode = _effective_window(scene)
    x0, x1, y0, y1 = window
    cw, ch = scene.canvas.width, scene.canvas.height
    scale = cw / (x1 - x0)

    def to_px(pt: np.ndarray) -> tuple[float, float]:
        return ((pt[0] - x0) * scale, ch - (pt[1] - y0) * scale)

    generated = ordered_map(lambda fam: family_lines(scene, fam), scene.families)

    parts: list[str] = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{cw}" height="{ch}" viewBox="0 0 {cw} {ch}">',
        f'<rect x="0" y="0" width="{cw}" height="{ch}" fill="{scene.canvas.background}"/>',
    ]
    stats: list[FamilyStats] = []
    for idx, (fam, fl) in enumerate(zip(scene.families, generated)):
        parts.append(
            f'<g fill="none" stroke="{fam.color}" stroke-opacity="{fam.opacity:g}" '
            f'stroke-width="{fam.stroke_width:g}">'
        )
        clipped_out = 0
        for point, direction in zip(fl.points, fl.directions):
            seg = clip_line(point, direction, window)
            if seg is None:
                clipped_out += 1
                continue
            (ax, ay), (bx, by) = to_px(seg[0]), to_px(seg[1])
            parts.append(f'<path d="M{_fmt(ax)} {_fmt(ay)} L{_fmt(bx)} {_fmt(by)}"/>')
        parts.append("</g>")
        stats.append(FamilyStats(idx, fam.kind, fam.source, len(fl.points) + fl.skipped, fl.skipped, clipped_out))

    for ov in scene.overlays:
        curve = scene.curve(ov.source)
        closed = isinstance(curve, RosetteCurve) or getattr(curve, "closed", False)
        pts = _sample_positions(curve, ov.samples, endpoint=not closed)
        coords = [to_px(p) for p in pts]
        d = "M" + " L".join(f"{_fmt(px)} {_fmt(py)}" for px, py in coords) + ("Z" if closed else "")
        parts.append(
            f'<path d="{d}" fill="none" stroke="{ov.color}" stroke-opacity="{ov.opacity:g}" '
            f'stroke-width="{ov.stroke_width:g}"/>'
        )

    parts.append("</svg>")
    report = RenderReport(window=window, window_mode=mode, families=tuple(stats), overlays=len(scene.overlays))
    return "\n".join(parts) + "\n", report
