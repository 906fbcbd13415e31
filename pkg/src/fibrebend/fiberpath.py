"""Fibre winding paths on the actuator surface.

The winding surface is the offset of the chamber wall by the fibre clearance
plus half a fibre diameter.  Its cross-section is a closed piecewise curve
(arcs and lines) parametrised by arc length s, counter-clockwise; a helix is
the image of a straight line in the developed (s, z) plane.  Single-helix
(SH) paths run base to tip; double-helix (DH) paths continue from the tip
back to the base while wrapping in the same rotational sense, which flips the
3D handedness of the return pass and makes the strands cross once per half
loop.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import ActuatorSpec, GeometryAParams, GeometryBParams

CSV_MAGIC = "# fibrebend-path v1"


class WindingError(ValueError):
    pass


# ---------------------------------------------------------------------------
# surface profile


@dataclass(frozen=True)
class _Arc:
    cx: float
    cy: float
    r: float
    a0: float
    a1: float

    @property
    def length(self) -> float:
        return abs(self.a1 - self.a0) * self.r

    def point(self, t: float) -> tuple[float, float]:
        a = self.a0 + (self.a1 - self.a0) * t
        return self.cx + self.r * math.cos(a), self.cy + self.r * math.sin(a)

    def nearest(self, x: float, y: float) -> tuple[float, float]:
        """(local arc length, distance) of the nearest point on the piece."""
        dx, dy = x - self.cx, y - self.cy
        a = math.atan2(dy, dx)
        lo, hi = min(self.a0, self.a1), max(self.a0, self.a1)
        # bring a into the arc's angular window if possible
        for cand in (a, a + 2.0 * math.pi, a - 2.0 * math.pi):
            if lo - 1e-12 <= cand <= hi + 1e-12:
                t = (cand - self.a0) / (self.a1 - self.a0)
                d = abs(math.hypot(dx, dy) - self.r)
                return t * self.length, d
        # off the angular window: clamp to the closer endpoint
        best = None
        for t in (0.0, 1.0):
            px, py = self.point(t)
            d = math.hypot(x - px, y - py)
            if best is None or d < best[1]:
                best = (t * self.length, d)
        return best


@dataclass(frozen=True)
class _Line:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def length(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)

    def point(self, t: float) -> tuple[float, float]:
        return (self.x0 + (self.x1 - self.x0) * t,
                self.y0 + (self.y1 - self.y0) * t)

    def nearest(self, x: float, y: float) -> tuple[float, float]:
        vx, vy = self.x1 - self.x0, self.y1 - self.y0
        L2 = vx * vx + vy * vy
        t = 0.0 if L2 == 0 else max(0.0, min(1.0, ((x - self.x0) * vx + (y - self.y0) * vy) / L2))
        px, py = self.point(t)
        return t * self.length, math.hypot(x - px, y - py)


@dataclass
class WindingSurface:
    """Closed profile in the section plane, parametrised CCW by arc length."""

    pieces: list
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._cum = np.concatenate([[0.0], np.cumsum([p.length for p in self.pieces])])

    @property
    def perimeter(self) -> float:
        return float(self._cum[-1])

    def point(self, s: float) -> tuple[float, float]:
        s = s % self.perimeter
        i = int(np.searchsorted(self._cum, s, side="right") - 1)
        i = min(i, len(self.pieces) - 1)
        piece = self.pieces[i]
        local = s - self._cum[i]
        return piece.point(local / piece.length)

    def points(self, s: np.ndarray) -> np.ndarray:
        return np.array([self.point(v) for v in np.asarray(s, dtype=float)])

    def project(self, x: float, y: float) -> tuple[float, float]:
        """(global arc length, distance) of the nearest profile point."""
        best_s, best_d = 0.0, math.inf
        for i, piece in enumerate(self.pieces):
            s_loc, d = piece.nearest(x, y)
            if d < best_d:
                best_s, best_d = self._cum[i] + s_loc, d
        return best_s % self.perimeter, best_d

    def to_dict(self) -> dict:
        return dict(self.descriptor)


def _surface_from_descriptor(desc: dict) -> "WindingSurface":
    if desc["kind"] == "crown_channel":
        return _crown_channel_surface(desc["wall_radius"], desc["floor"], desc["offset"])
    if desc["kind"] == "circle":
        return _circle_surface(desc["cx"], desc["cy"], desc["r"])
    raise WindingError(f"unknown winding surface {desc['kind']!r}")


def _crown_channel_surface(wall_radius: float, floor: float, offset: float) -> WindingSurface:
    """Offset of the chamber hull: crown arc, two corner arcs, flat chord."""
    phi = math.asin(floor / wall_radius)
    vx = wall_radius * math.cos(phi)
    r = wall_radius + offset
    pieces = [
        _Arc(vx, floor, offset, -0.5 * math.pi, phi),            # right corner
        _Arc(0.0, 0.0, r, phi, math.pi - phi),                   # crown
        _Arc(-vx, floor, offset, math.pi - phi, 1.5 * math.pi),  # left corner
        _Line(-vx, floor - offset, vx, floor - offset),          # flat-side chord
    ]
    return WindingSurface(pieces, {"kind": "crown_channel", "wall_radius": wall_radius,
                                   "floor": floor, "offset": offset})


def _circle_surface(cx: float, cy: float, r: float) -> WindingSurface:
    pieces = [_Arc(cx, cy, r, -0.5 * math.pi, 1.5 * math.pi)]
    return WindingSurface(pieces, {"kind": "circle", "cx": cx, "cy": cy, "r": r})


def winding_surface(spec: ActuatorSpec, chamber_index: int = 0,
                    radial_offset: float | None = None) -> WindingSurface:
    """Winding surface for one chamber of the actuator."""
    p = spec.params
    if isinstance(p, GeometryAParams):
        if chamber_index != 0:
            raise WindingError(f"chamber_index {chamber_index} out of range for 1 chamber")
        off = p.winding_offset if radial_offset is None else radial_offset
        return _crown_channel_surface(p.chamber_outer_radius, p.chamber_floor, off)
    if isinstance(p, GeometryBParams):
        off = p.winding_offset if radial_offset is None else radial_offset
        centers = p.chamber_centers
        if not 0 <= chamber_index < len(centers):
            raise WindingError(f"chamber_index {chamber_index} out of range "
                               f"for {len(centers)} chambers")
        cx, cy = centers[chamber_index]
        return _circle_surface(cx, cy, p.chamber_radius + off)
    raise WindingError(f"no winding surface for params {type(p).__name__}")


# ---------------------------------------------------------------------------
# winding parameters and path


@dataclass(frozen=True)
class WindingSpec:
    style: str = "SH"              # "SH" single pass, "DH" there-and-back
    turns: int = 30                # per pass
    chirality: str = "ccw"
    axial_span: float | None = None  # [mm]; None -> chamber length of the actuator
    samples_per_turn: int = 36
    start_phase: float = 0.0       # [mm] arc-length offset of the first point
    radial_offset: float | None = None  # [mm]; None -> resolved from the section
    chamber_index: int = 0

    def validate(self) -> None:
        if self.style not in ("SH", "DH"):
            raise WindingError(f"style must be SH or DH, got {self.style!r}")
        if self.chirality not in ("ccw", "cw"):
            raise WindingError(f"chirality must be ccw or cw, got {self.chirality!r}")
        if not (isinstance(self.turns, int) and self.turns >= 1):
            raise WindingError(f"turns must be a positive integer, got {self.turns!r}")
        if self.samples_per_turn < 8:
            raise WindingError(f"samples_per_turn >= 8 required, got {self.samples_per_turn}")
        if self.axial_span is not None and not self.axial_span > 0:
            raise WindingError(f"axial_span must be positive, got {self.axial_span}")


@dataclass(eq=False)
class FiberPath:
    points: np.ndarray             # (n, 3) [mm]
    style: str
    turns: int
    chirality: str
    pitch: float                   # [mm] axial advance per turn
    axial_span: float
    samples_per_turn: int
    start_phase: float
    surface: WindingSurface

    @property
    def total_length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))

    @property
    def lead_angle_deg(self) -> float:
        return math.degrees(math.atan2(self.pitch, self.surface.perimeter))

    def to_csv(self) -> str:
        meta = {"style": self.style, "turns": self.turns, "chirality": self.chirality,
                "pitch": self.pitch, "axial_span": self.axial_span,
                "samples_per_turn": self.samples_per_turn,
                "start_phase": self.start_phase, "surface": self.surface.to_dict()}
        lines = [CSV_MAGIC, "# meta " + json.dumps(meta, sort_keys=True),
                 "x_mm,y_mm,z_mm"]
        for x, y, z in self.points:
            lines.append(f"{float(x)!r},{float(y)!r},{float(z)!r}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_csv(text: str) -> "FiberPath":
        lines = text.strip().splitlines()
        if not lines or lines[0] != CSV_MAGIC:
            raise WindingError("not a fibre path table (missing magic line)")
        meta = json.loads(lines[1].removeprefix("# meta "))
        if lines[2] != "x_mm,y_mm,z_mm":
            raise WindingError(f"unexpected header {lines[2]!r}")
        pts = np.array([[float(v) for v in ln.split(",")] for ln in lines[3:]])
        return FiberPath(points=pts, style=meta["style"], turns=meta["turns"],
                         chirality=meta["chirality"], pitch=meta["pitch"],
                         axial_span=meta["axial_span"],
                         samples_per_turn=meta["samples_per_turn"],
                         start_phase=meta["start_phase"],
                         surface=_surface_from_descriptor(meta["surface"]))


def generate_helix(spec: ActuatorSpec, winding: WindingSpec) -> FiberPath:
    """Sample the winding as a polyline that adheres to the surface exactly."""
    winding.validate()
    surf = winding_surface(spec, winding.chamber_index, winding.radial_offset)
    span = spec.chamber_length if winding.axial_span is None else winding.axial_span
    n, spt = winding.turns, winding.samples_per_turn
    P = surf.perimeter
    sign = 1.0 if winding.chirality == "ccw" else -1.0
    pitch = span / n

    k = np.arange(n * spt + 1, dtype=float)
    u_fwd = k * (P / spt)
    z_fwd = k * (pitch / spt)
    if winding.style == "SH":
        u, z = u_fwd, z_fwd
    else:
        # return pass keeps wrapping the same way while descending
        kr = np.arange(1, n * spt + 1, dtype=float)
        u = np.concatenate([u_fwd, u_fwd[-1] + kr * (P / spt)])
        z = np.concatenate([z_fwd, z_fwd[-1] - kr * (pitch / spt)])

    xy = surf.points(winding.start_phase + sign * u)
    pts = np.column_stack([xy[:, 0], xy[:, 1], z])
    return FiberPath(points=pts, style=winding.style, turns=n,
                     chirality=winding.chirality, pitch=pitch, axial_span=span,
                     samples_per_turn=spt, start_phase=winding.start_phase,
                     surface=surf)


def mirror_path(path: FiberPath) -> FiberPath:
    """Reflect across the sagittal plane; chirality flips, pitch is kept."""
    pts = path.points * np.array([-1.0, 1.0, 1.0])
    desc = dict(path.surface.descriptor)
    if desc.get("kind") == "circle":
        desc["cx"] = -desc["cx"]
    surf = _surface_from_descriptor(desc)
    return FiberPath(points=pts, style=path.style, turns=path.turns,
                     chirality="cw" if path.chirality == "ccw" else "ccw",
                     pitch=path.pitch, axial_span=path.axial_span,
                     samples_per_turn=path.samples_per_turn,
                     start_phase=path.start_phase, surface=surf)


def path_metrics(path: FiberPath) -> dict:
    """Summary numbers for reports."""
    return {
        "style": path.style,
        "turns": path.turns,
        "chirality": path.chirality,
        "pitch_mm": path.pitch,
        "length_mm": path.total_length,
        "lead_angle_deg": path.lead_angle_deg,
        "samples": int(len(path.points)),
        "crossings": crossing_count(path),
    }


# ---------------------------------------------------------------------------
# crossings in the developed plane


def developed_coordinates(path: FiberPath) -> np.ndarray:
    """Unwrapped arc-length coordinate u for every sample.

    Rebuilt from the 3D points by projecting onto the surface profile, so the
    result survives a CSV round trip.  Requires at least 8 samples per turn so
    the unwrap between neighbours is unambiguous.
    """
    P = path.surface.perimeter
    s = np.array([path.surface.project(x, y)[0] for x, y, _ in path.points])
    du = np.diff(s)
    du -= P * np.round(du / P)
    return np.concatenate([[s[0]], s[0] + np.cumsum(du)])


def crossing_count(path: FiberPath) -> int:
    """Transversal self-crossings of the winding on the developed surface.

    SH paths are monotone in z and never cross.  For DH paths the forward and
    return strands are compared at equal surface positions (u identical modulo
    the profile perimeter) and sign changes of the height difference are
    counted.
    """
    if path.style == "SH":
        return 0
    P = path.surface.perimeter
    u = developed_coordinates(path)
    z = path.points[:, 2]
    if u[-1] < u[0]:        # cw traversal: flip so u increases
        u = -u
    apex = int(np.argmax(z))
    uf, zf = u[:apex + 1], z[:apex + 1]
    ur, zr = u[apex:], z[apex:]

    tol = 1e-12 * max(path.axial_span, 1.0)
    total = 0
    m_lo = int(math.floor((ur[0] - uf[-1]) / P))
    m_hi = int(math.ceil((ur[-1] - uf[0]) / P))
    for m in range(m_lo, m_hi + 1):
        lo = max(uf[0], ur[0] - m * P)
        hi = min(uf[-1], ur[-1] - m * P)
        if hi - lo <= tol:
            continue
        knots = np.unique(np.concatenate([
            uf[(uf >= lo) & (uf <= hi)],
            ur[(ur - m * P >= lo) & (ur - m * P <= hi)] - m * P,
            [lo, hi]]))
        d = np.interp(knots, uf, zf) - np.interp(knots + m * P, ur, zr)
        sign = np.sign(np.where(np.abs(d) < tol, 0.0, d))
        sign = sign[sign != 0.0]
        if len(sign) > 1:
            total += int(np.sum(sign[1:] * sign[:-1] < 0))
    return total
