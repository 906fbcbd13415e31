"""Cross-section geometry of the bending actuator family.

All lengths in mm. The section lives in the x-y plane: x lateral, y through
the thickness, z is the actuator axis. The datum origin is the axis of the
cylindrical outer envelope; the flat face of the semi-cylindrical body sits
``datum_offset`` above it and the crown arc is part of the envelope circle.

Geometry A caries a single annular chamber channel hugging the crown; the
channel is bounded by concentric arcs (bore wall and outer wall) and floored
by the fabric plane.  Geometry B replaces it with a pair of cylindrical
chambers mirrored about the sagittal plane.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

SCHEMA_VERSION = "1"

# Resolution used when sampling arcs into polygons.  Doubling it changes the
# quadrature area well below the 0.01 % convergence requirement.
ARC_SAMPLES = 512

# Covers thinner than this are a moulding error, not just a warning.
MIN_FEATURE = 0.05  # mm


class GeometryError(ValueError):
    """Raised when section parameters do not describe a buildable actuator."""


# ---------------------------------------------------------------------------
# parameter blocks


@dataclass(frozen=True)
class GeometryAParams:
    """Single annular-chamber section. Defaults give the reference design."""

    chamber_diameter: float = 14.0   # [mm] bore of the chamber channel (inner wall)
    outer_diameter: float = 18.0     # [mm] envelope / crown circle
    flat_cover: float = 1.6          # [mm] silicone between flat face and fabric
    crown_cover: float = 0.2         # [mm] silicone outside the fibre on the crown
    fibre_clearance: float = 0.3     # [mm] silicone between fibre and chamber wall
    datum_offset: float = 2.0        # [mm] flat face height above the envelope axis
    fabric_thickness: float = 0.2    # [mm] inextensible fabric layer
    fibre_diameter: float = 0.206    # [mm] reinforcement fibre
    rod_diameter: float = 5.0        # [mm] winding former used during assembly
    width: float = 18.0              # [mm] envelope bound on section width
    chamber_length: float = 26.5     # [mm] pressurised span
    cap_length: float = 4.0          # [mm] stiff mounting cap
    tip_length: float = 7.0          # [mm] rounded tip segment
    thickness: float = 7.0           # [mm] flat face to crown apex

    # -- derived planes and radii (datum frame) --

    @property
    def crown_radius(self) -> float:
        return 0.5 * self.outer_diameter

    @property
    def flat_y(self) -> float:
        return self.datum_offset

    @property
    def fabric_bottom(self) -> float:
        return self.flat_y + self.flat_cover

    @property
    def fabric_top(self) -> float:
        return self.fabric_bottom + self.fabric_thickness

    @property
    def fabric_mid(self) -> float:
        return self.fabric_bottom + 0.5 * self.fabric_thickness

    @property
    def chamber_floor(self) -> float:
        # channel is sealed by the fabric plane
        return self.fabric_top

    @property
    def chamber_bore_radius(self) -> float:
        return 0.5 * self.chamber_diameter

    @property
    def chamber_outer_radius(self) -> float:
        # outer channel wall: everything outside it is fibre clearance,
        # fibre, then the crown cover
        return self.crown_radius - (self.crown_cover + self.fibre_diameter + self.fibre_clearance)

    @property
    def cage_radius(self) -> float:
        # silicone radially inside the fibre winding
        return self.chamber_outer_radius + self.fibre_clearance

    @property
    def winding_offset(self) -> float:
        # fibre centreline distance from the chamber wall
        return self.fibre_clearance + 0.5 * self.fibre_diameter

    @property
    def hoop_wall(self) -> float:
        # cover thickness over the chamber used by the thin-wall hoop model
        return self.crown_cover + self.fibre_diameter + self.fibre_clearance

    @property
    def total_length(self) -> float:
        return self.chamber_length + self.cap_length + self.tip_length

    def validate(self) -> None:
        for name in ("chamber_diameter", "outer_diameter", "flat_cover", "datum_offset",
                     "fabric_thickness", "fibre_diameter", "width", "chamber_length",
                     "cap_length", "tip_length", "thickness"):
            v = getattr(self, name)
            if not v > 0:
                raise GeometryError(f"{name} must be positive, got {v}")
        if self.chamber_diameter >= self.outer_diameter:
            raise GeometryError(
                f"chamber diameter {self.chamber_diameter} mm does not fit inside "
                f"the {self.outer_diameter} mm envelope")
        if self.chamber_outer_radius <= self.chamber_bore_radius:
            raise GeometryError(
                f"chamber channel collapsed: outer wall r={self.chamber_outer_radius:.3f} mm "
                f"inside bore r={self.chamber_bore_radius:.3f} mm (covers too thick "
                f"for the {self.outer_diameter} mm envelope)")
        if self.chamber_floor >= self.chamber_bore_radius:
            raise GeometryError(
                f"fabric plane y={self.chamber_floor:.3f} mm sits above the chamber bore "
                f"r={self.chamber_bore_radius:.3f} mm; no channel volume remains")
        if self.crown_cover < MIN_FEATURE or self.fibre_clearance < MIN_FEATURE:
            raise GeometryError(
                f"cover below the {MIN_FEATURE} mm moulding floor: "
                f"crown_cover={self.crown_cover}, fibre_clearance={self.fibre_clearance}")
        # thin covers mould, but only just; flag values under the reference design
        if self.crown_cover < 0.2:
            warnings.warn(f"crown cover {self.crown_cover} mm is thinner than the "
                          "0.2 mm reference; expect casting defects", stacklevel=2)
        if self.fibre_clearance < 0.3:
            warnings.warn(f"fibre clearance {self.fibre_clearance} mm is thinner than "
                          "the 0.3 mm reference; expect casting defects", stacklevel=2)


@dataclass(frozen=True)
class GeometryBParams:
    """Twin cylindrical chambers, mirrored about the sagittal plane."""

    chamber_diameter: float = 4.0    # [mm] each chamber bore
    chamber_separation: float = 9.0  # [mm] centre to centre
    chamber_elevation: float = 2.5   # [mm] chamber centres above the flat face
    min_wall: float = 0.5            # [mm] thinnest silicone wall allowed
    outer_diameter: float = 18.0     # [mm] envelope kept identical to geometry A
    datum_offset: float = 2.0        # [mm]
    flat_cover: float = 1.6          # [mm] used only with the fabric layer
    fabric_thickness: float = 0.2    # [mm]
    rod_diameter: float = 5.0        # [mm] winding former; fibre sits at its radius
    fibre_diameter: float = 0.206    # [mm]
    chamber_length: float = 26.5     # [mm]
    cap_length: float = 4.0          # [mm]
    tip_length: float = 7.0          # [mm]
    with_fabric_layer: bool = False  # plain B elongates; the layer makes it bend

    @property
    def crown_radius(self) -> float:
        return 0.5 * self.outer_diameter

    @property
    def flat_y(self) -> float:
        return self.datum_offset

    @property
    def fabric_mid(self) -> float:
        return self.flat_y + self.flat_cover + 0.5 * self.fabric_thickness

    @property
    def chamber_radius(self) -> float:
        return 0.5 * self.chamber_diameter

    @property
    def chamber_centers(self) -> tuple[tuple[float, float], tuple[float, float]]:
        y = self.flat_y + self.chamber_elevation
        x = 0.5 * self.chamber_separation
        return ((-x, y), (x, y))

    @property
    def winding_radius(self) -> float:
        # fibre is wound on the assembly rod before over-moulding
        return 0.5 * self.rod_diameter

    @property
    def winding_offset(self) -> float:
        return self.winding_radius - self.chamber_radius

    @property
    def total_length(self) -> float:
        return self.chamber_length + self.cap_length + self.tip_length

    def validate(self) -> None:
        if self.chamber_diameter <= 0 or self.chamber_length <= 0:
            raise GeometryError("chamber diameter and length must be positive")
        if self.winding_radius <= self.chamber_radius:
            raise GeometryError(
                f"winding rod radius {self.winding_radius} mm must clear the "
                f"chamber radius {self.chamber_radius} mm")
        r = self.chamber_radius
        gap = self.chamber_separation - 2.0 * r
        if gap < self.min_wall:
            raise GeometryError(
                f"wall between chambers is {gap:.3f} mm, below min_wall={self.min_wall} mm")
        for cx, cy in self.chamber_centers:
            radial = float(np.hypot(cx, cy)) + r
            if radial > self.crown_radius - self.min_wall:
                raise GeometryError(
                    f"chamber at ({cx}, {cy}) leaves {self.crown_radius - radial:.3f} mm "
                    f"to the envelope, below min_wall={self.min_wall} mm")
            if cy - r < self.flat_y + self.min_wall:
                raise GeometryError(
                    f"chamber at ({cx}, {cy}) leaves {cy - r - self.flat_y:.3f} mm to the "
                    f"flat face, below min_wall={self.min_wall} mm")


# ---------------------------------------------------------------------------
# polygon helpers


def polygon_area(poly: np.ndarray) -> float:
    """Shoelace area of a closed polygon, sign-free. poly is (n, 2)."""
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def polygon_centroid(poly: np.ndarray) -> tuple[float, float]:
    """Area centroid of a closed polygon."""
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * float(np.sum(cross))
    cx = float(np.sum((x + xn) * cross)) / (6.0 * a)
    cy = float(np.sum((y + yn) * cross)) / (6.0 * a)
    return cx, cy


def _arc(cx: float, cy: float, r: float, a0: float, a1: float, n: int) -> np.ndarray:
    t = np.linspace(a0, a1, n)
    return np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)])


# ---------------------------------------------------------------------------
# metrics


@dataclass
class ChamberMetrics:
    """Quadrature summary of the pressurised cross-section."""

    cross_section_area: float      # [mm^2] all chambers combined
    nominal_volume: float          # [mm^3] area x chamber length (prismatic)
    min_cover: float               # [mm] thinnest silicone between chamber and envelope
    chamber_areas: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"cross_section_area": self.cross_section_area,
                "nominal_volume": self.nominal_volume,
                "min_cover": self.min_cover,
                "chamber_areas": list(self.chamber_areas)}

    @staticmethod
    def from_dict(d: dict) -> "ChamberMetrics":
        return ChamberMetrics(d["cross_section_area"], d["nominal_volume"],
                              d["min_cover"], list(d["chamber_areas"]))


def _min_cover_to_outer(chamber_poly: np.ndarray, outer_poly: np.ndarray) -> float:
    """Smallest distance from chamber boundary samples to the outer boundary."""
    # segment distance from each chamber vertex to every outer edge, vectorised
    p = chamber_poly[::4]  # boundary sample thinning keeps this O(n^2/16)
    a = outer_poly
    b = np.roll(outer_poly, -1, axis=0)
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    denom[denom == 0.0] = 1.0
    best = np.full(len(p), np.inf)
    for i, q in enumerate(p):
        t = np.clip(((q - a) * ab).sum(axis=1) / denom, 0.0, 1.0)
        proj = a + t[:, None] * ab
        d = np.hypot(*(q - proj).T)
        best[i] = d.min()
    return float(best.min())


def chamber_metrics(spec: "ActuatorSpec") -> ChamberMetrics:
    """Recompute metrics from the sampled polygons (quadrature route)."""
    areas = [polygon_area(p) for p in spec.chamber_polygons]
    area = float(sum(areas))
    vol = area * spec.chamber_length
    cover = min(_min_cover_to_outer(p, spec.outer_polygon) for p in spec.chamber_polygons)
    return ChamberMetrics(area, vol, cover, areas)


# ---------------------------------------------------------------------------
# section regions added by device composition


@dataclass
class SectionRegion:
    """Extra resisting region overlaid on the actuator section.

    The region is the part of the annulus (center, inner_radius..radius) with
    y < y_clip; inner_radius 0 gives a clipped disk.  ``coupling`` scales its
    bending contribution (shear transfer to the actuator is partial);
    ``modulus_scale`` multiplies the silicone small-strain modulus (rigid
    payloads are much stiffer than the body).  ``linear`` selects a linear
    stress law instead of the hyperelastic one.
    """

    label: str
    center: tuple[float, float]
    radius: float
    y_clip: float
    coupling: float = 1.0
    modulus_scale: float = 1.0
    linear: bool = False
    inner_radius: float = 0.0

    def strips(self, n: int = 512) -> tuple[np.ndarray, np.ndarray]:
        """Midpoint strips (y, width*dy) of the clipped disk or annulus."""
        cx, cy = self.center
        lo, hi = cy - self.radius, min(cy + self.radius, self.y_clip)
        if hi <= lo or self.radius <= self.inner_radius:
            return np.zeros(0), np.zeros(0)
        edges = np.linspace(lo, hi, n + 1)
        ym = 0.5 * (edges[:-1] + edges[1:])
        w = 2.0 * (np.sqrt(np.maximum(self.radius ** 2 - (ym - cy) ** 2, 0.0))
                   - np.sqrt(np.maximum(self.inner_radius ** 2 - (ym - cy) ** 2, 0.0)))
        return ym, w * (edges[1] - edges[0])

    @property
    def area(self) -> float:
        ym, wd = self.strips(2048)
        return float(np.sum(wd))

    def to_dict(self) -> dict:
        return {"label": self.label, "center": list(self.center), "radius": self.radius,
                "y_clip": self.y_clip, "coupling": self.coupling,
                "modulus_scale": self.modulus_scale, "linear": self.linear,
                "inner_radius": self.inner_radius}

    @staticmethod
    def from_dict(d: dict) -> "SectionRegion":
        return SectionRegion(d["label"], tuple(d["center"]), d["radius"], d["y_clip"],
                             d["coupling"], d["modulus_scale"], d["linear"],
                             d.get("inner_radius", 0.0))


# ---------------------------------------------------------------------------
# the assembled actuator description


@dataclass(eq=False)
class ActuatorSpec:
    """Fully resolved actuator geometry, ready for winding and simulation."""

    kind: str                               # "A" | "B"
    params: GeometryAParams | GeometryBParams
    outer_polygon: np.ndarray
    chamber_polygons: list[np.ndarray]
    metrics: ChamberMetrics
    chamber_centroid_y: float               # [mm] datum frame
    neutral_y: float | None                 # fabric mid-plane; None without the layer
    hoop_radius: float                      # [mm] thin-wall expansion radius
    hoop_wall: float                        # [mm] cover over the chamber
    extra_regions: list[SectionRegion] = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION

    # convenience passthroughs -------------------------------------------------

    @property
    def chamber_length(self) -> float:
        return self.params.chamber_length

    @property
    def rigid_extension(self) -> float:
        # cap and rounded tip are cast far stiffer than the body
        return self.params.cap_length + self.params.tip_length

    @property
    def total_length(self) -> float:
        return self.params.total_length

    @property
    def chamber_area(self) -> float:
        return self.metrics.cross_section_area

    @property
    def flat_y(self) -> float:
        return self.params.flat_y

    @property
    def crown_apex_y(self) -> float:
        return self.params.crown_radius

    # resisting silicone ------------------------------------------------------

    def resist_strips(self, n: int = 512) -> tuple[np.ndarray, np.ndarray]:
        """Silicone that resists bending, as midpoint strips (y, width*dy).

        Only material radially inside the fibre cage carries axial load; the
        thin skin cast outside the winding is excluded (it wrinkles and
        delaminates rather than stretching with the section).
        """
        p = self.params
        if self.kind == "A":
            cage = p.cage_radius
            r_in, r_out = p.chamber_bore_radius, p.chamber_outer_radius
            floor = p.chamber_floor

            def block(y0, y1, wfn, m):
                edges = np.linspace(y0, y1, m + 1)
                ym = 0.5 * (edges[:-1] + edges[1:])
                return ym, wfn(ym) * (edges[1] - edges[0])

            def w_pad(y):      # below the fabric, clipped to the cage
                return 2.0 * np.sqrt(np.maximum(cage ** 2 - y ** 2, 0.0))

            def w_mid(y):      # bore core plus the clearance shell
                return (2.0 * np.sqrt(np.maximum(r_in ** 2 - y ** 2, 0.0))
                        + 2.0 * (np.sqrt(cage ** 2 - y ** 2)
                                 - np.sqrt(np.maximum(r_out ** 2 - y ** 2, 0.0))))

            def w_shell(y):    # beside the chamber band only the shell remains
                return 2.0 * (np.sqrt(np.maximum(cage ** 2 - y ** 2, 0.0))
                              - np.sqrt(np.maximum(r_out ** 2 - y ** 2, 0.0)))

            def w_top(y):
                return 2.0 * np.sqrt(np.maximum(cage ** 2 - y ** 2, 0.0))

            parts = [block(p.flat_y, floor, w_pad, n // 4),
                     block(floor, r_in, w_mid, n // 2),
                     block(r_in, r_out, w_shell, n // 4),
                     block(r_out, cage, w_top, n // 4)]
            ys = np.concatenate([a for a, _ in parts])
            wd = np.concatenate([b for _, b in parts])
            return ys, wd

        # geometry B: annular silicone sleeve around each chamber, inside the
        # winding radius
        ys_all, wd_all = [], []
        r, rw = p.chamber_radius, p.winding_radius
        for cx, cy in p.chamber_centers:
            edges = np.linspace(cy - rw, cy + rw, n + 1)
            ym = 0.5 * (edges[:-1] + edges[1:])
            dy = edges[1] - edges[0]
            w = 2.0 * (np.sqrt(np.maximum(rw ** 2 - (ym - cy) ** 2, 0.0))
                       - np.sqrt(np.maximum(r ** 2 - (ym - cy) ** 2, 0.0)))
            ys_all.append(ym)
            wd_all.append(w * dy)
        return np.concatenate(ys_all), np.concatenate(wd_all)

    # serialization -----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "params": asdict(self.params),
            "outer_polygon": self.outer_polygon.tolist(),
            "chamber_polygons": [p.tolist() for p in self.chamber_polygons],
            "metrics": self.metrics.to_dict(),
            "chamber_centroid_y": self.chamber_centroid_y,
            "neutral_y": self.neutral_y,
            "hoop_radius": self.hoop_radius,
            "hoop_wall": self.hoop_wall,
            "extra_regions": [r.to_dict() for r in self.extra_regions],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_dict(d: dict) -> "ActuatorSpec":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise GeometryError(f"unsupported spec schema {d.get('schema_version')!r}, "
                                f"expected {SCHEMA_VERSION!r}")
        cls = GeometryAParams if d["kind"] == "A" else GeometryBParams
        return ActuatorSpec(
            kind=d["kind"],
            params=cls(**d["params"]),
            outer_polygon=np.asarray(d["outer_polygon"], dtype=float),
            chamber_polygons=[np.asarray(p, dtype=float) for p in d["chamber_polygons"]],
            metrics=ChamberMetrics.from_dict(d["metrics"]),
            chamber_centroid_y=d["chamber_centroid_y"],
            neutral_y=d["neutral_y"],
            hoop_radius=d["hoop_radius"],
            hoop_wall=d["hoop_wall"],
            extra_regions=[SectionRegion.from_dict(r) for r in d["extra_regions"]],
        )

    @staticmethod
    def from_json(text: str) -> "ActuatorSpec":
        return ActuatorSpec.from_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @staticmethod
    def load(path) -> "ActuatorSpec":
        with open(path) as fh:
            return ActuatorSpec.from_json(fh.read())

    def section_csv(self) -> str:
        """Outer and chamber boundaries as one delimited table."""
        lines = ["# fibrebend-section v1", "loop,x_mm,y_mm"]
        for name, poly in [("outer", self.outer_polygon)] + [
                (f"chamber_{i}", p) for i, p in enumerate(self.chamber_polygons)]:
            for x, y in poly:
                lines.append(f"{name},{float(x)!r},{float(y)!r}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# builders


def _outer_segment_polygon(crown_radius: float, flat_y: float, n: int) -> np.ndarray:
    """Envelope-circle segment above the flat chord, counter-clockwise."""
    phi = np.arcsin(flat_y / crown_radius)
    return _arc(0.0, 0.0, crown_radius, phi, np.pi - phi, n)
    # the chord back to the start is implied by polygon closure


def build_geometry_a(params: GeometryAParams | None = None,
                     arc_samples: int = ARC_SAMPLES) -> ActuatorSpec:
    """Resolve Geometry A into polygons, metrics and model planes."""
    p = params or GeometryAParams()
    p.validate()

    outer = _outer_segment_polygon(p.crown_radius, p.flat_y, arc_samples)

    r_in, r_out, floor = p.chamber_bore_radius, p.chamber_outer_radius, p.chamber_floor
    a_out = np.arcsin(floor / r_out)
    a_in = np.arcsin(floor / r_in)
    n = arc_samples
    # outer wall arc left-to-right over the crown, then back along the bore
    outer_arc = _arc(0.0, 0.0, r_out, a_out, np.pi - a_out, n)
    inner_arc = _arc(0.0, 0.0, r_in, np.pi - a_in, a_in, n)
    chamber = np.vstack([outer_arc, inner_arc])

    area = polygon_area(chamber)
    _, cy = polygon_centroid(chamber)
    metrics = ChamberMetrics(area, area * p.chamber_length, p.hoop_wall, [area])

    return ActuatorSpec(
        kind="A",
        params=p,
        outer_polygon=outer,
        chamber_polygons=[chamber],
        metrics=metrics,
        chamber_centroid_y=cy,
        neutral_y=p.fabric_mid,
        hoop_radius=r_in,
        hoop_wall=p.hoop_wall,
    )


def build_geometry_b(params: GeometryBParams | None = None,
                     arc_samples: int = ARC_SAMPLES) -> ActuatorSpec:
    """Resolve Geometry B (twin cylindrical chambers) the same way."""
    p = params or GeometryBParams()
    p.validate()

    outer = _outer_segment_polygon(p.crown_radius, p.flat_y, arc_samples)
    chambers = [_arc(cx, cy, p.chamber_radius, 0.0, 2.0 * np.pi * (1 - 1.0 / arc_samples),
                     arc_samples) for cx, cy in p.chamber_centers]

    areas = [polygon_area(c) for c in chambers]
    area = float(sum(areas))
    cy = float(np.mean([polygon_centroid(c)[1] for c in chambers]))
    # thinnest wall is the designed clearance; keep the analytic value
    metrics = ChamberMetrics(area, area * p.chamber_length, p.min_wall, areas)

    return ActuatorSpec(
        kind="B",
        params=p,
        outer_polygon=outer,
        chamber_polygons=chambers,
        metrics=metrics,
        chamber_centroid_y=cy,
        neutral_y=p.fabric_mid if p.with_fabric_layer else None,
        hoop_radius=p.chamber_radius,
        hoop_wall=p.min_wall,
    )


def mirror_spec_b(spec: ActuatorSpec) -> ActuatorSpec:
    """Reflect a Geometry B spec across the sagittal plane (x -> -x)."""
    if spec.kind != "B":
        raise GeometryError("mirror_spec_b expects a Geometry B spec")
    flip = np.array([-1.0, 1.0])
    out = ActuatorSpec(
        kind="B",
        params=spec.params,
        outer_polygon=spec.outer_polygon * flip,
        chamber_polygons=[c * flip for c in spec.chamber_polygons],
        metrics=spec.metrics,
        chamber_centroid_y=spec.chamber_centroid_y,
        neutral_y=spec.neutral_y,
        hoop_radius=spec.hoop_radius,
        hoop_wall=spec.hoop_wall,
        extra_regions=list(spec.extra_regions),
    )
    return out
