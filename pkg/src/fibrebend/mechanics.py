"""Reduced-order quasi-static bending model.

The actuator is treated as a constant-curvature beam bending about the
inextensible fabric plane.  At each pressure a scalar moment balance is
solved for the curvature kappa:

    M_drive(p) = M_resist(kappa)

M_drive is the chamber pressure acting on the chamber area at the centroid
lever arm, derated by a fibre-effectiveness factor eta(n) = 1 - exp(-n/n0)
that folds ballooning losses into the turn count.  M_resist integrates the
nominal (reference-area) uniaxial stress of the silicone over the section
inside the fibre cage, with stretch 1 + kappa*y about the fabric plane.
Radial expansion follows a thin-wall hoop balance stiffened by the winding;
when it exceeds a set fraction of the chamber radius the solve aborts,
mirroring the geometric instability of low-turn windings.

The three headline constants (n0, expansion scale, twist gain) are
calibrated against reference simulations; docs/model.md records how and why.
All angles are degrees at the API, pressures kPa; internals are MPa/mm/N.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import ActuatorSpec, GeometryError, SectionRegion
from .materials import (LinearElastic, MaterialLibrary, MooneyRivlin,
                        YeohFirstOrder, default_library, small_strain_modulus,
                        tangent_modulus, uniaxial_stress)
from .fiberpath import WindingSpec, winding_surface

RESULT_CSV_MAGIC = "# fibrebend-solve v1"
RESULT_CSV_HEADER = "pressure_kPa,theta_deg,alpha_deg,expansion_mm,twist_pct,tip_x,tip_y,tip_z"

THETA_CAP_DEG = 180.0  # half-loop; the tip cannot pass its own base plane


class ModelError(ValueError):
    pass


class UnstableSolveError(RuntimeError):
    """Ballooning outgrew the stable range and the solve was aborted.

    Carries the analytic abort pressure and the partial result covering the
    schedule points below it.
    """

    def __init__(self, pressure_kpa: float, expansion_mm: float, limit_mm: float,
                 partial: "SolveResult | None" = None):
        super().__init__(
            f"radial expansion {expansion_mm:.2f} mm exceeds the stable limit "
            f"{limit_mm:.2f} mm at {pressure_kpa:.1f} kPa; solve aborted")
        self.pressure_kpa = pressure_kpa
        self.expansion_mm = expansion_mm
        self.limit_mm = limit_mm
        self.partial = partial


@dataclass(frozen=True)
class ModelConstants:
    """Calibrated and structural constants of the reduced model."""

    # fibre effectiveness scale [turns]; anchored so the 30-turn single helix
    # reaches 90 deg at 100 kPa
    n0: float = 57.418587311349185
    # a double helix lays both passes in the same span; its drive benefit
    # saturates, so the effective turn count grows by this factor, not 2
    dh_drive_factor: float = 1.4
    # hoop compliance scale [-]; anchored to the 9-turn abort pressure
    expansion_scale: float = 381.68636685657924
    # expansion beyond this fraction of the chamber radius is unstable
    instability_fraction: float = 0.2
    # out-of-plane gain of single-helix windings; anchored to the 100-turn
    # twist percentage
    twist_gain: float = 2.7549856271797504
    # shear transfer from actuator to surrounding device body
    body_coupling: float = 0.5
    # rigid payload stiffness relative to the body silicone
    payload_stiffness_factor: float = 20.0
    # stretch clamp guarding the stress law far on the compressive side
    min_stretch: float = 0.02


@dataclass
class SegmentModel:
    """Discretisation and material choices for the solver."""

    n_segments: int = 16
    strip_samples: int = 512
    silicone: str = "ecoflex_00_50"
    constants: ModelConstants = field(default_factory=ModelConstants)

    def __post_init__(self) -> None:
        if self.n_segments < 4:
            raise ModelError(f"n_segments must be at least 4, got {self.n_segments}")
        if self.strip_samples < 64:
            raise ModelError(f"strip_samples must be at least 64, got {self.strip_samples}")


@dataclass(eq=False)
class SolveResult:
    """Per-pressure solution of the quasi-static model."""

    pressures_kpa: np.ndarray
    theta_deg: np.ndarray
    alpha_deg: np.ndarray          # arc angle, exactly 2*theta
    kappa_per_mm: np.ndarray
    expansion_mm: np.ndarray
    twist_pct: np.ndarray
    tip_xyz: np.ndarray            # (n, 3): bending-plane x, out-of-plane y, axial z
    residual: np.ndarray           # moment balance residual [N mm], 0 where capped
    capped: np.ndarray             # True where theta hit the cap
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = [RESULT_CSV_MAGIC, "# meta " + json.dumps(self.meta, sort_keys=True),
                 RESULT_CSV_HEADER]
        for i in range(len(self.pressures_kpa)):
            row = [self.pressures_kpa[i], self.theta_deg[i], self.alpha_deg[i],
                   self.expansion_mm[i], self.twist_pct[i],
                   self.tip_xyz[i, 0], self.tip_xyz[i, 1], self.tip_xyz[i, 2]]
            lines.append(",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_csv(text: str) -> "SolveResult":
        lines = text.strip().splitlines()
        if not lines or lines[0] != RESULT_CSV_MAGIC:
            raise ModelError("not a solve result table (missing magic line)")
        meta = json.loads(lines[1].removeprefix("# meta "))
        if lines[2] != RESULT_CSV_HEADER:
            raise ModelError(f"unexpected header {lines[2]!r}")
        rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[3:]])
        if rows.size == 0:
            rows = rows.reshape(0, 8)
        L = meta.get("chamber_length_mm", 0.0)
        theta = rows[:, 1]
        kappa = np.where(L > 0, np.radians(2.0 * theta) / max(L, 1e-12), 0.0)
        return SolveResult(
            pressures_kpa=rows[:, 0], theta_deg=theta, alpha_deg=rows[:, 2],
            kappa_per_mm=kappa, expansion_mm=rows[:, 3], twist_pct=rows[:, 4],
            tip_xyz=rows[:, 5:8],
            residual=np.zeros(len(rows)), capped=theta >= THETA_CAP_DEG - 1e-9,
            meta=meta)


# ---------------------------------------------------------------------------
# stress laws on strips


def _cauchy_stress_vec(model, lam: np.ndarray) -> np.ndarray:
    """Vectorised twin of materials.uniaxial_stress (tests pin them equal)."""
    if isinstance(model, MooneyRivlin):
        return 2.0 * (lam ** 2 - 1.0 / lam) * (model.c10 + model.c01 / lam)
    if isinstance(model, YeohFirstOrder):
        return 2.0 * model.c10 * (lam ** 2 - 1.0 / lam)
    if isinstance(model, LinearElastic):
        return model.modulus * (lam - 1.0)
    return np.array([uniaxial_stress(model, float(v)) for v in lam])


def _cauchy_tangent_vec(model, lam: np.ndarray) -> np.ndarray:
    if isinstance(model, MooneyRivlin):
        return 2.0 * ((2.0 * lam + lam ** -2) * (model.c10 + model.c01 / lam)
                      - (lam ** 2 - 1.0 / lam) * model.c01 / lam ** 2)
    if isinstance(model, YeohFirstOrder):
        return 2.0 * model.c10 * (2.0 * lam + lam ** -2)
    if isinstance(model, LinearElastic):
        return np.full_like(lam, model.modulus)
    return np.array([tangent_modulus(model, float(v)) for v in lam])


def _nominal_stress(model, lam: np.ndarray, min_stretch: float) -> np.ndarray:
    """First Piola (reference-area) uniaxial stress, clamped low-stretch."""
    lam = np.maximum(lam, min_stretch)
    return _cauchy_stress_vec(model, lam) / lam


def _nominal_tangent(model, lam: np.ndarray, min_stretch: float) -> np.ndarray:
    clamped = lam <= min_stretch
    lam = np.maximum(lam, min_stretch)
    s = _cauchy_stress_vec(model, lam)
    t = _cauchy_tangent_vec(model, lam)
    out = (t * lam - s) / lam ** 2
    out[clamped] = 0.0  # stress is constant below the clamp
    return out


class _MomentBalance:
    """Precomputed strip integrals for one spec/winding/material choice."""

    def __init__(self, spec: ActuatorSpec, materials: MaterialLibrary, seg: SegmentModel):
        if spec.neutral_y is None:
            raise ModelError(
                "spec has no inextensible plane (neutral_y is None); pressure "
                "produces elongation, not bending - add the fabric layer")
        self.spec = spec
        self.seg = seg
        self.model = materials[seg.silicone]
        self.e_sil = small_strain_modulus(self.model)
        ys, wd = spec.resist_strips(seg.strip_samples)
        self.y_rel = ys - spec.neutral_y
        self.wd = wd
        self.arm = spec.chamber_centroid_y - spec.neutral_y
        if not self.arm > 0:
            raise ModelError(f"chamber centroid sits on the fabric plane "
                             f"(lever arm {self.arm:.4f} mm); no bending drive")
        # device regions bend about their own centroids with partial coupling
        self.regions = []
        for region in spec.extra_regions:
            ry, rw = region.strips(seg.strip_samples)
            if len(ry) == 0:
                continue
            centroid = float(np.sum(ry * rw) / np.sum(rw))
            self.regions.append((region, ry - centroid, rw))

    def drive(self, p_mpa: float, n_eff: float) -> float:
        c = self.seg.constants
        eta = 1.0 - math.exp(-n_eff / c.n0)
        return p_mpa * self.spec.chamber_area * self.arm * eta

    def resist(self, kappa: float) -> float:
        c = self.seg.constants
        lam = 1.0 + kappa * self.y_rel
        m = float(np.sum(_nominal_stress(self.model, lam, c.min_stretch) * self.y_rel * self.wd))
        for region, y_rel, wd in self.regions:
            lam_r = 1.0 + kappa * y_rel
            if region.linear:
                stress = region.modulus_scale * self.e_sil * (lam_r - 1.0)
            else:
                stress = region.modulus_scale * _nominal_stress(self.model, lam_r, c.min_stretch)
            m += region.coupling * float(np.sum(stress * y_rel * wd))
        return m

    def resist_prime(self, kappa: float) -> float:
        c = self.seg.constants
        lam = 1.0 + kappa * self.y_rel
        d = float(np.sum(_nominal_tangent(self.model, lam, c.min_stretch)
                         * self.y_rel ** 2 * self.wd))
        for region, y_rel, wd in self.regions:
            lam_r = 1.0 + kappa * y_rel
            if region.linear:
                t = region.modulus_scale * self.e_sil * np.ones_like(lam_r)
            else:
                t = region.modulus_scale * _nominal_tangent(self.model, lam_r, c.min_stretch)
            d += region.coupling * float(np.sum(t * y_rel ** 2 * wd))
        return d

    def solve_kappa(self, m_drive: float, kappa_cap: float) -> tuple[float, float, bool]:
        """Return (kappa, residual, capped) for one drive moment."""
        if m_drive <= 0.0:
            return 0.0, 0.0, False
        if m_drive >= self.resist(kappa_cap):
            return kappa_cap, 0.0, True
        lo, hi = 0.0, kappa_cap
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self.resist(mid) < m_drive:
                lo = mid
            else:
                hi = mid
        kappa = 0.5 * (lo + hi)
        # Newton polish on the bracketed root
        for _ in range(4):
            r = self.resist(kappa) - m_drive
            dp = self.resist_prime(kappa)
            if dp <= 0.0:
                break
            step = r / dp
            new = kappa - step
            if not (lo <= new <= hi):
                break
            kappa = new
            if abs(step) < 1e-16:
                break
        return kappa, self.resist(kappa) - m_drive, False


# ---------------------------------------------------------------------------
# expansion / instability


def _expansion_denominator(spec: ActuatorSpec, winding: WindingSpec,
                           materials: MaterialLibrary, silicone: str) -> float:
    """Hoop stiffness [N/mm]: wall term plus fibre term."""
    e_sil = small_strain_modulus(materials[silicone])
    fibre = materials.effective_fibre
    span = spec.chamber_length if winding.axial_span is None else winding.axial_span
    chi = 2.0 if winding.style == "DH" else 1.0
    turn_density = winding.turns / span
    return spec.hoop_wall * e_sil + fibre.axial_stiffness * turn_density * chi


def radial_expansion_model(spec: ActuatorSpec, winding: WindingSpec,
                           materials: MaterialLibrary | None, p_kpa: float,
                           constants: ModelConstants | None = None,
                           silicone: str = "ecoflex_00_50") -> float:
    """Mean ballooning displacement [mm] of the chamber wall at one pressure."""
    if p_kpa < 0:
        raise ModelError(f"pressure must be non-negative, got {p_kpa} kPa")
    materials = materials or default_library()
    c = constants or ModelConstants()
    denom = _expansion_denominator(spec, winding, materials, silicone)
    r = spec.hoop_radius
    return c.expansion_scale * (p_kpa / 1000.0) * r * r / denom


def instability_pressure_kpa(spec: ActuatorSpec, winding: WindingSpec,
                             materials: MaterialLibrary | None = None,
                             constants: ModelConstants | None = None,
                             silicone: str = "ecoflex_00_50") -> float:
    """Pressure at which ballooning reaches the stable limit."""
    materials = materials or default_library()
    c = constants or ModelConstants()
    if c.expansion_scale <= 0.0:
        return math.inf
    denom = _expansion_denominator(spec, winding, materials, silicone)
    limit = c.instability_fraction * spec.hoop_radius
    return 1000.0 * limit * denom / (c.expansion_scale * spec.hoop_radius ** 2)


# ---------------------------------------------------------------------------
# the quasi-static solve


def _resolve_pressures(schedule) -> np.ndarray:
    if hasattr(schedule, "pressures_kpa"):
        return np.asarray(schedule.pressures_kpa(), dtype=float)
    return np.asarray(list(schedule), dtype=float)


def _tip_pose(kappa: float, span: float, extension: float,
              oop_gain: float) -> tuple[np.ndarray, float]:
    """Tip position for one curvature; returns (xyz, planar displacement)."""
    if kappa > 1e-12:
        alpha = kappa * span
        x = (1.0 - math.cos(alpha)) / kappa
        z = math.sin(alpha) / kappa
    else:
        alpha = 0.0
        x, z = 0.0, span
    x += extension * math.sin(alpha)
    z += extension * math.cos(alpha)
    rest = span + extension
    planar = math.hypot(x, z - rest)
    return np.array([x, oop_gain * planar, z]), planar


def solve_quasi_static(spec: ActuatorSpec, winding: WindingSpec,
                       materials: MaterialLibrary | None = None,
                       schedule=None, seg: SegmentModel | None = None) -> SolveResult:
    """Solve the moment balance across a pressure schedule.

    Raises UnstableSolveError once the schedule crosses the ballooning limit;
    the exception carries the abort pressure and the partial result.
    """
    winding.validate()
    materials = materials or default_library()
    seg = seg or SegmentModel()
    c = seg.constants
    if schedule is None:
        pressures = np.linspace(0.0, 100.0, 11)
    else:
        pressures = _resolve_pressures(schedule)
    if np.any(pressures < 0):
        raise ModelError("schedule contains negative pressures")

    balance = _MomentBalance(spec, materials, seg)
    span = spec.chamber_length
    kappa_cap = 2.0 * math.radians(THETA_CAP_DEG) / span

    n_eff = winding.turns * (c.dh_drive_factor if winding.style == "DH" else 1.0)
    surf = winding_surface(spec, winding.chamber_index, winding.radial_offset)
    pitch = (spec.chamber_length if winding.axial_span is None else winding.axial_span) / winding.turns
    lead = math.atan2(pitch, surf.perimeter)
    # mirrored chamber pairs cancel out-of-plane motion by symmetry
    mirrored_pair = spec.kind == "B"
    if winding.style == "SH" and not mirrored_pair:
        oop_gain = math.sin(lead) * (1.0 if winding.chirality == "ccw" else -1.0)
    else:
        oop_gain = 0.0

    p_limit = instability_pressure_kpa(spec, winding, materials, c, seg.silicone)

    meta = {"kind": spec.kind, "style": winding.style, "turns": winding.turns,
            "chirality": winding.chirality, "chamber_length_mm": span,
            "rigid_extension_mm": spec.rigid_extension,
            "lead_angle_deg": math.degrees(lead), "mirrored_pair": mirrored_pair,
            "silicone": seg.silicone, "n_segments": seg.n_segments}

    n = len(pressures)
    theta = np.zeros(n)
    kappa = np.zeros(n)
    expansion = np.zeros(n)
    residual = np.zeros(n)
    capped = np.zeros(n, dtype=bool)
    tips = np.zeros((n, 3))

    for i, p in enumerate(pressures):
        if p > p_limit:
            partial = SolveResult(
                pressures_kpa=pressures[:i], theta_deg=theta[:i],
                alpha_deg=2.0 * theta[:i], kappa_per_mm=kappa[:i],
                expansion_mm=expansion[:i],
                twist_pct=_twist_series(theta[:i], tips[:i], span,
                                        spec.rigid_extension, c.twist_gain),
                tip_xyz=tips[:i], residual=residual[:i], capped=capped[:i],
                meta=dict(meta, aborted_at_kpa=p_limit))
            raise UnstableSolveError(
                p_limit, radial_expansion_model(spec, winding, materials, float(p), c, seg.silicone),
                c.instability_fraction * spec.hoop_radius, partial)
        expansion[i] = radial_expansion_model(spec, winding, materials, float(p), c, seg.silicone)
        k, r, cap = balance.solve_kappa(balance.drive(p / 1000.0, n_eff), kappa_cap)
        kappa[i] = k
        residual[i] = 0.0 if cap else r
        capped[i] = cap
        theta[i] = min(math.degrees(0.5 * k * span), THETA_CAP_DEG)
        tips[i], _ = _tip_pose(k, span, spec.rigid_extension, oop_gain)

    return SolveResult(
        pressures_kpa=pressures, theta_deg=theta, alpha_deg=2.0 * theta,
        kappa_per_mm=kappa, expansion_mm=expansion,
        twist_pct=_twist_series(theta, tips, span, spec.rigid_extension, c.twist_gain),
        tip_xyz=tips, residual=residual, capped=capped, meta=meta)


def _twist_series(theta_deg: np.ndarray, tips: np.ndarray, span: float,
                  extension: float, gain: float) -> np.ndarray:
    rest = np.array([0.0, 0.0, span + extension])
    out = np.zeros(len(theta_deg))
    for i, tip in enumerate(tips):
        disp = float(np.linalg.norm(tip - rest))
        if disp > 1e-12:
            out[i] = gain * 100.0 * abs(tip[1]) / disp
    return out


def twist_estimate(winding: WindingSpec, solve: SolveResult,
                   constants: ModelConstants | None = None) -> np.ndarray:
    """Twist percentage per pressure: out-of-plane share of tip displacement.

    Exactly zero for double-helix windings and mirrored chamber pairs; for a
    single helix the share follows the winding lead angle.
    """
    c = constants or ModelConstants()
    if winding.style == "DH" or solve.meta.get("mirrored_pair"):
        return np.zeros(len(solve.pressures_kpa))
    span = solve.meta["chamber_length_mm"]
    ext = solve.meta["rigid_extension_mm"]
    return _twist_series(solve.theta_deg, solve.tip_xyz, span, ext, c.twist_gain)


# ---------------------------------------------------------------------------
# device composition


@dataclass(frozen=True)
class DeviceSpec:
    """Cylindrical device body the actuator is cast into."""

    body_diameter: float = 18.0          # [mm]
    body_length: float = 60.5            # [mm]
    actuator_section_length: float = 37.5  # [mm]
    filled: bool = True                  # body silicone fills below the flat face
    payload_diameter: float = 8.0        # [mm] rigid inclusion
    payload_length: float = 20.0         # [mm]
    payload_offset_y: float = -3.0       # [mm] inclusion centre below the datum

    def validate(self) -> None:
        if self.body_diameter <= 0 or self.body_length <= 0:
            raise GeometryError("device dimensions must be positive")
        if self.actuator_section_length > self.body_length:
            raise GeometryError(
                f"actuator section {self.actuator_section_length} mm exceeds the "
                f"device length {self.body_length} mm")
        if (abs(self.payload_offset_y) + 0.5 * self.payload_diameter
                > 0.5 * self.body_diameter + 1e-9):
            raise GeometryError("payload does not fit inside the device bore")
        if self.payload_length > self.body_length:
            raise GeometryError("payload longer than the device body")


def compose_device(spec: ActuatorSpec, device: DeviceSpec, payload: bool = False,
                   constants: ModelConstants | None = None) -> ActuatorSpec:
    """Augment the resisting section with the surrounding device body.

    The body bends about its own centroid with partial coupling; a rigid
    payload adds a stiff linear-elastic inclusion.
    """
    device.validate()
    c = constants or ModelConstants()
    p = spec.params
    r_body = 0.5 * device.body_diameter
    r_act = p.crown_radius
    if r_act > r_body + 1e-9:
        raise GeometryError(
            f"actuator envelope {2 * r_act} mm does not fit the device bore "
            f"{device.body_diameter} mm")
    if spec.total_length > device.body_length + 1e-9:
        raise GeometryError(
            f"actuator length {spec.total_length} mm exceeds the device "
            f"length {device.body_length} mm")

    regions = list(spec.extra_regions)
    if device.filled:
        regions.append(SectionRegion(
            label="device_body_fill", center=(0.0, 0.0), radius=r_body,
            y_clip=spec.flat_y, coupling=c.body_coupling))
    if r_body > r_act + 1e-12:
        regions.append(SectionRegion(
            label="device_body_annulus", center=(0.0, 0.0), radius=r_body,
            inner_radius=r_act, y_clip=r_body, coupling=c.body_coupling))
    if payload:
        regions.append(SectionRegion(
            label="payload", center=(0.0, device.payload_offset_y),
            radius=0.5 * device.payload_diameter, y_clip=r_body,
            coupling=c.body_coupling,
            modulus_scale=c.payload_stiffness_factor, linear=True))

    return ActuatorSpec(
        kind=spec.kind, params=spec.params, outer_polygon=spec.outer_polygon,
        chamber_polygons=spec.chamber_polygons, metrics=spec.metrics,
        chamber_centroid_y=spec.chamber_centroid_y, neutral_y=spec.neutral_y,
        hoop_radius=spec.hoop_radius, hoop_wall=spec.hoop_wall,
        extra_regions=regions)


# ---------------------------------------------------------------------------
# calibration


@dataclass
class CalibrationResult:
    constants: ModelConstants
    residuals: dict
    evaluations: int


MAX_CALIBRATION_EVALS = 10_000


def calibrate(spec: ActuatorSpec, anchors: list,
              materials: MaterialLibrary | None = None,
              seg: SegmentModel | None = None,
              twist_anchor: tuple | None = None,
              abort_anchor: tuple | None = None) -> CalibrationResult:
    """Fit the model constants to reference operating points.

    anchors: list of (winding, pressure_kPa, theta_target_deg) pairs fitted
    through the fibre-effectiveness scale n0 (theta is monotone decreasing in
    n0, so the 1D least-squares problem is solved by deterministic ternary
    search).  twist_anchor: (winding, pressure_kPa, twist_pct).  abort_anchor:
    (winding, abort_pressure_kPa) pinning the expansion scale through the
    instability threshold.
    """
    if not anchors:
        raise ModelError("calibrate needs at least one bending anchor")
    materials = materials or default_library()
    base_seg = seg or SegmentModel()
    evals = 0

    def theta_for(n0: float, winding: WindingSpec, p_kpa: float) -> float:
        nonlocal evals
        evals += 1
        if evals > MAX_CALIBRATION_EVALS:
            raise ModelError(f"calibration did not converge within "
                             f"{MAX_CALIBRATION_EVALS} model evaluations")
        c = replace(base_seg.constants, n0=n0,
                    # huge scale-down of instability so anchors at high
                    # pressure stay solvable during the fit
                    expansion_scale=0.0)
        s = SegmentModel(base_seg.n_segments, base_seg.strip_samples,
                         base_seg.silicone, c)
        res = solve_quasi_static(spec, winding, materials, [p_kpa], s)
        return float(res.theta_deg[-1])

    def loss(n0: float) -> float:
        return sum((theta_for(n0, w, p) - t) ** 2 for w, p, t in anchors)

    lo, hi = 1.0, 500.0
    if len(anchors) == 1:
        # single anchor: theta(n0) is monotone, bisect the residual sign
        w, p, target = anchors[0]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if theta_for(mid, w, p) > target:
                lo = mid
            else:
                hi = mid
        n0 = 0.5 * (lo + hi)
    else:
        for _ in range(120):
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            if loss(m1) <= loss(m2):
                hi = m2
            else:
                lo = m1
        n0 = 0.5 * (lo + hi)

    constants = replace(base_seg.constants, n0=n0)

    if abort_anchor is not None:
        w, p_abort = abort_anchor
        denom = _expansion_denominator(spec, w, materials, base_seg.silicone)
        limit = constants.instability_fraction * spec.hoop_radius
        scale = 1000.0 * limit * denom / (p_abort * spec.hoop_radius ** 2)
        constants = replace(constants, expansion_scale=scale)

    if twist_anchor is not None:
        w, p_kpa, target_pct = twist_anchor
        seg_t = SegmentModel(base_seg.n_segments, base_seg.strip_samples,
                             base_seg.silicone, replace(constants, twist_gain=1.0))
        res = solve_quasi_static(spec, w, materials, [p_kpa], seg_t)
        raw = float(res.twist_pct[-1])
        if raw <= 0:
            raise ModelError("twist anchor winding produces no out-of-plane motion")
        constants = replace(constants, twist_gain=target_pct / raw)

    seg_f = SegmentModel(base_seg.n_segments, base_seg.strip_samples,
                         base_seg.silicone, constants)
    residuals = {}
    for i, (w, p, target) in enumerate(anchors):
        res = solve_quasi_static(spec, w, materials, [p], seg_f)
        residuals[f"theta_{i}_{w.style}{w.turns}"] = float(res.theta_deg[-1]) - target
    return CalibrationResult(constants, residuals, evals)


# ---------------------------------------------------------------------------
# workspace


@dataclass
class WorkspaceResult:
    pressures_kpa: np.ndarray
    tips: np.ndarray               # (n, 3)
    max_reach_mm: float            # farthest tip distance from the base
    swept_area_mm2: float          # fan area of the planar trajectory
    fits_corridor: bool | None     # None when no corridor given


def workspace(spec: ActuatorSpec, winding: WindingSpec,
              materials: MaterialLibrary | None = None, schedule=None,
              seg: SegmentModel | None = None,
              corridor: DeviceSpec | None = None) -> WorkspaceResult:
    """Sweep the schedule and report tip coverage."""
    res = solve_quasi_static(spec, winding, materials, schedule, seg)
    tips = res.tip_xyz
    reach = float(np.max(np.linalg.norm(tips, axis=1))) if len(tips) else 0.0
    area = 0.0
    for i in range(len(tips) - 1):
        area += 0.5 * abs(tips[i, 0] * tips[i + 1, 2] - tips[i + 1, 0] * tips[i, 2])
    fits = None
    if corridor is not None:
        r = 0.5 * corridor.body_diameter
        radial = np.hypot(tips[:, 0], tips[:, 1])
        fits = bool(np.all(radial <= r + 1e-9)
                    and np.all(tips[:, 2] >= -1e-9)
                    and np.all(tips[:, 2] <= corridor.body_length + 1e-9))
    return WorkspaceResult(res.pressures_kpa, tips, reach, area, fits)
