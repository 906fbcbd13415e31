"""Measurement post-processing for simulation exports and bench logs.

Mirrors the measurement conventions used on the reference design: bending
angle from the rotation of the base-to-tip vector (theta, half the arc angle
alpha), radial expansion from 12 automatically picked node pairs along the
span, and the forward/backward hysteresis ratio.  Input data arrives as
node-history CSV (with an initial-position sidecar) or as bench log CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ActuatorSpec


class PostprocessError(ValueError):
    pass


# ---------------------------------------------------------------------------
# pressure schedules


@dataclass(frozen=True)
class PressureSchedule:
    """Loading program: proportional ramp, stepped staircase, or explicit."""

    kind: str                      # "proportional" | "stepped" | "explicit"
    p_max: float = 100.0           # [kPa]
    t_end: float = 1.0             # [s] proportional ramp span
    n_steps: int = 11              # proportional sampling (includes p=0)
    increment: float = 10.0        # [kPa] stepped raise per hold
    hold: float = 5.0              # [s] stepped dwell
    with_reverse: bool = False     # stepped: walk back down to zero
    points: tuple = ()             # explicit ((t, p), ...) pairs

    def __post_init__(self) -> None:
        if self.kind not in ("proportional", "stepped", "explicit"):
            raise PostprocessError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "explicit":
            if len(self.points) == 0:
                raise PostprocessError("explicit schedule needs at least one point")
            ts = [t for t, _ in self.points]
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise PostprocessError("explicit schedule times must strictly increase")
            if any(p < 0 for _, p in self.points):
                raise PostprocessError("pressures must be non-negative")
        else:
            if self.p_max < 0:
                raise PostprocessError(f"p_max must be non-negative, got {self.p_max}")
            if self.kind == "stepped" and self.increment <= 0:
                raise PostprocessError(f"increment must be positive, got {self.increment}")
            if self.kind == "proportional" and (self.t_end <= 0 or self.n_steps < 2):
                raise PostprocessError("proportional schedule needs t_end > 0 and n_steps >= 2")

    # constructors ----------------------------------------------------------

    @staticmethod
    def proportional(t_end: float = 1.0, p_max: float = 100.0,
                     n_steps: int = 11) -> "PressureSchedule":
        return PressureSchedule("proportional", p_max=p_max, t_end=t_end, n_steps=n_steps)

    @staticmethod
    def stepped(increment: float = 10.0, hold: float = 5.0, p_max: float = 100.0,
                with_reverse: bool = False) -> "PressureSchedule":
        return PressureSchedule("stepped", p_max=p_max, increment=increment,
                                hold=hold, with_reverse=with_reverse)

    @staticmethod
    def explicit(points) -> "PressureSchedule":
        return PressureSchedule("explicit", points=tuple((float(t), float(p))
                                                         for t, p in points))

    # queries ---------------------------------------------------------------

    @property
    def _n_up(self) -> int:
        return int(math.ceil(self.p_max / self.increment - 1e-12))

    def span(self) -> float:
        """Total schedule duration."""
        if self.kind == "proportional":
            return self.t_end
        if self.kind == "stepped":
            n = self._n_up
            return (2 * n + 1) * self.hold if self.with_reverse else n * self.hold
        return self.points[-1][0]

    def pressure_at(self, t: float) -> float:
        """Pressure [kPa] at schedule time t."""
        if t < 0 or t > self.span() + 1e-12:
            raise PostprocessError(f"t={t} outside the schedule span [0, {self.span()}]")
        if self.kind == "proportional":
            return self.p_max * t / self.t_end
        if self.kind == "stepped":
            k = int(t // self.hold)
            n = self._n_up
            if k < n:        # climbing: k-th hold is at (k+1) increments
                return min((k + 1) * self.increment, self.p_max)
            if not self.with_reverse:
                return self.p_max
            down = k - n     # descending after the top hold
            return max(self.p_max - down * self.increment, 0.0)
        ts = [p[0] for p in self.points]
        ps = [p[1] for p in self.points]
        return float(np.interp(t, ts, ps))

    def pressures_kpa(self) -> np.ndarray:
        """Ordered pressure levels, starting from the unloaded state."""
        if self.kind == "proportional":
            return np.linspace(0.0, self.p_max, self.n_steps)
        if self.kind == "explicit":
            return np.array([p for _, p in self.points])
        n = self._n_up
        up = np.minimum(np.arange(0, n + 1) * self.increment, self.p_max)
        if not self.with_reverse:
            return up
        down = up[-2::-1]
        return np.concatenate([up, down])

    def legs(self) -> tuple[np.ndarray, np.ndarray]:
        """(forward, backward) pressure legs; backward is empty when one-way."""
        p = self.pressures_kpa()
        top = int(np.argmax(p))
        return p[:top + 1], p[top:]


def time_to_pressure(schedule: PressureSchedule, t: float) -> float:
    """Pressure [kPa] applied at time t of the schedule."""
    return schedule.pressure_at(t)


# ---------------------------------------------------------------------------
# node histories


@dataclass
class NodeHistory:
    """Displacement time series of one tracked node."""

    node_id: int
    initial_xyz: np.ndarray        # (3,) [mm]
    times: np.ndarray              # (n,) strictly increasing
    displacements: np.ndarray      # (n, 3) [mm]

    def __post_init__(self) -> None:
        self.initial_xyz = np.asarray(self.initial_xyz, dtype=float)
        self.times = np.asarray(self.times, dtype=float)
        self.displacements = np.asarray(self.displacements, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise PostprocessError(f"node {self.node_id}: times must strictly increase")
        if len(self.times) != len(self.displacements):
            raise PostprocessError(f"node {self.node_id}: time/displacement length mismatch")

    def displacement_at(self, t: float) -> np.ndarray:
        if t < self.times[0] - 1e-12 or t > self.times[-1] + 1e-12:
            raise PostprocessError(
                f"node {self.node_id}: t={t} outside the recorded span "
                f"[{self.times[0]}, {self.times[-1]}]")
        return np.array([np.interp(t, self.times, self.displacements[:, k])
                         for k in range(3)])

    def position_at(self, t: float) -> np.ndarray:
        return self.initial_xyz + self.displacement_at(t)


HISTORY_HEADER = "node_id,t,ux_mm,uy_mm,uz_mm"
SIDECAR_HEADER = "node_id,x0,y0,z0"
BENCH_HEADER = "pressure_kPa,theta_deg,timestamp"


def parse_histories(history_csv: str, sidecar_csv: str) -> dict[int, NodeHistory]:
    """Build NodeHistory objects from the history table and its sidecar."""
    hlines = history_csv.strip().splitlines()
    slines = sidecar_csv.strip().splitlines()
    if not hlines or hlines[0] != HISTORY_HEADER:
        raise PostprocessError(f"history table must start with {HISTORY_HEADER!r}")
    if not slines or slines[0] != SIDECAR_HEADER:
        raise PostprocessError(f"sidecar table must start with {SIDECAR_HEADER!r}")
    initial = {}
    for ln in slines[1:]:
        f = ln.split(",")
        initial[int(f[0])] = np.array([float(f[1]), float(f[2]), float(f[3])])
    rows: dict[int, list] = {}
    for ln in hlines[1:]:
        f = ln.split(",")
        rows.setdefault(int(f[0]), []).append(
            (float(f[1]), float(f[2]), float(f[3]), float(f[4])))
    out = {}
    for nid, rr in rows.items():
        if nid not in initial:
            raise PostprocessError(f"node {nid} has history rows but no initial position")
        rr.sort(key=lambda r: r[0])
        arr = np.array(rr)
        out[nid] = NodeHistory(nid, initial[nid], arr[:, 0], arr[:, 1:4])
    return out


def serialize_histories(histories: dict[int, NodeHistory]) -> tuple[str, str]:
    """Inverse of parse_histories; rows ordered by node id then time."""
    h = [HISTORY_HEADER]
    s = [SIDECAR_HEADER]
    for nid in sorted(histories):
        nh = histories[nid]
        x0, y0, z0 = nh.initial_xyz
        s.append(f"{nid},{float(x0)!r},{float(y0)!r},{float(z0)!r}")
        for t, (ux, uy, uz) in zip(nh.times, nh.displacements):
            h.append(f"{nid},{float(t)!r},{float(ux)!r},{float(uy)!r},{float(uz)!r}")
    return "\n".join(h) + "\n", "\n".join(s) + "\n"


# ---------------------------------------------------------------------------
# bending angle


def bending_angle(ref_point, tip: NodeHistory, t: float) -> float:
    """Rotation [deg] of the ref-to-tip vector since the start of the record.

    Uses atan2 of the cross/dot magnitudes, stable near 0 and 180 deg.
    """
    ref = np.asarray(ref_point, dtype=float)
    v0 = tip.initial_xyz - ref
    v1 = tip.position_at(t) - ref
    n0, n1 = np.linalg.norm(v0), np.linalg.norm(v1)
    if n0 < 1e-12 or n1 < 1e-12:
        raise PostprocessError("degenerate configuration: tip coincides with the reference point")
    cross = np.linalg.norm(np.cross(v0, v1))
    dot = float(np.dot(v0, v1))
    return math.degrees(math.atan2(cross, dot))


# ---------------------------------------------------------------------------
# radial expansion


@dataclass(frozen=True)
class RadialPair:
    flat_id: int
    curved_id: int
    station_mm: float              # axial position of the target station
    initial_distance: float        # [mm] local wall thickness at rest


def select_radial_pairs(nodes, spec: ActuatorSpec, n_pairs: int = 12,
                        spacing: float = 2.5) -> list[RadialPair]:
    """Pick node pairs for expansion tracking, one per axial station.

    Stations sit every ``spacing`` mm from the base; stations past the
    chamber end are clamped to it.  For each station the closest node to the
    flat-face centreline and to the crown apex line are paired; distance ties
    break towards the lower node id.
    """
    nodes = [(int(i), np.asarray(p, dtype=float)) for i, p in nodes]
    if not nodes:
        raise PostprocessError("empty node cloud")
    span = spec.chamber_length
    flat_y = spec.flat_y
    crown_y = spec.crown_apex_y
    ids = np.array([i for i, _ in nodes])
    pts = np.array([p for _, p in nodes])

    def nearest(target: np.ndarray) -> int:
        d = np.linalg.norm(pts - target, axis=1)
        best = np.min(d)
        cand = ids[d <= best + 1e-12]
        return int(np.min(cand))

    pairs = []
    for k in range(n_pairs):
        z = min(k * spacing, span)
        a = nearest(np.array([0.0, flat_y, z]))
        b = nearest(np.array([0.0, crown_y, z]))
        pa = pts[np.argmax(ids == a)]
        pb = pts[np.argmax(ids == b)]
        pairs.append(RadialPair(a, b, z, float(np.linalg.norm(pa - pb))))
    return pairs


@dataclass
class ExpansionPoint:
    mean_mm: float
    per_pair_mm: np.ndarray


def radial_expansion(pairs: list[RadialPair], histories: dict[int, NodeHistory],
                     t: float) -> ExpansionPoint:
    """Mean change of pair distance at time t (positive = ballooning)."""
    deltas = []
    for pair in pairs:
        for nid in (pair.flat_id, pair.curved_id):
            if nid not in histories:
                raise PostprocessError(f"no history for node {nid}")
        a = histories[pair.flat_id]
        b = histories[pair.curved_id]
        d0 = float(np.linalg.norm(a.initial_xyz - b.initial_xyz))
        d1 = float(np.linalg.norm(a.position_at(t) - b.position_at(t)))
        deltas.append(d1 - d0)
    arr = np.array(deltas)
    return ExpansionPoint(float(np.mean(arr)), arr)


# ---------------------------------------------------------------------------
# series containers and hysteresis


@dataclass
class AngleSeries:
    pressures_kpa: np.ndarray
    theta_deg: np.ndarray

    def __post_init__(self) -> None:
        self.pressures_kpa = np.asarray(self.pressures_kpa, dtype=float)
        self.theta_deg = np.asarray(self.theta_deg, dtype=float)
        if len(self.pressures_kpa) != len(self.theta_deg):
            raise PostprocessError("pressure/angle length mismatch")


@dataclass
class ExpansionSeries:
    pressures_kpa: np.ndarray
    mean_mm: np.ndarray
    per_pair_mm: np.ndarray        # (n_pressures, n_pairs)


@dataclass
class HysteresisResult:
    ratio_pct: float               # max gap over max forward angle
    loop_area_ratio_pct: float     # area between the curves over area under forward
    pressures_kpa: np.ndarray
    gap_deg: np.ndarray


def hysteresis_ratio(forward: AngleSeries, backward: AngleSeries) -> HysteresisResult:
    """Normalised split between the inflation and deflation curves.

    The headline ratio is max gap / max forward angle; the loop-area variant
    is carried alongside since either convention appears in practice.
    """
    if len(forward.pressures_kpa) != len(backward.pressures_kpa) or np.any(
            np.abs(forward.pressures_kpa - backward.pressures_kpa) > 1e-9):
        raise PostprocessError("forward and backward series must share the pressure grid")
    gap = backward.theta_deg - forward.theta_deg
    peak = float(np.max(forward.theta_deg))
    if peak <= 0:
        raise PostprocessError("forward series has no positive angles")
    ratio = float(np.max(np.abs(gap)) / peak * 100.0)
    area_gap = float(np.trapezoid(np.abs(gap), forward.pressures_kpa))
    area_fwd = float(np.trapezoid(forward.theta_deg, forward.pressures_kpa))
    loop = float(area_gap / area_fwd * 100.0) if area_fwd > 0 else 0.0
    return HysteresisResult(ratio, loop, forward.pressures_kpa.copy(), gap)


# ---------------------------------------------------------------------------
# bench logs


def parse_bench_log(text: str) -> tuple[AngleSeries, AngleSeries | None]:
    """Read a bench CSV; returns (forward, backward-or-None) legs.

    The log is split at the pressure peak; a strictly increasing log has no
    backward leg.
    """
    lines = text.strip().splitlines()
    if not lines or lines[0] != BENCH_HEADER:
        raise PostprocessError(f"bench log must start with {BENCH_HEADER!r}")
    rows = []
    for ln in lines[1:]:
        f = ln.split(",")
        try:
            rows.append((float(f[0]), float(f[1])))
        except (ValueError, IndexError) as exc:
            raise PostprocessError(f"bad bench row {ln!r}") from exc
    if not rows:
        raise PostprocessError("bench log has no data rows")
    p = np.array([r[0] for r in rows])
    th = np.array([r[1] for r in rows])
    top = int(np.argmax(p))
    fwd = AngleSeries(p[:top + 1], th[:top + 1])
    if top == len(p) - 1:
        return fwd, None
    back = AngleSeries(p[top:][::-1], th[top:][::-1])
    return fwd, back


def serialize_bench_log(series: AngleSeries, timestamps=None) -> str:
    lines = [BENCH_HEADER]
    for i in range(len(series.pressures_kpa)):
        ts = timestamps[i] if timestamps is not None else i
        lines.append(f"{float(series.pressures_kpa[i])!r},{float(series.theta_deg[i])!r},{ts}")
    return "\n".join(lines) + "\n"
