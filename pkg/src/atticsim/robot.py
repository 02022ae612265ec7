"""Tracked base with four articulating flippers: geometry presets, state,
differential-drive stepping, joist contact accounting, hatch fit, payload
and battery bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .world import AtticScene, floor_height_at

CANISTER_AREA = 1.3          # m^2 of coverage per foam canister
BATTERY_CAPACITY_AH = 20.0
BATTERY_V_FULL = 25.2        # 6S LiPo fully charged
BATTERY_V_EMPTY = 19.8       # 3.3 V/cell cutoff
PAYLOAD_CAPACITY_KG = 0.75

DEFAULT_CLIMB_LIMIT = 0.18
CONTACT_SAMPLE_STEP = 0.01
CONTACT_TOL = 1e-4


class RobotError(ValueError):
    pass


class CommandLimitError(RobotError):
    pass


class PayloadError(RobotError):
    pass


@dataclass(frozen=True)
class ArmGeometry:
    """5-DOF chain: waist yaw, shoulder/elbow/wrist pitch, wrist roll."""
    base_height: float = 0.12
    upper_arm: float = 0.30
    forearm: float = 0.25
    wrist_to_flange: float = 0.08
    gun_tip_offset: float = 0.12  # along tool axis from the flange
    joint_limits: tuple = (
        (-math.pi, math.pi),
        (-1.85, 1.85),
        (-2.6, 2.6),
        (-2.2, 2.2),
        (-math.pi, math.pi),
    )

    @property
    def reach(self) -> float:
        return self.upper_arm + self.forearm + self.wrist_to_flange + self.gun_tip_offset


@dataclass(frozen=True)
class RobotGeometry:
    name: str
    width: float
    folded_height: float
    body_length: float
    flipper_length: float
    unfolded_span: float
    track_gauge: float
    mass: float
    arm: ArmGeometry = field(default_factory=ArmGeometry)
    flipper_limits: tuple[float, float] = (-math.pi, math.pi)
    climb_limit: float = DEFAULT_CLIMB_LIMIT
    max_linear_velocity: float = 0.3
    max_angular_velocity: float = 1.0
    max_flipper_rate: float = 0.5


def _preset(name, width, folded_height, body_length, span, mass) -> RobotGeometry:
    return RobotGeometry(
        name=name,
        width=width,
        folded_height=folded_height,
        body_length=body_length,
        flipper_length=(span - body_length) / 2.0,
        unfolded_span=span,
        track_gauge=width - 0.12,
        mass=mass,
    )


PRESETS = {
    "paris1": _preset("paris1", 0.701, 0.48, 0.50, 0.98, 30.0),
    "paris2": _preset("paris2", 0.559, 0.48, 0.50, 1.125, 21.8),
}


def get_preset(name: str, overrides: dict | None = None) -> RobotGeometry:
    if name not in PRESETS:
        raise RobotError(f"unknown robot preset {name!r}")
    geom = PRESETS[name]
    if overrides:
        arm_over = overrides.pop("arm", None)
        geom = replace(geom, **overrides)
        if arm_over:
            geom = replace(geom, arm=replace(geom.arm, **arm_over))
    return geom


@dataclass
class RobotState:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    z: float = 0.0  # support height under the base midpoint
    flipper_angles: list = field(default_factory=lambda: [0.0, 0.0, 0.0, 0.0])
    track_velocity: tuple[float, float] = (0.0, 0.0)
    arm_joints: list = field(default_factory=lambda: [0.0] * 5)
    trigger_on: bool = False
    canister_remaining: float = CANISTER_AREA
    canister_swaps: int = 0
    battery_charge: float = BATTERY_CAPACITY_AH
    time: float = 0.0
    stuck: bool = False
    contact_safe: bool = True
    watchdog_hold: bool = False

    def base_pose(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.heading)


@dataclass(frozen=True)
class BaseCommand:
    linear_velocity: float = 0.0
    angular_velocity: float = 0.0
    flipper_rates: tuple = (0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ContactReport:
    contacts: list  # (joist index, (s_start, s_end) along the track line)
    count: int
    safe: bool


def battery_voltage(charge_ah: float) -> float:
    frac = min(max(charge_ah / BATTERY_CAPACITY_AH, 0.0), 1.0)
    return BATTERY_V_EMPTY + (BATTERY_V_FULL - BATTERY_V_EMPTY) * frac


def attach_payload(geometry: RobotGeometry, mass: float) -> bool:
    """Accept a payload mass against the arm's rated capacity."""
    if mass < 0:
        raise PayloadError("payload mass must be >= 0")
    if mass > PAYLOAD_CAPACITY_KG:
        raise PayloadError(
            f"payload {mass:.3f} kg exceeds capacity {PAYLOAD_CAPACITY_KG} kg "
            f"by {mass - PAYLOAD_CAPACITY_KG:.3f} kg")
    return True


def hatch_fit(geometry: RobotGeometry, folded: bool, hatch,
              clearance: float = 0.005) -> list[str]:
    """Axis alignments of the folded cross-section that pass the hatch.

    The cross-section is width x folded_height when folded, otherwise the
    unfolded span replaces the width.  5 mm clearance required per side.
    """
    w = geometry.width if folded else geometry.unfolded_span
    h = geometry.folded_height
    fits = []
    if w + 2 * clearance <= hatch.width and h + 2 * clearance <= hatch.height:
        fits.append("width_along_hatch_width")
    if h + 2 * clearance <= hatch.width and w + 2 * clearance <= hatch.height:
        fits.append("height_along_hatch_width")
    return fits


def _flipper_extension(length: float, angle: float) -> float:
    """Horizontal ground-contact extension of a flipper pair."""
    return length * max(0.0, math.cos(angle))


def support_span(geometry: RobotGeometry, state: RobotState) -> tuple[float, float]:
    """(rear, front) extent of the ground-contact line along the heading,
    relative to the base midpoint."""
    front = geometry.body_length / 2.0 + _flipper_extension(
        geometry.flipper_length, max(state.flipper_angles[0], state.flipper_angles[1]))
    rear = geometry.body_length / 2.0 + _flipper_extension(
        geometry.flipper_length, max(state.flipper_angles[2], state.flipper_angles[3]))
    return -rear, front


def _upper_hull(s: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Indices of points on the upper convex hull of (s, h), s ascending."""
    hull: list[int] = []
    for i in range(len(s)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (s[i1] - s[i0]) * (h[i] - h[i0]) - (h[i1] - h[i0]) * (s[i] - s[i0])
            if cross >= 0:  # keep only right turns for the upper hull
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull, dtype=int)


def _joist_arrays(scene: AtticScene):
    """Per-scene cached arrays for vectorized floor-profile lookups."""
    cached = getattr(scene, "_joist_arrays_cache", None)
    if cached is not None:
        return cached
    n = len(scene.joists)
    arrays = {
        "ox": np.array([j.origin[0] for j in scene.joists]),
        "oy": np.array([j.origin[1] for j in scene.joists]),
        "dx": np.array([j.direction[0] for j in scene.joists]),
        "dy": np.array([j.direction[1] for j in scene.joists]),
        "length": np.array([j.length for j in scene.joists]),
        "half_w": np.array([j.width / 2.0 for j in scene.joists]),
        "top": np.array([scene.drywall_level + j.top_height for j in scene.joists]),
        "n": n,
    }
    object.__setattr__(scene, "_joist_arrays_cache", arrays)
    return arrays


def floor_profile(scene: AtticScene, xs: np.ndarray, ys: np.ndarray):
    """Vectorized floor height + owning joist index (-1 for drywall)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    heights = np.full(xs.shape, scene.drywall_level)
    owner = np.full(xs.shape, -1, dtype=int)
    ja = _joist_arrays(scene)
    if ja["n"] == 0:
        return heights, owner
    px = xs[:, None] - ja["ox"]
    py = ys[:, None] - ja["oy"]
    along = px * ja["dx"] + py * ja["dy"]
    across = -px * ja["dy"] + py * ja["dx"]
    inside = (along >= 0.0) & (along <= ja["length"]) & (np.abs(across) <= ja["half_w"])
    tops = np.where(inside, ja["top"], -np.inf)
    best = np.argmax(tops, axis=1)
    best_top = tops[np.arange(len(xs)), best]
    hit = best_top > -np.inf
    heights[hit] = np.maximum(best_top[hit], scene.drywall_level)
    owner[hit] = best[hit]
    fx, fy = scene.footprint
    outside = (np.abs(xs) > fx / 2.0) | (np.abs(ys) > fy / 2.0)
    heights[outside] = scene.drywall_level
    owner[outside] = -1
    return heights, owner


def _floor_lookup(scene: AtticScene, x: float, y: float) -> tuple[float, int]:
    h, o = floor_profile(scene, np.array([x]), np.array([y]))
    return float(h[0]), int(o[0])


def support_analysis(scene: AtticScene, state: RobotState,
                     geometry: RobotGeometry):
    """Support-hull analysis under both track lines.

    The track is a rigid line; it rests on the upper convex hull of the
    floor-height profile sampled beneath it.  Returns
    (z, pitch, roll, ContactReport): a joist is a contact when one of its
    samples lies on the hull (within tolerance).
    """
    s_rear, s_front = support_span(geometry, state)
    cos_h, sin_h = math.cos(state.heading), math.sin(state.heading)
    n_samples = max(2, int(round((s_front - s_rear) / CONTACT_SAMPLE_STEP)) + 1)
    svals = np.linspace(s_rear, s_front, n_samples)

    touched: dict[int, list[float]] = {}
    z_mid = []
    slope = []
    for lateral in (-geometry.track_gauge / 2.0, geometry.track_gauge / 2.0):
        xs = state.x + svals * cos_h - lateral * sin_h
        ys = state.y + svals * sin_h + lateral * cos_h
        heights, owner = floor_profile(scene, xs, ys)
        hull = _upper_hull(svals, heights)
        hull_h = np.interp(svals, svals[hull], heights[hull])
        on_hull = np.abs(heights - hull_h) <= CONTACT_TOL
        support = [i for i in np.nonzero(on_hull)[0] if owner[i] >= 0]
        for i in support:
            touched.setdefault(int(owner[i]), []).append(float(svals[i]))
        z_mid.append(float(np.interp(0.0, svals, hull_h)))
        # attitude from the chord between outermost supporting contacts;
        # fall back to the span ends when nothing rests on a joist
        a, b = (support[0], support[-1]) if len(support) >= 2 else (0, len(svals) - 1)
        if svals[b] - svals[a] > 1e-9:
            slope.append((hull_h[b] - hull_h[a]) / (svals[b] - svals[a]))
        else:
            slope.append(0.0)

    contacts = [(idx, (min(ss), max(ss))) for idx, ss in sorted(touched.items())]
    report = ContactReport(contacts=contacts, count=len(contacts),
                           safe=len(contacts) >= 2)
    z = 0.5 * (z_mid[0] + z_mid[1])
    pitch = math.atan(0.5 * (slope[0] + slope[1]))
    roll = math.atan((z_mid[1] - z_mid[0]) / geometry.track_gauge)
    return z, pitch, roll, report


def contact_report(scene: AtticScene, state: RobotState,
                   geometry: RobotGeometry) -> ContactReport:
    """Joists supporting the track/flipper ground line."""
    return support_analysis(scene, state, geometry)[3]


def step_base(scene: AtticScene, state: RobotState, cmd: BaseCommand,
              dt: float, geometry: RobotGeometry) -> RobotState:
    """Advance the base by one step of differential-drive kinematics."""
    if not 0.0 < dt <= 0.1:
        raise RobotError(f"dt {dt} outside (0, 0.1]")
    if abs(cmd.linear_velocity) > geometry.max_linear_velocity + 1e-12:
        raise CommandLimitError(f"linear velocity {cmd.linear_velocity} over limit")
    if abs(cmd.angular_velocity) > geometry.max_angular_velocity + 1e-12:
        raise CommandLimitError(f"angular velocity {cmd.angular_velocity} over limit")
    for r in cmd.flipper_rates:
        if abs(r) > geometry.max_flipper_rate + 1e-12:
            raise CommandLimitError(f"flipper rate {r} over limit")

    new = replace(state)
    new.time = state.time + dt
    new.flipper_angles = [
        min(max(a + r * dt, geometry.flipper_limits[0]), geometry.flipper_limits[1])
        for a, r in zip(state.flipper_angles, cmd.flipper_rates)
    ]

    v, w = cmd.linear_velocity, cmd.angular_velocity
    if state.battery_charge <= 0.0:
        v, w = 0.0, 0.0
    half_gauge = geometry.track_gauge / 2.0
    new.track_velocity = (v - w * half_gauge, v + w * half_gauge)

    # exact arc integration of the unicycle model
    if abs(w) < 1e-12:
        dx = v * dt * math.cos(state.heading)
        dy = v * dt * math.sin(state.heading)
        dheading = 0.0
    else:
        dheading = w * dt
        radius = v / w
        dx = radius * (math.sin(state.heading + dheading) - math.sin(state.heading))
        dy = -radius * (math.cos(state.heading + dheading) - math.cos(state.heading))

    # step climbing: a rise ahead must be bridged by a raised leading flipper
    new.stuck = False
    if v != 0.0:
        direction = 1.0 if v > 0 else -1.0
        s_rear, s_front = support_span(geometry, state)
        lead = s_front if direction > 0 else -s_rear
        probe = lead + abs(v) * dt + 0.02
        px = state.x + direction * probe * math.cos(state.heading)
        py = state.y + direction * probe * math.sin(state.heading)
        h_ahead, _ = _floor_lookup(scene, px, py)
        rise = h_ahead - state.z
        if rise > 0.02:
            flip = new.flipper_angles[0:2] if direction > 0 else new.flipper_angles[2:4]
            tip_height = geometry.flipper_length * math.sin(max(max(flip), 0.0))
            if rise > geometry.climb_limit or tip_height + 1e-9 < rise:
                new.stuck = True
                dx = dy = 0.0

    new.x = state.x + dx
    new.y = state.y + dy
    new.heading = state.heading + dheading

    new.z, new.pitch, new.roll, report = support_analysis(scene, new, geometry)
    new.contact_safe = report.safe

    # linear discharge proportional to commanded motor effort
    effort = abs(new.track_velocity[0]) + abs(new.track_velocity[1]) \
        + 0.2 * sum(abs(r) for r in cmd.flipper_rates)
    new.battery_charge = max(0.0, state.battery_charge - 0.02 * effort * dt)
    return new
