"""Arc trajectory planning and seal execution for the dispensing gun.

Trajectories are built from three-waypoint arc segments (circumcircle
through p0, p1, p2 with per-waypoint speeds).  Collinear triples degrade to
straight lines but keep a degenerate flag.  Plans are validated waypoint by
waypoint against arm inverse kinematics and executed with exact foam
accounting against the canister budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import transforms
from .arm import JointLimitError, Unreachable, arm_ik
from .robot import CANISTER_AREA, ArmGeometry, RobotState
from .world import AtticScene, apply_seal_coverage

COLLINEAR_AREA_TOL = 1e-12
DEFAULT_BEAD_WIDTH = 0.02
DEFAULT_STANDOFF = 0.05
DEFAULT_SEAL_SPEED = 0.05


class PlanError(ValueError):
    pass


class UnreachablePlan(PlanError):
    pass


@dataclass
class ArcSegment:
    waypoints: np.ndarray            # (3, 3): p0, p1, p2
    speeds: tuple = (DEFAULT_SEAL_SPEED,) * 3
    center: np.ndarray | None = None
    radius: float = 0.0
    degenerate_line: bool = False
    _sweep: float = 0.0
    _theta1: float = 0.0
    _basis: tuple | None = None

    def arc_length(self) -> float:
        if self.degenerate_line:
            p0, p1, p2 = self.waypoints
            return float(np.linalg.norm(p1 - p0) + np.linalg.norm(p2 - p1))
        return self.radius * abs(self._sweep)

    def sample(self, spacing: float) -> np.ndarray:
        """Points along the arc from p0 through p1 to p2, ~spacing apart.

        Always includes the three waypoints exactly.
        """
        length = self.arc_length()
        n = max(2, int(math.ceil(length / spacing)))
        if self.degenerate_line:
            p0, p1, p2 = self.waypoints
            l01 = np.linalg.norm(p1 - p0)
            l12 = np.linalg.norm(p2 - p1)
            n01 = max(1, int(round(n * l01 / max(length, 1e-12))))
            n12 = max(1, n - n01)
            first = [p0 + (p1 - p0) * t for t in np.linspace(0, 1, n01 + 1)]
            second = [p1 + (p2 - p1) * t for t in np.linspace(0, 1, n12 + 1)][1:]
            return np.asarray(first + second)
        e1, e2 = self._basis
        thetas = np.linspace(0.0, self._sweep, n + 1)
        pts = self.center + self.radius * (
            np.outer(np.cos(thetas), e1) + np.outer(np.sin(thetas), e2))
        # anchor the waypoints exactly
        pts[0] = self.waypoints[0]
        pts[-1] = self.waypoints[2]
        mid = int(np.argmin(np.abs(thetas - self._theta1)))
        pts[mid] = self.waypoints[1]
        return pts


def circumcenter(p0, p1, p2) -> tuple[np.ndarray, float]:
    """Circumcenter and radius of three non-collinear 3D points."""
    p0, p1, p2 = (np.asarray(p, dtype=float) for p in (p0, p1, p2))
    a = p0 - p2
    b = p1 - p2
    axb = np.cross(a, b)
    denom = 2.0 * float(axb @ axb)
    if denom == 0.0:
        raise PlanError("collinear points have no circumcenter")
    center = p2 + np.cross(float(a @ a) * b - float(b @ b) * a, axb) / denom
    return center, float(np.linalg.norm(p0 - center))


def plan_arc(p0, p1, p2, speeds=(DEFAULT_SEAL_SPEED,) * 3) -> ArcSegment:
    """Arc through three waypoints; collinear triples become flagged lines."""
    p0, p1, p2 = (np.asarray(p, dtype=float) for p in (p0, p1, p2))
    if np.linalg.norm(p1 - p0) < 1e-12 or np.linalg.norm(p2 - p1) < 1e-12 \
            or np.linalg.norm(p2 - p0) < 1e-12:
        raise PlanError("waypoints must be distinct")
    for s in speeds:
        if s <= 0:
            raise PlanError("speeds must be positive")

    cross = np.cross(p1 - p0, p2 - p0)
    area = 0.5 * float(np.linalg.norm(cross))
    seg = ArcSegment(waypoints=np.stack([p0, p1, p2]), speeds=tuple(speeds))
    if area < COLLINEAR_AREA_TOL:
        seg.degenerate_line = True
        return seg

    center, radius = circumcenter(p0, p1, p2)
    normal = cross / np.linalg.norm(cross)
    e1 = (p0 - center) / radius
    e2 = np.cross(normal, e1)

    def angle_of(p):
        d = p - center
        return math.atan2(float(d @ e2), float(d @ e1))

    t1 = angle_of(p1) % (2.0 * math.pi)
    t2 = angle_of(p2) % (2.0 * math.pi)
    if t1 <= t2:
        sweep = t2
        theta1 = t1
    else:  # the short way around does not pass p1: go clockwise
        sweep = t2 - 2.0 * math.pi
        theta1 = t1 - 2.0 * math.pi
    seg.center = center
    seg.radius = radius
    seg._sweep = sweep
    seg._theta1 = theta1
    seg._basis = (e1, e2)
    return seg


@dataclass
class SealPlan:
    roi_id: str
    segments: list
    standoff: float
    bead_width: float
    estimated_foam: float
    reachable: bool
    surface_normal: np.ndarray = field(default_factory=lambda: np.array([0., 0., 1.]))
    unreachable_waypoint: np.ndarray | None = None

    def total_length(self) -> float:
        return sum(seg.arc_length() for seg in self.segments)


def _roi_centerline(roi_geometry: dict, n: int = 400) -> np.ndarray:
    """Dense samples of the ROI geometry centerline (for coverage scoring)."""
    g = roi_geometry
    if g["type"] == "circle":
        c = np.asarray(g["center"], dtype=float)
        normal = np.asarray(g["normal"], dtype=float)
        u, v = _plane_axes(normal)
        th = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        return c + g["radius"] * (np.outer(np.cos(th), u) + np.outer(np.sin(th), v))
    if g["type"] == "segment":
        p0 = np.asarray(g["p0"], dtype=float)
        p1 = np.asarray(g["p1"], dtype=float)
        return p0 + np.outer(np.linspace(0.0, 1.0, n), p1 - p0)
    if g["type"] == "patch":
        c = np.asarray(g["centroid"], dtype=float)
        ex, ey = g["extent"]
        xs = np.linspace(-ex / 2.0, ex / 2.0, max(2, int(math.sqrt(n))))
        ys = np.linspace(-ey / 2.0, ey / 2.0, max(2, int(math.sqrt(n))))
        grid = np.array([[x, y, 0.0] for x in xs for y in ys])
        return c + grid
    raise PlanError(f"unknown ROI geometry {g['type']!r}")


def _plane_axes(normal: np.ndarray):
    normal = normal / np.linalg.norm(normal)
    ref = np.array([1.0, 0.0, 0.0])
    if abs(float(normal @ ref)) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    u = np.cross(normal, ref)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    return u, v


def _shallow_arc(q0: np.ndarray, q2: np.ndarray, lateral: np.ndarray,
                 speed: float) -> ArcSegment:
    """Arc between two points with sagitta min(1 cm, length / 10)."""
    length = float(np.linalg.norm(q2 - q0))
    sagitta = min(0.01, length / 10.0)
    mid = 0.5 * (q0 + q2) + sagitta * lateral
    return plan_arc(q0, mid, q2, speeds=(speed,) * 3)


def plan_roi_trace(roi, bead_width: float = DEFAULT_BEAD_WIDTH,
                   standoff: float = DEFAULT_STANDOFF,
                   arm: ArmGeometry | None = None,
                   arm_base_pose: np.ndarray | None = None,
                   speed: float = DEFAULT_SEAL_SPEED) -> SealPlan:
    """Gun-tip trajectory covering an ROI's fitted geometry.

    Circle: two semicircular arcs.  Segment: one shallow arc.  Patch:
    boustrophedon rows of shallow arcs at bead_width pitch.  Waypoints are
    offset from the surface by standoff along its normal and each sampled
    point is checked against arm IK when an arm and base pose are given.
    """
    g = roi.geometry if hasattr(roi, "geometry") else roi["geometry"]
    roi_id = roi.id if hasattr(roi, "id") else roi["id"]
    if standoff <= 0:
        raise PlanError("standoff must be > 0")

    segments = []
    if g["type"] == "circle":
        c = np.asarray(g["center"], dtype=float)
        r = float(g["radius"])
        if r <= 0:
            raise PlanError("empty circle geometry")
        normal = np.asarray(g["normal"], dtype=float)
        if normal[2] < 0:  # keep the gun above the surface
            normal = -normal
        u, v = _plane_axes(normal)
        off = c + standoff * normal

        def on_circle(theta):
            return off + r * (math.cos(theta) * u + math.sin(theta) * v)

        for start in (0.0, math.pi):
            segments.append(plan_arc(
                on_circle(start), on_circle(start + math.pi / 2.0),
                on_circle(start + math.pi), speeds=(speed,) * 3))
        surface_normal = normal
    elif g["type"] == "segment":
        p0 = np.asarray(g["p0"], dtype=float)
        p1 = np.asarray(g["p1"], dtype=float)
        if np.linalg.norm(p1 - p0) < 1e-9:
            raise PlanError("empty segment geometry")
        normal = np.array([0.0, 0.0, 1.0])
        direction = (p1 - p0) / np.linalg.norm(p1 - p0)
        lateral = np.cross(normal, direction)
        if np.linalg.norm(lateral) < 1e-9:
            lateral = np.array([1.0, 0.0, 0.0])
        else:
            lateral /= np.linalg.norm(lateral)
        segments.append(_shallow_arc(p0 + standoff * normal,
                                     p1 + standoff * normal, lateral, speed))
        surface_normal = normal
    elif g["type"] == "patch":
        c = np.asarray(g["centroid"], dtype=float)
        ex, ey = g["extent"]
        if ex <= 0 and ey <= 0:
            raise PlanError("empty patch geometry")
        normal = np.array([0.0, 0.0, 1.0])
        n_rows = max(1, int(math.ceil(ey / bead_width)) + 1)
        ys = np.linspace(-ey / 2.0, ey / 2.0, n_rows)
        for i, y in enumerate(ys):
            x0, x1 = (-ex / 2.0, ex / 2.0) if i % 2 == 0 else (ex / 2.0, -ex / 2.0)
            q0 = c + np.array([x0, y, standoff])
            q2 = c + np.array([x1, y, standoff])
            segments.append(_shallow_arc(q0, q2, np.array([0.0, 1.0, 0.0]), speed))
        surface_normal = normal
    else:
        raise PlanError(f"unknown ROI geometry {g['type']!r}")

    total = sum(seg.arc_length() for seg in segments)
    plan = SealPlan(roi_id=roi_id, segments=segments, standoff=standoff,
                    bead_width=bead_width, estimated_foam=total * bead_width,
                    reachable=True, surface_normal=surface_normal)

    if arm is not None and arm_base_pose is not None:
        world_to_arm = transforms.invert(np.asarray(arm_base_pose, dtype=float))
        approach_world = -surface_normal
        for seg in segments:
            for p in seg.sample(0.02):
                target = transforms.apply(world_to_arm, p)
                approach = world_to_arm[:3, :3] @ approach_world
                try:
                    arm_ik(arm, target, approach)
                except (Unreachable, JointLimitError):
                    plan.reachable = False
                    plan.unreachable_waypoint = p
                    return plan
    return plan


@dataclass
class SealResult:
    roi_id: str
    coverage_fraction: float
    foam_used: float
    duration: float
    aborted_reason: str | None = None


def execute_plan(state: RobotState, scene: AtticScene, plan: SealPlan,
                 roi_geometry: dict | None = None, leak_id: str | None = None,
                 dt: float = 0.02) -> SealResult:
    """Drive the gun tip along the plan, spending foam and scoring coverage.

    Coverage is the fraction of the ROI centerline within bead_width / 2 of
    the executed bead (the tip path projected back onto the surface).  On
    completion the covered fraction is fed back into the world model for
    leak_id, if given.
    """
    if not plan.reachable:
        raise UnreachablePlan(f"plan for {plan.roi_id} is not reachable")
    if state.canister_remaining <= 0.0:
        raise PlanError("canister empty")

    total_length = plan.total_length()
    budget_length = state.canister_remaining / plan.bead_width
    executed = min(total_length, budget_length)
    aborted = executed < total_length - 1e-12

    # walk the segments accumulating the executed bead path
    spacing = max(plan.bead_width / 4.0, 1e-4)
    bead_points = []
    duration = 0.0
    remaining = executed
    for seg in plan.segments:
        seg_len = seg.arc_length()
        if remaining <= 0:
            break
        take = min(seg_len, remaining)
        pts = seg.sample(spacing)
        if take < seg_len - 1e-12:
            # truncate by cumulative arc length
            deltas = np.linalg.norm(np.diff(pts, axis=0), axis=1)
            cum = np.concatenate([[0.0], np.cumsum(deltas)])
            pts = pts[cum <= take + 1e-9]
        bead_points.append(pts - plan.standoff * plan.surface_normal)
        speed = seg.speeds[0]
        duration += take / speed
        remaining -= take

    foam_used = executed * plan.bead_width
    coverage = 0.0
    geometry = roi_geometry
    if geometry is None and bead_points:
        geometry = None
    if geometry is not None and bead_points:
        center = _roi_centerline(geometry)
        tree = cKDTree(np.vstack(bead_points))
        dist, _ = tree.query(center)
        coverage = float(np.mean(dist <= plan.bead_width / 2.0 + 1e-9))
    elif bead_points and geometry is None:
        coverage = 0.0 if total_length == 0 else min(1.0, executed / total_length)

    state.canister_remaining -= foam_used
    state.trigger_on = False

    if leak_id is not None and coverage > 0.0:
        apply_seal_coverage(scene, leak_id, coverage, state.time)

    return SealResult(
        roi_id=plan.roi_id,
        coverage_fraction=coverage,
        foam_used=foam_used,
        duration=duration,
        aborted_reason="canister_empty" if aborted else None,
    )


def canister_swap(state: RobotState) -> RobotState:
    """Refill the canister; only legal while stationary."""
    if any(abs(v) > 1e-12 for v in state.track_velocity):
        raise PlanError("cannot swap canister while moving")
    state.canister_remaining = CANISTER_AREA
    state.canister_swaps += 1
    return state
