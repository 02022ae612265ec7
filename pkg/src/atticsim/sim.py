"""Deterministic tick-driven simulation: world + robot + sensing +
perception + sealing, with replay logging, state hashing, and metrics.

All randomness flows from a single seeded generator drawn in tick order, so
identical scenario + seed reproduce bit-identical replay logs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import perception, planner, sensors, transforms
from .geometry import build_mesh
from .protocol import CommandEnvelope, ProtocolError
from .robot import (BaseCommand, CommandLimitError, RobotGeometry, RobotState,
                    battery_voltage, contact_report, get_preset, step_base)
from .world import AtticScene, SceneError, load_scene, scene_to_document

LOG_SCHEMA_VERSION = 1
SCENARIO_SCHEMA_VERSION = 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


class ScenarioError(ValueError):
    pass


_SCENARIO_KEYS = {"schema_version", "scene", "scene_path", "robot", "initial_pose",
                  "seed", "duration_s", "tick_rate_hz", "frame_stride",
                  "fiducial_stride", "drift", "thermal_noise_sigma", "camera",
                  "script", "sense", "roi_stride", "name"}


@dataclass
class Scenario:
    scene_document: dict
    robot_preset: str = "paris1"
    robot_overrides: dict = field(default_factory=dict)
    initial_pose: tuple = (0.0, 0.0, 0.0)
    seed: int = 0
    duration: float = 10.0
    tick_rate: float = 50.0
    frame_stride: int = 0          # 0 disables sensing
    fiducial_stride: int = 0       # 0 disables fiducial corrections
    drift: dict = field(default_factory=dict)
    thermal_noise_sigma: float = 0.1
    camera: dict = field(default_factory=dict)
    script: list = field(default_factory=list)
    sense: str = "both"
    roi_stride: int = 1
    name: str = "scenario"

    @classmethod
    def from_document(cls, doc: dict, base_dir: Path | None = None) -> "Scenario":
        if not isinstance(doc, dict):
            raise ScenarioError("scenario must be a JSON object")
        if doc.get("schema_version") != SCENARIO_SCHEMA_VERSION:
            raise ScenarioError(
                f"scenario schema_version must be {SCENARIO_SCHEMA_VERSION}")
        unknown = set(doc) - _SCENARIO_KEYS
        if unknown:
            raise ScenarioError(f"unknown scenario field(s): {sorted(unknown)}")
        if "scene" in doc:
            scene_doc = doc["scene"]
        elif "scene_path" in doc:
            path = Path(doc["scene_path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            scene_doc = json.loads(path.read_text())
        else:
            raise ScenarioError("scenario requires 'scene' or 'scene_path'")
        try:
            load_scene(scene_doc)  # validate early
        except SceneError as exc:
            raise ScenarioError(f"invalid scene: {exc}") from exc
        robot = doc.get("robot", {})
        script = sorted(doc.get("script", []), key=lambda c: (c.get("t", 0.0),
                                                              c.get("seq", 0)))
        return cls(
            scene_document=scene_doc,
            robot_preset=robot.get("preset", "paris1"),
            robot_overrides=dict(robot.get("overrides", {})),
            initial_pose=tuple(doc.get("initial_pose", (0.0, 0.0, 0.0))),
            seed=int(doc.get("seed", 0)),
            duration=float(doc.get("duration_s", 10.0)),
            tick_rate=float(doc.get("tick_rate_hz", 50.0)),
            frame_stride=int(doc.get("frame_stride", 0)),
            fiducial_stride=int(doc.get("fiducial_stride", 0)),
            drift=dict(doc.get("drift", {})),
            thermal_noise_sigma=float(doc.get("thermal_noise_sigma", 0.1)),
            camera=dict(doc.get("camera", {})),
            script=script,
            sense=str(doc.get("sense", "both")),
            roi_stride=int(doc.get("roi_stride", 1)),
            name=str(doc.get("name", "scenario")),
        )

    def to_document(self) -> dict:
        return {
            "schema_version": SCENARIO_SCHEMA_VERSION,
            "name": self.name,
            "scene": self.scene_document,
            "robot": {"preset": self.robot_preset, "overrides": self.robot_overrides},
            "initial_pose": list(self.initial_pose),
            "seed": self.seed,
            "duration_s": self.duration,
            "tick_rate_hz": self.tick_rate,
            "frame_stride": self.frame_stride,
            "fiducial_stride": self.fiducial_stride,
            "drift": self.drift,
            "thermal_noise_sigma": self.thermal_noise_sigma,
            "camera": self.camera,
            "script": self.script,
            "sense": self.sense,
            "roi_stride": self.roi_stride,
        }


@dataclass
class MetricsReport:
    roi_precision: float
    roi_recall: float
    seal_coverage: dict
    final_pose_error: float
    contact_violations: int
    foam_used: float
    runtime: float

    def to_dict(self) -> dict:
        return {
            "roi_precision": self.roi_precision,
            "roi_recall": self.roi_recall,
            "seal_coverage": self.seal_coverage,
            "final_pose_error_m": self.final_pose_error,
            "contact_violations": self.contact_violations,
            "foam_used_m2": self.foam_used,
            "runtime_s": self.runtime,
        }


class Simulation:
    """Single-stepper simulation; queries on snapshots are side-effect free."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.scene: AtticScene = load_scene(scenario.scene_document)
        self.mesh = build_mesh(self.scene)
        self.geometry: RobotGeometry = get_preset(
            scenario.robot_preset, dict(scenario.robot_overrides))
        x0, y0, h0 = scenario.initial_pose
        self.state = RobotState(x=x0, y=y0, heading=h0)
        self.mode = "drive"
        self.tick = 0
        self.dt = 1.0 / scenario.tick_rate
        self.rng = np.random.default_rng(scenario.seed)
        self.pose_estimate = perception.PoseEstimate(x=x0, y=y0, heading=h0)
        cam = scenario.camera
        self.rgbd = sensors.CameraIntrinsics.from_fov(
            int(cam.get("width", 160)), int(cam.get("height", 120)),
            87.0, 58.0, max_range=3.0)
        self.thermal_spec = sensors.ThermalCamSpec(
            intrinsics=sensors.CameraIntrinsics.from_fov(
                int(cam.get("thermal_width", 80)), int(cam.get("thermal_height", 60)),
                57.0, 44.0, max_range=5.0),
            noise_sigma=scenario.thermal_noise_sigma)
        self.vmap = perception.VoxelMap(voxel_size=float(cam.get("voxel_size", 0.02)))
        self.thermal_points: list = []
        self._thermal_cells: dict = {}
        self._senses_since_roi = 0
        self.rois: list = []
        self.frames_rendered = 0
        self.contact_violations = 0
        self.foam_used_total = 0.0
        self.seal_results: list = []
        self.events: list = []
        self.active_command = BaseCommand()
        self.flipper_rates = [0.0, 0.0, 0.0, 0.0]
        self.last_frames: dict = {}
        self.frame_sink = None
        # fixed attitude of the arm support: simulation keeps the estimator 2D
        self._tag_map = {
            t.id: transforms.transform(transforms.rot_z(t.yaw), t.position)
            for t in self.scene.tags
        }

    # -- camera rigs --------------------------------------------------------

    def base_camera_pose(self) -> np.ndarray:
        """Forward-looking RGBD camera at the front of the base."""
        c, s = math.cos(self.state.heading), math.sin(self.state.heading)
        eye = np.array([
            self.state.x + 0.2 * c,
            self.state.y + 0.2 * s,
            self.state.z + 0.30,
        ])
        look = eye + np.array([c, s, -0.25])
        return transforms.camera_pose(eye, look)

    def arm_camera_pose(self) -> np.ndarray:
        """Downward thermal-stereo module near the gun tip."""
        c, s = math.cos(self.state.heading), math.sin(self.state.heading)
        eye = np.array([
            self.state.x + 0.45 * c,
            self.state.y + 0.45 * s,
            self.state.z + 0.55,
        ])
        look = eye + np.array([0.0, 0.0, -1.0])
        up = np.array([c, s, 0.0])
        return transforms.camera_pose(eye, look, up=up)

    def arm_base_pose(self) -> np.ndarray:
        c = transforms.rot_z(self.state.heading)
        return transforms.transform(c, (self.state.x, self.state.y, self.state.z))

    # -- command application ------------------------------------------------

    def apply_command(self, env: CommandEnvelope) -> None:
        data = env.data
        if env.type == "drive":
            self.active_command = BaseCommand(
                linear_velocity=float(data["v"]),
                angular_velocity=float(data["w"]),
                flipper_rates=tuple(self.flipper_rates))
        elif env.type == "flipper":
            self.flipper_rates[int(data["index"])] = float(data["rate"])
            self.active_command = BaseCommand(
                linear_velocity=self.active_command.linear_velocity,
                angular_velocity=self.active_command.angular_velocity,
                flipper_rates=tuple(self.flipper_rates))
        elif env.type == "arm_jog":
            j = int(data["joint"])
            lo, hi = self.geometry.arm.joint_limits[j]
            q = self.state.arm_joints[j] + float(data["delta"])
            self.state.arm_joints[j] = min(max(q, lo), hi)
        elif env.type == "arm_goto":
            from .arm import JointLimitError, Unreachable, arm_ik
            target = transforms.apply(transforms.invert(self.arm_base_pose()),
                                      np.asarray(data["position"], dtype=float))
            approach = np.asarray(data["approach"], dtype=float)
            approach = self.arm_base_pose()[:3, :3].T @ approach
            try:
                joints, _ = arm_ik(self.geometry.arm, target, approach)
                self.state.arm_joints = joints
            except (Unreachable, JointLimitError) as exc:
                self.events.append({"type": "arm_goto_failed", "reason": str(exc)})
        elif env.type == "trigger":
            self.state.trigger_on = bool(data["on"])
        elif env.type == "mode_toggle":
            self.mode = data["mode"]
        elif env.type == "request_seal":
            self._run_seal(str(data["roi_id"]))
        elif env.type == "swap_canister":
            try:
                planner.canister_swap(self.state)
                self.events.append({"type": "canister_swapped",
                                    "count": self.state.canister_swaps})
            except planner.PlanError as exc:
                self.events.append({"type": "swap_failed", "reason": str(exc)})
        elif env.type == "estop":
            self.active_command = BaseCommand()
            self.flipper_rates = [0.0, 0.0, 0.0, 0.0]
            self.state.trigger_on = False
            self.events.append({"type": "estop"})
        elif env.type == "heartbeat":
            pass

    def find_roi(self, roi_id: str):
        if roi_id == "auto" and self.rois:
            return self.rois[0]
        for roi in self.rois:
            if roi.id == roi_id:
                return roi
        return None

    def _run_seal(self, roi_id: str) -> None:
        roi = self.find_roi(roi_id)
        if roi is None:
            self.events.append({"type": "seal_error", "roi_id": roi_id,
                                "reason": "unknown_roi"})
            return
        plan = planner.plan_roi_trace(
            roi, arm=self.geometry.arm, arm_base_pose=self.arm_base_pose())
        if not plan.reachable:
            self.events.append({"type": "seal_error", "roi_id": roi.id,
                                "reason": "unreachable"})
            return
        leak_id = self._match_leak(roi)
        try:
            result = planner.execute_plan(self.state, self.scene, plan,
                                          roi_geometry=roi.geometry,
                                          leak_id=leak_id)
        except planner.PlanError as exc:
            self.events.append({"type": "seal_error", "roi_id": roi.id,
                                "reason": str(exc)})
            return
        self.foam_used_total += result.foam_used
        self.seal_results.append(result)
        self.events.append({
            "type": "seal_result", "roi_id": roi.id,
            "coverage": round(result.coverage_fraction, 9),
            "foam_used": round(result.foam_used, 9),
            "duration": round(result.duration, 9),
            "aborted_reason": result.aborted_reason,
            "leak_id": leak_id,
        })

    def _match_leak(self, roi, tol: float = 0.10) -> str | None:
        """Ground-truth leak nearest the ROI geometry (sim-side bookkeeping)."""
        ref = _roi_reference_point(roi.geometry)
        best, best_d = None, tol
        for leak in self.scene.leaks:
            d = leak.distance_to(ref)
            if d <= best_d:
                best, best_d = leak.id, d
        return best

    # -- stepping -----------------------------------------------------------

    def step(self, commands=()) -> list:
        """Advance one tick, applying envelopes in order; returns events."""
        self.events = []
        for env in commands:
            try:
                self.apply_command(env)
            except (CommandLimitError, ProtocolError) as exc:
                self.events.append({"type": "command_error", "seq": env.seq,
                                    "reason": str(exc)})
        self.state = step_base(self.scene, self.state, self.active_command,
                               self.dt, self.geometry)
        if not self.state.contact_safe:
            self.contact_violations += 1
            self.events.append({"type": "contact_unsafe"})
        if self.state.stuck:
            self.events.append({"type": "stuck"})

        # odometry integrates the commanded motion with injected drift
        v = self.active_command.linear_velocity if self.state.battery_charge > 0 else 0.0
        w = self.active_command.angular_velocity if self.state.battery_charge > 0 else 0.0
        if self.state.stuck:
            v = 0.0
        self.pose_estimate = perception.odometry_update(
            self.pose_estimate, (v * self.dt, w * self.dt),
            self.scenario.drift, rng=self.rng)

        self.tick += 1
        self.state.time = self.tick * self.dt

        stride = self.scenario.frame_stride
        if stride > 0 and self.tick % stride == 0:
            self._sense()
        fid_stride = self.scenario.fiducial_stride
        if fid_stride > 0 and self.tick % fid_stride == 0:
            self._fiducial_correction()
        return self.events

    def _sense(self) -> None:
        which = self.scenario.sense
        if which in ("both", "rgbd"):
            seed = int(self.rng.integers(0, 2**63 - 1))
            cam_pose = self.base_camera_pose()
            depth, color = sensors.render_rgbd(self.mesh, cam_pose, self.rgbd,
                                               seed=seed)
            pts, cols, _ = sensors.stereo_pointcloud(depth, self.rgbd, cam_pose)
            pts_est = self._replace_pose(pts)
            perception.integrate_map(self.vmap, pts_est, self.pose_estimate,
                                     colors=cols)
            self.last_frames["rgb"] = (self.state.time, color)
            self.last_frames["depth"] = (self.state.time, depth)
            if self.frame_sink is not None:
                self.frame_sink(self.tick, "rgb", color)

        if which in ("both", "thermal"):
            arm_pose = self.arm_camera_pose()
            th_seed = int(self.rng.integers(0, 2**63 - 1))
            thermal, arm_depth = sensors.render_thermal_rgbd(
                self.scene, self.mesh, arm_pose, self.thermal_spec,
                self.state.time, seed=th_seed)
            apts, _, _ = sensors.stereo_pointcloud(
                arm_depth, self.thermal_spec.intrinsics, arm_pose)
            # ideal co-registered rig: identity stereo->thermal extrinsics
            cam_pts = transforms.apply(transforms.invert(arm_pose), apts)
            fused = perception.fuse_thermal(cam_pts, thermal, np.eye(4),
                                            self.thermal_spec.intrinsics)
            # dedupe on a 1 cm grid so the accumulated cloud stays bounded
            if fused:
                positions = np.array([tp.position for tp in fused])
                world = self._replace_pose(transforms.apply(arm_pose, positions))
                keys = np.round(world / 0.01).astype(int)
                for tp, wp, key in zip(fused, world, map(tuple, keys)):
                    self._thermal_cells[key] = perception.ThermalPoint(
                        position=wp, temperature=tp.temperature,
                        source_pixel=tp.source_pixel)
            self.thermal_points = list(self._thermal_cells.values())
            self._senses_since_roi += 1
            if self._senses_since_roi >= self.scenario.roi_stride:
                self._senses_since_roi = 0
                self.rois = perception.detect_rois(
                    self.thermal_points, self.scene.ambient_attic_temp,
                    candidate_min_delta=0.3)
            self.last_frames["thermal"] = (self.state.time, thermal)
            if self.frame_sink is not None:
                self.frame_sink(self.tick, "thermal", thermal)
        self.frames_rendered += 1

    def _replace_pose(self, world_points: np.ndarray) -> np.ndarray:
        """Re-place truth-frame points using the estimated pose."""
        est = self.pose_estimate
        truth = self.state
        if (abs(est.x - truth.x) < 1e-15 and abs(est.y - truth.y) < 1e-15
                and abs(est.heading - truth.heading) < 1e-15):
            return world_points
        # world -> robot (truth), then robot -> world (estimate)
        c, s = math.cos(truth.heading), math.sin(truth.heading)
        R_t = np.array([[c, s], [-s, c]])
        local = (world_points[:, :2] - (truth.x, truth.y)) @ R_t.T
        c2, s2 = math.cos(est.heading), math.sin(est.heading)
        R_e = np.array([[c2, -s2], [s2, c2]])
        out = world_points.copy()
        out[:, :2] = local @ R_e.T + (est.x, est.y)
        return out

    def _fiducial_correction(self) -> None:
        if not self.scene.tags:
            return
        seed = int(self.rng.integers(0, 2**63 - 1))
        cam_pose = self.base_camera_pose()
        noise = float(self.scenario.drift.get("fiducial_noise", 0.0))
        obs = sensors.observe_fiducials(self.scene, cam_pose, self.rgbd,
                                        noise_sigma_pos=noise, seed=seed,
                                        mesh=self.mesh)
        if not obs:
            return
        cam_from_robot = transforms.invert(self.arm_base_pose()) @ cam_pose
        self.pose_estimate = perception.fiducial_correct(
            self.pose_estimate, obs, self._tag_map,
            camera_from_robot=cam_from_robot,
            observation_noise=noise, time=self.state.time)

    # -- hashing and telemetry ----------------------------------------------

    def state_hash(self) -> int:
        payload = {
            "tick": self.tick,
            "pose": [_r(self.state.x), _r(self.state.y), _r(self.state.heading)],
            "z": _r(self.state.z),
            "attitude": [_r(self.state.roll), _r(self.state.pitch)],
            "flippers": [_r(a) for a in self.state.flipper_angles],
            "arm": [_r(a) for a in self.state.arm_joints],
            "trigger": self.state.trigger_on,
            "canister": _r(self.state.canister_remaining),
            "swaps": self.state.canister_swaps,
            "battery": _r(self.state.battery_charge),
            "mode": self.mode,
            "stuck": self.state.stuck,
            "safe": self.state.contact_safe,
            "estimate": [_r(self.pose_estimate.x), _r(self.pose_estimate.y),
                         _r(self.pose_estimate.heading)],
            "uncertainty": _r(self.pose_estimate.uncertainty),
            "leaks": [[lk.id, _r(lk.sealed_fraction),
                       _r(lk.seal_time) if lk.seal_time is not None else None]
                      for lk in self.scene.leaks],
            "voxels": len(self.vmap.cells),
            "rois": len(self.rois),
        }
        blob = json.dumps(payload, separators=(",", ":"), sort_keys=True)
        return fnv1a64(blob.encode())

    def telemetry(self) -> dict:
        est = self.pose_estimate
        active = None
        return {
            "time": round(self.state.time, 6),
            "battery_voltage": round(battery_voltage(self.state.battery_charge), 3),
            "signal_strength": self.signal_strength(),
            "pose_estimate": {"x": est.x, "y": est.y, "heading": est.heading,
                              "uncertainty": est.uncertainty},
            "canister_remaining": self.state.canister_remaining,
            "mode": self.mode,
            "contact_safe": self.state.contact_safe,
            "active_seal": active,
            "watchdog_hold": self.state.watchdog_hold,
            "trigger_on": self.state.trigger_on,
            "stuck": self.state.stuck,
        }

    def signal_strength(self) -> int:
        """Synthetic distance-based attenuation proxy, 0-100."""
        d = math.hypot(self.state.x, self.state.y)
        return int(round(100.0 * max(0.0, 1.0 - d / 30.0)))

    # -- metrics ------------------------------------------------------------

    def metrics(self, runtime: float = 0.0, match_tol: float = 0.05) -> MetricsReport:
        matched_leaks = set()
        matched_rois = 0
        for roi in self.rois:
            ref = _roi_reference_point(roi.geometry)
            hit = None
            for leak in self.scene.leaks:
                if leak.distance_to(ref) <= match_tol:
                    hit = leak.id
                    break
            if hit is not None:
                matched_rois += 1
                matched_leaks.add(hit)
        n_rois = len(self.rois)
        n_leaks = len(self.scene.leaks)
        precision = matched_rois / n_rois if n_rois else (1.0 if n_leaks == 0 else 0.0)
        recall = len(matched_leaks) / n_leaks if n_leaks else 1.0
        pose_err = math.hypot(self.pose_estimate.x - self.state.x,
                              self.pose_estimate.y - self.state.y)
        return MetricsReport(
            roi_precision=precision,
            roi_recall=recall,
            seal_coverage={lk.id: lk.sealed_fraction for lk in self.scene.leaks},
            final_pose_error=pose_err,
            contact_violations=self.contact_violations,
            foam_used=self.foam_used_total,
            runtime=runtime,
        )


def _r(x: float) -> float:
    return round(float(x), 12)


def _roi_reference_point(geometry: dict) -> np.ndarray:
    g = geometry
    if g["type"] == "circle":
        c = np.asarray(g["center"], dtype=float)
        # a point on the fitted ring, comparable with annulus leak geometry
        return c + float(g["radius"]) * np.array([1.0, 0.0, 0.0])
    if g["type"] == "segment":
        return 0.5 * (np.asarray(g["p0"], dtype=float) + np.asarray(g["p1"], dtype=float))
    return np.asarray(g["centroid"], dtype=float)


# ---------------------------------------------------------------------------
# headless run / replay


def run(scenario: Scenario, log_path=None):
    """Execute a scenario tick by tick; returns (Simulation, MetricsReport).

    Writes an append-only JSONL replay log when log_path is given.
    """
    import time as _time

    t0 = _time.perf_counter()
    sim = Simulation(scenario)
    n_ticks = int(round(scenario.duration * scenario.tick_rate))
    script = list(scenario.script)
    seq = 0
    records = []
    header = {
        "record": "header",
        "log_schema_version": LOG_SCHEMA_VERSION,
        "scenario": scenario.to_document(),
    }
    records.append(header)

    si = 0
    for tick in range(n_ticks):
        now = tick / scenario.tick_rate
        commands = []
        while si < len(script) and float(script[si].get("t", 0.0)) <= now + 1e-12:
            entry = script[si]
            seq += 1
            env = CommandEnvelope(seq=seq, type=entry["type"],
                                  data=dict(entry.get("data", {})),
                                  sent_at=now * 1000.0)
            commands.append(env)
            si += 1
        events = sim.step(commands)
        records.append({
            "record": "tick",
            "tick": sim.tick,
            "commands": [c.to_dict() for c in commands],
            "events": events,
            "hash": f"{sim.state_hash():016x}",
        })

    runtime = _time.perf_counter() - t0
    metrics = sim.metrics(runtime=runtime)
    if log_path is not None:
        with open(log_path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec, separators=(",", ":"), sort_keys=True) + "\n")
    sim.replay_records = records
    return sim, metrics


@dataclass
class ReplayVerdict:
    ok: bool
    ticks_checked: int
    first_divergence: int | None = None
    reason: str | None = None


def replay(log_path) -> ReplayVerdict:
    """Re-execute a replay log's commands and verify every state hash."""
    with open(log_path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("record") != "header":
        return ReplayVerdict(ok=False, ticks_checked=0, reason="missing header")
    header = lines[0]
    if header.get("log_schema_version") != LOG_SCHEMA_VERSION:
        return ReplayVerdict(ok=False, ticks_checked=0,
                             reason=f"unsupported log schema "
                                    f"{header.get('log_schema_version')}")
    scenario = Scenario.from_document(header["scenario"])
    sim = Simulation(scenario)
    checked = 0
    for rec in lines[1:]:
        if rec.get("record") != "tick":
            continue
        try:
            commands = [CommandEnvelope.from_dict(c) for c in rec["commands"]]
        except ProtocolError as exc:
            return ReplayVerdict(ok=False, ticks_checked=checked,
                                 first_divergence=rec.get("tick"),
                                 reason=f"bad command: {exc}")
        sim.step(commands)
        checked += 1
        if f"{sim.state_hash():016x}" != rec["hash"]:
            return ReplayVerdict(ok=False, ticks_checked=checked,
                                 first_divergence=rec["tick"],
                                 reason="state hash mismatch")
    return ReplayVerdict(ok=True, ticks_checked=checked)
