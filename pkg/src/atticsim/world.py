"""Attic scene model: joisted floor, fixtures, thermal leak sources, hatch.

The scene is the ground truth that sensing and sealing act on.  Surface
temperature is a superposition of Gaussian anomalies around each leak
geometry on top of the ambient attic temperature; sealing a leak starts an
exponential relaxation of its anomaly back toward ambient.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

SCENE_SCHEMA_VERSION = 1

JOIST_SPACING_MIN = 0.30
JOIST_SPACING_MAX = 0.60

DEFAULT_HATCH_W = 0.57
DEFAULT_HATCH_H = 0.76

SURFACE_TOL = 1e-3


class SceneError(ValueError):
    """Raised when a scene document fails parsing or validation."""


@dataclass(frozen=True)
class Joist:
    origin: tuple[float, float]
    direction: tuple[float, float]  # unit 2D vector
    length: float
    width: float
    top_height: float  # above drywall

    def contains_xy(self, x: float, y: float) -> bool:
        """Closed containment: the boundary counts as joist."""
        dx, dy = self.direction
        px, py = x - self.origin[0], y - self.origin[1]
        along = px * dx + py * dy
        across = -px * dy + py * dx
        return 0.0 <= along <= self.length and abs(across) <= self.width / 2.0


@dataclass(frozen=True)
class Fixture:
    kind: str  # light_fixture | fan_duct | junction_box | conduit | chimney
    position: tuple[float, float, float]
    yaw: float
    shape: dict  # {"type": "circle"|"rectangle"|"cylinder", ...}

    KINDS = ("light_fixture", "fan_duct", "junction_box", "conduit", "chimney")


@dataclass
class LeakSource:
    id: str
    geometry: dict  # {"type": "annulus"|"segment"|"point", ...}
    delta_t: float  # kelvin, signed (negative = cold ingress)
    sigma: float  # meters, Gaussian falloff scale
    relaxation_tau: float = 600.0
    sealed_fraction: float = 0.0
    seal_time: float | None = None
    # strength in effect at the instant of the last seal increase
    _strength_pre_seal: float = 1.0

    def distance_to(self, point) -> float:
        """Distance from a 3D point to the leak geometry."""
        p = np.asarray(point, dtype=float)
        g = self.geometry
        if g["type"] == "point":
            return float(np.linalg.norm(p - np.asarray(g["center"], dtype=float)))
        if g["type"] == "annulus":
            c = np.asarray(g["center"], dtype=float)
            r = float(g["radius"])
            half_w = float(g.get("width", 0.0)) / 2.0
            d = p - c
            radial = math.hypot(d[0], d[1]) - r
            ring = math.hypot(radial, d[2])
            return max(0.0, ring - half_w)
        if g["type"] == "segment":
            p0 = np.asarray(g["p0"], dtype=float)
            p1 = np.asarray(g["p1"], dtype=float)
            half_w = float(g.get("width", 0.0)) / 2.0
            seg = p1 - p0
            denom = float(seg @ seg)
            t = 0.0 if denom == 0.0 else float(np.clip((p - p0) @ seg / denom, 0.0, 1.0))
            return max(0.0, float(np.linalg.norm(p - (p0 + t * seg))) - half_w)
        raise SceneError(f"unknown leak geometry type {g['type']!r}")

    def effective_strength(self, time: float) -> float:
        """Anomaly strength in [0, 1] at a simulation time."""
        target = 1.0 - self.sealed_fraction
        if self.seal_time is None or time < self.seal_time:
            return target if self.seal_time is None else self._strength_pre_seal
        decay = math.exp(-(time - self.seal_time) / self.relaxation_tau)
        return target + (self._strength_pre_seal - target) * decay

    def reference_point(self) -> np.ndarray:
        g = self.geometry
        if g["type"] == "point":
            return np.asarray(g["center"], dtype=float)
        if g["type"] == "annulus":
            c = np.asarray(g["center"], dtype=float)
            return c + np.array([g["radius"], 0.0, 0.0])
        if g["type"] == "segment":
            return 0.5 * (np.asarray(g["p0"], dtype=float) + np.asarray(g["p1"], dtype=float))
        raise SceneError(f"unknown leak geometry type {g['type']!r}")


@dataclass(frozen=True)
class Hatch:
    width: float = DEFAULT_HATCH_W
    height: float = DEFAULT_HATCH_H
    position: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class FiducialTag:
    id: str
    position: tuple[float, float, float]
    yaw: float = 0.0


@dataclass
class AtticScene:
    joists: list[Joist]
    fixtures: list[Fixture]
    leaks: list[LeakSource]
    hatch: Hatch
    tags: list[FiducialTag] = field(default_factory=list)
    ambient_attic_temp: float = 290.0
    exterior_temp: float = 273.0
    footprint: tuple[float, float] = (1.22, 2.51)
    drywall_level: float = 0.0
    roof_height: float = 1.5

    def leak_by_id(self, leak_id: str) -> LeakSource:
        for leak in self.leaks:
            if leak.id == leak_id:
                return leak
        raise SceneError(f"unknown leak id {leak_id!r}")


def _validate_scene(scene: AtticScene) -> AtticScene:
    fx, fy = scene.footprint
    if fx <= 0 or fy <= 0:
        raise SceneError("footprint must be positive")
    if scene.ambient_attic_temp == scene.exterior_temp:
        raise SceneError("ambient_attic_temp equals exterior_temp: no thermal contrast")
    for j in scene.joists:
        if j.width <= 0 or j.length <= 0 or j.top_height < 0:
            raise SceneError("joist dimensions must be positive (top_height >= 0)")
        n = math.hypot(*j.direction)
        if abs(n - 1.0) > 1e-6:
            raise SceneError("joist direction must be a unit vector")
    _check_joist_spacing(scene.joists)
    for f in scene.fixtures:
        if f.kind not in Fixture.KINDS:
            raise SceneError(f"unknown fixture kind {f.kind!r}")
        for key in ("radius", "w", "h", "height"):
            if key in f.shape and f.shape[key] <= 0:
                raise SceneError(f"fixture shape {key} must be positive")
    seen = set()
    for leak in scene.leaks:
        if leak.id in seen:
            raise SceneError(f"duplicate leak id {leak.id!r}")
        seen.add(leak.id)
        if leak.sigma <= 0:
            raise SceneError("leak sigma must be > 0")
        if leak.relaxation_tau <= 0:
            raise SceneError("leak relaxation_tau must be > 0")
        if not 0.0 <= leak.sealed_fraction <= 1.0:
            raise SceneError("sealed_fraction must lie in [0, 1]")
    return scene


def _check_joist_spacing(joists: list[Joist]) -> None:
    """Adjacent parallel joists must be spaced 0.30-0.60 m apart (centerlines).

    Spacing is checked per parallel group, sorted by lateral offset.
    """
    groups: dict[tuple[float, float], list[float]] = {}
    for j in joists:
        dx, dy = j.direction
        if dx < 0 or (dx == 0 and dy < 0):
            dx, dy = -dx, -dy
        key = (round(dx, 6), round(dy, 6))
        # lateral (perpendicular) offset of the centerline
        offset = -j.origin[0] * dy + j.origin[1] * dx
        groups.setdefault(key, []).append(offset)
    for offsets in groups.values():
        offsets.sort()
        for a, b in zip(offsets, offsets[1:]):
            spacing = b - a
            if spacing < JOIST_SPACING_MIN - 1e-9:
                raise SceneError(
                    f"joist spacing below {JOIST_SPACING_MIN} m: {spacing:.3f} m"
                )
            if spacing > JOIST_SPACING_MAX + 1e-9:
                raise SceneError(
                    f"joist spacing above {JOIST_SPACING_MAX} m: {spacing:.3f} m"
                )


_SCENE_KEYS = {"footprint_m", "ambient_attic_temp_k", "exterior_temp_k",
               "drywall_level_m", "roof_height_m"}
_JOIST_KEYS = {"origin_m", "direction", "length_m", "width_m", "top_height_m"}
_FIXTURE_KEYS = {"kind", "position_m", "yaw_rad", "shape"}
_LEAK_KEYS = {"id", "geometry", "delta_t_k", "sigma_m", "relaxation_tau_s"}
_HATCH_KEYS = {"width_m", "height_m", "position_m"}
_TAG_KEYS = {"id", "position_m", "yaw_rad"}
_TOP_KEYS = {"schema_version", "scene", "joists", "fixtures", "leaks", "hatch", "tags"}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SceneError(f"unknown field(s) in {where}: {sorted(unknown)}")


def load_scene(document) -> AtticScene:
    """Parse and validate a scene document (dict or JSON string)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SceneError(f"scene document is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SceneError("scene document must be a JSON object")
    if document.get("schema_version") != SCENE_SCHEMA_VERSION:
        raise SceneError(
            f"schema_version must be {SCENE_SCHEMA_VERSION}, "
            f"got {document.get('schema_version')!r}"
        )
    _reject_unknown(document, _TOP_KEYS, "document")
    sc = document.get("scene", {})
    _reject_unknown(sc, _SCENE_KEYS, "scene")

    joists = []
    for i, jd in enumerate(document.get("joists", [])):
        _reject_unknown(jd, _JOIST_KEYS, f"joists[{i}]")
        d = jd["direction"]
        n = math.hypot(d[0], d[1])
        if n == 0:
            raise SceneError(f"joists[{i}] direction is zero")
        joists.append(Joist(
            origin=tuple(jd["origin_m"]),
            direction=(d[0] / n, d[1] / n),
            length=float(jd["length_m"]),
            width=float(jd["width_m"]),
            top_height=float(jd["top_height_m"]),
        ))

    fixtures = []
    for i, fd in enumerate(document.get("fixtures", [])):
        _reject_unknown(fd, _FIXTURE_KEYS, f"fixtures[{i}]")
        fixtures.append(Fixture(
            kind=fd["kind"],
            position=tuple(fd["position_m"]),
            yaw=float(fd.get("yaw_rad", 0.0)),
            shape=dict(fd["shape"]),
        ))

    leaks = []
    for i, ld in enumerate(document.get("leaks", [])):
        _reject_unknown(ld, _LEAK_KEYS, f"leaks[{i}]")
        leaks.append(LeakSource(
            id=str(ld["id"]),
            geometry=dict(ld["geometry"]),
            delta_t=float(ld["delta_t_k"]),
            sigma=float(ld["sigma_m"]),
            relaxation_tau=float(ld.get("relaxation_tau_s", 600.0)),
        ))

    hd = document.get("hatch", {})
    _reject_unknown(hd, _HATCH_KEYS, "hatch")
    hatch = Hatch(
        width=float(hd.get("width_m", DEFAULT_HATCH_W)),
        height=float(hd.get("height_m", DEFAULT_HATCH_H)),
        position=tuple(hd.get("position_m", (0.0, 0.0))),
    )

    tags = []
    for i, td in enumerate(document.get("tags", [])):
        _reject_unknown(td, _TAG_KEYS, f"tags[{i}]")
        tags.append(FiducialTag(
            id=str(td["id"]),
            position=tuple(td["position_m"]),
            yaw=float(td.get("yaw_rad", 0.0)),
        ))

    scene = AtticScene(
        joists=joists,
        fixtures=fixtures,
        leaks=leaks,
        hatch=hatch,
        tags=tags,
        ambient_attic_temp=float(sc.get("ambient_attic_temp_k", 290.0)),
        exterior_temp=float(sc.get("exterior_temp_k", 273.0)),
        footprint=tuple(sc.get("footprint_m", (1.22, 2.51))),
        drywall_level=float(sc.get("drywall_level_m", 0.0)),
        roof_height=float(sc.get("roof_height_m", 1.5)),
    )
    return _validate_scene(scene)


def temperature_at(scene: AtticScene, point, time: float,
                   check_surface: bool = True) -> float:
    """Surface temperature at a 3D point on a scene surface, in kelvin."""
    if check_surface and not on_surface(scene, point):
        raise SceneError(f"point {tuple(point)} is not on a scene surface")
    temp = scene.ambient_attic_temp
    for leak in scene.leaks:
        d = leak.distance_to(point)
        temp += leak.delta_t * math.exp(-d * d / (2.0 * leak.sigma ** 2)) \
            * leak.effective_strength(time)
    return temp


def on_surface(scene: AtticScene, point, tol: float = SURFACE_TOL) -> bool:
    x, y, z = (float(v) for v in point)
    fx, fy = scene.footprint
    half_x, half_y = fx / 2.0, fy / 2.0
    if -half_x - tol <= x <= half_x + tol and -half_y - tol <= y <= half_y + tol:
        h, _ = floor_height_at(scene, (min(max(x, -half_x), half_x),
                                       min(max(y, -half_y), half_y)))
        if abs(z - h) <= tol:
            return True
        if abs(z - scene.drywall_level) <= tol or abs(z - scene.roof_height) <= tol:
            return True
        # walls at the footprint boundary
        if (abs(abs(x) - half_x) <= tol or abs(abs(y) - half_y) <= tol) \
                and scene.drywall_level - tol <= z <= scene.roof_height + tol:
            return True
    # fixture surfaces (approximate: near the fixture's nominal position)
    for f in scene.fixtures:
        cx, cy, cz = f.position
        extent = max(f.shape.get("radius", 0.0), f.shape.get("w", 0.0),
                     f.shape.get("h", 0.0), f.shape.get("height", 0.0))
        if math.dist((x, y, z), (cx, cy, cz)) <= extent + tol:
            return True
    return False


def apply_seal_coverage(scene: AtticScene, leak_id: str,
                        covered_fraction: float, time: float) -> AtticScene:
    """Raise a leak's sealed_fraction to covered_fraction (monotone max)."""
    if not 0.0 <= covered_fraction <= 1.0:
        raise SceneError(f"covered_fraction {covered_fraction} out of [0, 1]")
    leak = scene.leak_by_id(leak_id)
    if covered_fraction > leak.sealed_fraction:
        leak._strength_pre_seal = leak.effective_strength(time)
        leak.sealed_fraction = covered_fraction
        leak.seal_time = time
    return scene


def floor_height_at(scene: AtticScene, xy) -> tuple[float, str]:
    """Floor surface height (absolute z) and kind ("joist" or "drywall")."""
    x, y = float(xy[0]), float(xy[1])
    fx, fy = scene.footprint
    if not (-fx / 2.0 <= x <= fx / 2.0 and -fy / 2.0 <= y <= fy / 2.0):
        raise SceneError(f"({x:.3f}, {y:.3f}) outside footprint")
    best = None
    for j in scene.joists:
        if j.contains_xy(x, y):
            h = scene.drywall_level + j.top_height
            if best is None or h > best:
                best = h
    if best is not None:
        return best, "joist"
    return scene.drywall_level, "drywall"


def scene_to_document(scene: AtticScene) -> dict:
    """Inverse of load_scene for export endpoints."""
    return {
        "schema_version": SCENE_SCHEMA_VERSION,
        "scene": {
            "footprint_m": list(scene.footprint),
            "ambient_attic_temp_k": scene.ambient_attic_temp,
            "exterior_temp_k": scene.exterior_temp,
            "drywall_level_m": scene.drywall_level,
            "roof_height_m": scene.roof_height,
        },
        "joists": [
            {"origin_m": list(j.origin), "direction": list(j.direction),
             "length_m": j.length, "width_m": j.width, "top_height_m": j.top_height}
            for j in scene.joists
        ],
        "fixtures": [
            {"kind": f.kind, "position_m": list(f.position), "yaw_rad": f.yaw,
             "shape": f.shape}
            for f in scene.fixtures
        ],
        "leaks": [
            {"id": lk.id, "geometry": lk.geometry, "delta_t_k": lk.delta_t,
             "sigma_m": lk.sigma, "relaxation_tau_s": lk.relaxation_tau}
            for lk in scene.leaks
        ],
        "hatch": {"width_m": scene.hatch.width, "height_m": scene.hatch.height,
                  "position_m": list(scene.hatch.position)},
        "tags": [
            {"id": t.id, "position_m": list(t.position), "yaw_rad": t.yaw}
            for t in scene.tags
        ],
    }
