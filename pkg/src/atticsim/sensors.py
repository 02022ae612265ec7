"""Synthetic sensing: depth/color ray-cast rendering, thermal rendering,
point-cloud back-projection, and noisy fiducial observations.

Camera poses are 4x4 camera-to-world transforms in the pinhole optical
convention (+x right, +y down, +z forward).  Depth is z-depth; invalid
pixels carry 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels, transforms
from .geometry import TriangleMesh, build_mesh
from .world import AtticScene, temperature_at


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    max_range: float = 3.0
    min_range: float = 0.05

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point outside the image")

    @classmethod
    def from_fov(cls, width: int, height: int, fov_x_deg: float, fov_y_deg: float,
                 max_range: float = 3.0) -> "CameraIntrinsics":
        fx = (width / 2.0) / math.tan(math.radians(fov_x_deg) / 2.0)
        fy = (height / 2.0) / math.tan(math.radians(fov_y_deg) / 2.0)
        return cls(fx=fx, fy=fy, cx=width / 2.0, cy=height / 2.0,
                   width=width, height=height, max_range=max_range)


# defaults are plausible for the sensor classes involved; config-driven
def default_rgbd_intrinsics(width=640, height=480) -> CameraIntrinsics:
    return CameraIntrinsics.from_fov(width, height, 87.0, 58.0, max_range=3.0)


@dataclass(frozen=True)
class ThermalCamSpec:
    intrinsics: CameraIntrinsics
    noise_sigma: float = 0.1  # kelvin

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def default_thermal_spec(noise_sigma=0.1) -> ThermalCamSpec:
    return ThermalCamSpec(
        intrinsics=CameraIntrinsics.from_fov(160, 120, 57.0, 44.0, max_range=5.0),
        noise_sigma=noise_sigma)


@dataclass(frozen=True)
class FiducialObservation:
    tag_id: str
    relative_pose: np.ndarray  # 4x4 camera -> tag
    noise_applied: bool


@dataclass
class Frame:
    timestamp: float
    camera_pose: np.ndarray
    color: np.ndarray | None = None        # (H, W, 3) uint8
    depth: np.ndarray | None = None        # (H, W) float meters, 0 = invalid
    thermal: np.ndarray | None = None      # (H, W) float kelvin
    fiducials: list = field(default_factory=list)


def _pixel_dirs(intrinsics: CameraIntrinsics) -> np.ndarray:
    """Unnormalized camera-frame ray directions with dz = 1 per pixel.

    With dz = 1, the ray parameter t of a hit equals its z-depth.
    """
    u = np.arange(intrinsics.width, dtype=np.float64)
    v = np.arange(intrinsics.height, dtype=np.float64)
    uu, vv = np.meshgrid(u, v)
    dirs = np.stack([
        (uu - intrinsics.cx) / intrinsics.fx,
        (vv - intrinsics.cy) / intrinsics.fy,
        np.ones_like(uu),
    ], axis=-1)
    return dirs.reshape(-1, 3)


def _cast(mesh: TriangleMesh, camera_pose: np.ndarray,
          intrinsics: CameraIntrinsics):
    dirs_cam = _pixel_dirs(intrinsics)
    dirs_world = dirs_cam @ camera_pose[:3, :3].T
    origin = camera_pose[:3, 3]
    t, idx = kernels.raycast(origin, dirs_world, mesh.vertices,
                             t_min=intrinsics.min_range)
    return t, idx, dirs_world, origin


def render_depth(scene_or_mesh, camera_pose, intrinsics: CameraIntrinsics,
                 seed=None, noise_sigma: float = 0.0) -> np.ndarray:
    """Z-depth image from a ray cast of the scene; deterministic given seed."""
    mesh = _as_mesh(scene_or_mesh)
    t, idx, _, _ = _cast(mesh, camera_pose, intrinsics)
    depth = t.reshape(intrinsics.height, intrinsics.width).copy()
    invalid = ~np.isfinite(depth) | (depth > intrinsics.max_range)
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        depth = depth + rng.normal(0.0, noise_sigma, size=depth.shape)
    depth[invalid] = 0.0
    return depth


def render_color(scene_or_mesh, camera_pose, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Flat-shaded color image using per-surface base colors."""
    mesh = _as_mesh(scene_or_mesh)
    t, idx, _, _ = _cast(mesh, camera_pose, intrinsics)
    valid = (idx >= 0) & np.isfinite(t) & (t <= intrinsics.max_range)
    img = np.zeros((len(idx), 3), dtype=np.uint8)
    img[valid] = mesh.colors[idx[valid]]
    return img.reshape(intrinsics.height, intrinsics.width, 3)


def render_rgbd(mesh: TriangleMesh, camera_pose, intrinsics: CameraIntrinsics,
                seed=None, noise_sigma: float = 0.0):
    """Depth + color from a single ray cast."""
    t, idx, _, _ = _cast(mesh, camera_pose, intrinsics)
    valid = (idx >= 0) & np.isfinite(t) & (t <= intrinsics.max_range)
    depth = np.where(valid, t, 0.0)
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        depth = np.where(valid, depth + rng.normal(0.0, noise_sigma, size=depth.shape),
                         0.0)
    img = np.zeros((len(idx), 3), dtype=np.uint8)
    img[valid] = mesh.colors[idx[valid]]
    return (depth.reshape(intrinsics.height, intrinsics.width),
            img.reshape(intrinsics.height, intrinsics.width, 3))


def render_thermal(scene: AtticScene, camera_pose, spec: ThermalCamSpec,
                   time: float, seed=None, mesh: TriangleMesh | None = None) -> np.ndarray:
    """Thermal image: per-pixel surface hit sampled through the leak field."""
    mesh = mesh if mesh is not None else build_mesh(scene)
    intr = spec.intrinsics
    t, idx, dirs_world, origin = _cast(mesh, camera_pose, intr)
    valid = (idx >= 0) & np.isfinite(t) & (t <= intr.max_range)
    temps = np.full(len(t), scene.ambient_attic_temp)
    points = origin + t[valid, None] * dirs_world[valid]
    temps[valid] = _temperature_field(scene, points, time)
    if spec.noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        temps = temps + rng.normal(0.0, spec.noise_sigma, size=temps.shape)
    return temps.reshape(intr.height, intr.width)


def render_thermal_rgbd(scene: AtticScene, mesh: TriangleMesh, camera_pose,
                        spec: ThermalCamSpec, time: float, seed=None):
    """Thermal + depth from a single ray cast of the thermal module."""
    intr = spec.intrinsics
    t, idx, dirs_world, origin = _cast(mesh, camera_pose, intr)
    valid = (idx >= 0) & np.isfinite(t) & (t <= intr.max_range)
    temps = np.full(len(t), scene.ambient_attic_temp)
    points = origin + t[valid, None] * dirs_world[valid]
    temps[valid] = _temperature_field(scene, points, time)
    if spec.noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        temps = temps + rng.normal(0.0, spec.noise_sigma, size=temps.shape)
    depth = np.where(valid, t, 0.0)
    return (temps.reshape(intr.height, intr.width),
            depth.reshape(intr.height, intr.width))


def _temperature_field(scene: AtticScene, points: np.ndarray, time: float) -> np.ndarray:
    """Vectorized surface temperature over (N, 3) points."""
    temps = np.full(len(points), scene.ambient_attic_temp)
    for leak in scene.leaks:
        d = _distances_to_leak(leak, points)
        temps += leak.delta_t * np.exp(-d * d / (2.0 * leak.sigma ** 2)) \
            * leak.effective_strength(time)
    return temps


def _distances_to_leak(leak, points: np.ndarray) -> np.ndarray:
    g = leak.geometry
    if g["type"] == "point":
        return np.linalg.norm(points - np.asarray(g["center"]), axis=1)
    if g["type"] == "annulus":
        c = np.asarray(g["center"], dtype=float)
        d = points - c
        radial = np.hypot(d[:, 0], d[:, 1]) - float(g["radius"])
        ring = np.hypot(radial, d[:, 2])
        return np.maximum(0.0, ring - float(g.get("width", 0.0)) / 2.0)
    if g["type"] == "segment":
        p0 = np.asarray(g["p0"], dtype=float)
        p1 = np.asarray(g["p1"], dtype=float)
        seg = p1 - p0
        denom = float(seg @ seg)
        tt = np.clip((points - p0) @ seg / denom, 0.0, 1.0) if denom > 0 \
            else np.zeros(len(points))
        nearest = p0 + tt[:, None] * seg
        return np.maximum(0.0, np.linalg.norm(points - nearest, axis=1)
                          - float(g.get("width", 0.0)) / 2.0)
    raise ValueError(f"unknown leak geometry {g['type']!r}")


def stereo_pointcloud(depth: np.ndarray, intrinsics: CameraIntrinsics,
                      camera_pose: np.ndarray,
                      color: np.ndarray | None = None):
    """Back-project a depth image to world-frame points (with colors if given).

    Returns (points (N, 3), colors (N, 3) or None, pixels (N, 2) int).
    """
    h, w = depth.shape
    if (h, w) != (intrinsics.height, intrinsics.width):
        raise ValueError("depth image does not match intrinsics dimensions")
    vv, uu = np.nonzero(depth > 0.0)
    z = depth[vv, uu]
    x = (uu - intrinsics.cx) * z / intrinsics.fx
    y = (vv - intrinsics.cy) * z / intrinsics.fy
    pts_cam = np.stack([x, y, z], axis=-1)
    pts_world = transforms.apply(camera_pose, pts_cam)
    cols = color[vv, uu] if color is not None else None
    return pts_world, cols, np.stack([uu, vv], axis=-1)


def observe_fiducials(scene: AtticScene, camera_pose, intrinsics: CameraIntrinsics,
                      noise_sigma_pos: float = 0.0, noise_sigma_rot: float = 0.0,
                      seed=None, mesh: TriangleMesh | None = None) -> list[FiducialObservation]:
    """Visible, unoccluded tags with their camera-relative poses (noisy)."""
    mesh = mesh if mesh is not None else build_mesh(scene)
    cam_inv = transforms.invert(np.asarray(camera_pose, dtype=float))
    rng = np.random.default_rng(seed)
    out = []
    for tag in scene.tags:
        tag_pose = transforms.transform(transforms.rot_z(tag.yaw), tag.position)
        rel = cam_inv @ tag_pose
        p = rel[:3, 3]
        if p[2] <= 0.0:  # behind the camera
            continue
        u = intrinsics.fx * p[0] / p[2] + intrinsics.cx
        v = intrinsics.fy * p[1] / p[2] + intrinsics.cy
        if not (0 <= u < intrinsics.width and 0 <= v < intrinsics.height):
            continue
        dist = float(np.linalg.norm(p))
        if dist > intrinsics.max_range:
            continue
        # occlusion: nothing may stand between the camera and the tag
        d_world = tag_pose[:3, 3] - camera_pose[:3, 3]
        t, idx = kernels.raycast(camera_pose[:3, 3], d_world[None, :],
                                 mesh.vertices, t_min=1e-6)
        if np.isfinite(t[0]) and t[0] < 1.0 - 1e-3 \
                and mesh.surface_kind[mesh.surface_of_tri[idx[0]]] != "tag":
            continue
        noisy = noise_sigma_pos > 0.0 or noise_sigma_rot > 0.0
        if noisy:
            rel = rel.copy()
            rel[:3, 3] += rng.normal(0.0, noise_sigma_pos, size=3)
            dyaw = rng.normal(0.0, noise_sigma_rot)
            rel[:3, :3] = rel[:3, :3] @ transforms.rot_z(dyaw)
        out.append(FiducialObservation(tag_id=tag.id, relative_pose=rel,
                                       noise_applied=noisy))
    return out


def _as_mesh(scene_or_mesh) -> TriangleMesh:
    if isinstance(scene_or_mesh, TriangleMesh):
        return scene_or_mesh
    return build_mesh(scene_or_mesh)


# ---------------------------------------------------------------------------
# exports

def save_color_png(path, color: np.ndarray) -> None:
    from PIL import Image
    Image.fromarray(color, mode="RGB").save(path)


def save_depth_png16(path, depth: np.ndarray) -> None:
    """16-bit grayscale PNG in millimeters (0 = invalid)."""
    from PIL import Image
    mm = np.clip(np.round(depth * 1000.0), 0, 65535).astype(np.uint16)
    Image.fromarray(mm).save(path)


def save_thermal_png16(path, thermal: np.ndarray) -> None:
    """16-bit grayscale PNG in centikelvin."""
    from PIL import Image
    ck = np.clip(np.round(thermal * 100.0), 0, 65535).astype(np.uint16)
    Image.fromarray(ck).save(path)


def save_thermal_csv(path, thermal: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in thermal:
            writer.writerow([f"{v:.3f}" for v in row])


def save_ply(path, points: np.ndarray, colors: np.ndarray | None = None,
             temperatures: np.ndarray | None = None) -> None:
    """ASCII PLY with optional per-point color and temperature property."""
    n = len(points)
    with open(path, "w") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {n}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        if colors is not None:
            fh.write("property uchar red\nproperty uchar green\nproperty uchar blue\n")
        if temperatures is not None:
            fh.write("property float temperature\n")
        fh.write("end_header\n")
        for i in range(n):
            parts = [f"{points[i][0]:.6f}", f"{points[i][1]:.6f}", f"{points[i][2]:.6f}"]
            if colors is not None:
                parts += [str(int(colors[i][0])), str(int(colors[i][1])),
                          str(int(colors[i][2]))]
            if temperatures is not None:
                parts.append(f"{temperatures[i]:.3f}")
            fh.write(" ".join(parts) + "\n")
