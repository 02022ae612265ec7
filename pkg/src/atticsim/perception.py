"""Pose estimation, voxel mapping, thermal fusion, and ROI detection.

Pose estimation is 2D (x, y, heading): drifting integration of commanded
motion corrected by fiducial observations.  ROIs are detected by
thresholding local temperature-gradient magnitudes, clustering, and fitting
a circle, segment, or patch to each cluster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from . import transforms

DEFAULT_GRADIENT_THRESHOLD = 50.0   # K/m
DEFAULT_CLUSTER_RADIUS = 0.05       # m
DEFAULT_MIN_POINTS = 10

ROI_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PoseEstimate:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0
    uncertainty: float = 0.0  # meters, scalar RMS proxy
    last_correction_time: float | None = None

    def as_tuple(self):
        return (self.x, self.y, self.heading)


def odometry_update(estimate: PoseEstimate, commanded_motion, drift_params,
                    rng=None) -> PoseEstimate:
    """Integrate one step of commanded motion with injected drift.

    commanded_motion: (ds, dheading) in the robot frame.
    drift_params: {"sigma_pos", "sigma_heading", "bias"} with bias a
    per-step longitudinal offset in meters.  sigma_pos is the RMS magnitude
    of the planar drift per step (split evenly across both robot axes).
    """
    sigma_pos = float(drift_params.get("sigma_pos", 0.0))
    sigma_heading = float(drift_params.get("sigma_heading", 0.0))
    bias = float(drift_params.get("bias", 0.0))
    if sigma_pos < 0 or sigma_heading < 0:
        raise ValueError("drift sigmas must be >= 0")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) \
        else rng

    ds, dheading = float(commanded_motion[0]), float(commanded_motion[1])
    ds += bias
    if sigma_pos > 0.0:
        noise = rng.normal(0.0, sigma_pos / math.sqrt(2.0), size=2)
    else:
        noise = np.zeros(2)
    if sigma_heading > 0.0:
        dheading += rng.normal(0.0, sigma_heading)

    heading = estimate.heading + dheading
    c, s = math.cos(heading), math.sin(heading)
    x = estimate.x + ds * c + noise[0] * c - noise[1] * s
    y = estimate.y + ds * s + noise[0] * s + noise[1] * c
    return replace(estimate, x=x, y=y, heading=heading,
                   uncertainty=estimate.uncertainty + sigma_pos)


def fiducial_correct(estimate: PoseEstimate, observations, tag_map: dict,
                     camera_from_robot: np.ndarray | None = None,
                     observation_noise: float = 0.0,
                     time: float | None = None) -> PoseEstimate:
    """Re-solve the 2D pose from fiducial observations.

    tag_map: id -> 4x4 world pose of the tag.  One observation inverts
    directly; several are combined by a least-squares 2D rigid fit over the
    tag positions.
    """
    if not observations:
        return estimate
    if camera_from_robot is None:
        camera_from_robot = np.eye(4)
    robot_from_camera = transforms.invert(camera_from_robot)

    robot_pts = []   # tag positions in the robot frame
    world_pts = []
    poses = []
    for obs in observations:
        if obs.tag_id not in tag_map:
            raise KeyError(f"unknown tag id {obs.tag_id!r}")
        tag_world = np.asarray(tag_map[obs.tag_id], dtype=float)
        tag_in_robot = robot_from_camera @ obs.relative_pose
        robot_pts.append(tag_in_robot[:3, 3][:2])
        world_pts.append(tag_world[:3, 3][:2])
        # full-pose solution robot->world from this single tag
        poses.append(tag_world @ transforms.invert(tag_in_robot))

    if len(observations) == 1:
        T = poses[0]
        x, y = T[0, 3], T[1, 3]
        heading = transforms.yaw_of(T[:3, :3])
    else:
        x, y, heading = _rigid_fit_2d(np.asarray(robot_pts), np.asarray(world_pts))
    return PoseEstimate(x=x, y=y, heading=heading,
                        uncertainty=observation_noise,
                        last_correction_time=time)


def _rigid_fit_2d(src: np.ndarray, dst: np.ndarray) -> tuple[float, float, float]:
    """Least-squares rotation+translation mapping src points onto dst."""
    src_c = src - src.mean(axis=0)
    dst_c = dst - dst.mean(axis=0)
    num = float(np.sum(src_c[:, 0] * dst_c[:, 1] - src_c[:, 1] * dst_c[:, 0]))
    den = float(np.sum(src_c[:, 0] * dst_c[:, 0] + src_c[:, 1] * dst_c[:, 1]))
    heading = math.atan2(num, den)
    c, s = math.cos(heading), math.sin(heading)
    R = np.array([[c, -s], [s, c]])
    t = dst.mean(axis=0) - R @ src.mean(axis=0)
    return float(t[0]), float(t[1]), heading


@dataclass
class VoxelCell:
    color_sum: np.ndarray
    hits: int
    temp_sum: float = 0.0
    temp_hits: int = 0

    @property
    def color(self) -> np.ndarray:
        return (self.color_sum / self.hits).astype(np.uint8)

    @property
    def mean_temperature(self) -> float | None:
        return self.temp_sum / self.temp_hits if self.temp_hits else None


@dataclass
class VoxelMap:
    voxel_size: float = 0.02
    cells: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.voxel_size <= 0:
            raise ValueError("voxel_size must be > 0")

    def index_of(self, point) -> tuple[int, int, int]:
        return tuple(int(math.floor(v / self.voxel_size)) for v in point)

    def center_of(self, index) -> np.ndarray:
        return (np.asarray(index, dtype=float) + 0.5) * self.voxel_size

    def centers(self) -> np.ndarray:
        if not self.cells:
            return np.zeros((0, 3))
        return np.array([self.center_of(i) for i in self.cells])


def integrate_map(vmap: VoxelMap, points: np.ndarray, pose_estimate: PoseEstimate,
                  colors: np.ndarray | None = None,
                  temperatures: np.ndarray | None = None,
                  points_in_robot_frame: bool = False) -> VoxelMap:
    """Bin a point cloud into the map using the estimated pose.

    Points are world-frame unless points_in_robot_frame, in which case the
    2D pose estimate places them.
    """
    pts = np.asarray(points, dtype=float)
    if points_in_robot_frame:
        c, s = math.cos(pose_estimate.heading), math.sin(pose_estimate.heading)
        R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        pts = pts @ R.T + np.array([pose_estimate.x, pose_estimate.y, 0.0])
    for i, p in enumerate(pts):
        idx = vmap.index_of(p)
        cell = vmap.cells.get(idx)
        col = colors[i].astype(float) if colors is not None else np.zeros(3)
        if cell is None:
            cell = VoxelCell(color_sum=col.copy(), hits=1)
            vmap.cells[idx] = cell
        else:
            cell.color_sum += col
            cell.hits += 1
        if temperatures is not None:
            cell.temp_sum += float(temperatures[i])
            cell.temp_hits += 1
    return vmap


@dataclass(frozen=True)
class ThermalPoint:
    position: np.ndarray
    temperature: float
    source_pixel: tuple[int, int]


def fuse_thermal(points: np.ndarray, thermal_image: np.ndarray,
                 thermal_extrinsics: np.ndarray, thermal_intrinsics) -> list[ThermalPoint]:
    """Attach bilinear-sampled temperatures to stereo-frame points.

    thermal_extrinsics: rigid transform stereo camera -> thermal camera.
    Points projecting outside the thermal frustum are dropped.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return []
    pts_th = transforms.apply(thermal_extrinsics, pts)
    out = []
    h, w = thermal_image.shape
    intr = thermal_intrinsics
    for i, p in enumerate(pts_th):
        if p[2] <= 0.0:
            continue
        u = intr.fx * p[0] / p[2] + intr.cx
        v = intr.fy * p[1] / p[2] + intr.cy
        if not (0.0 <= u <= w - 1.0 and 0.0 <= v <= h - 1.0):
            continue
        temp = _bilinear(thermal_image, u, v)
        out.append(ThermalPoint(position=pts[i], temperature=float(temp),
                                source_pixel=(int(round(u)), int(round(v)))))
    return out


def _bilinear(img: np.ndarray, u: float, v: float) -> float:
    u0 = min(int(math.floor(u)), img.shape[1] - 2) if img.shape[1] > 1 else 0
    v0 = min(int(math.floor(v)), img.shape[0] - 2) if img.shape[0] > 1 else 0
    du, dv = u - u0, v - v0
    return float(img[v0, u0] * (1 - du) * (1 - dv)
                 + img[v0, u0 + 1] * du * (1 - dv)
                 + img[v0 + 1, u0] * (1 - du) * dv
                 + img[v0 + 1, u0 + 1] * du * dv)


@dataclass
class ROI:
    id: str
    geometry: dict  # circle{center, radius, normal} | segment{p0, p1} | patch{centroid, extent}
    peak_gradient: float
    mean_delta_t: float
    point_count: int
    map_frame_pose: np.ndarray

    def to_dict(self) -> dict:
        g = {k: (list(v) if isinstance(v, (np.ndarray, tuple)) else v)
             for k, v in self.geometry.items()}
        return {
            "id": self.id,
            "geometry": g,
            "peak_gradient_k_per_m": self.peak_gradient,
            "mean_delta_t_k": self.mean_delta_t,
            "point_count": self.point_count,
            "map_frame_pose": np.asarray(self.map_frame_pose).tolist(),
        }


def rois_to_document(rois) -> dict:
    return {"schema_version": ROI_SCHEMA_VERSION,
            "rois": [r.to_dict() for r in rois]}


def gradient_magnitudes(points: np.ndarray, temperatures: np.ndarray,
                        radius: float, subset=None) -> np.ndarray:
    """|grad T| via local linear regression over a radius neighborhood.

    Returns per-point magnitudes; with subset, only those indices are
    evaluated (result is indexed by subset position).
    """
    tree = cKDTree(points)
    query_pts = points if subset is None else points[subset]
    grads = np.zeros(len(query_pts))
    neighborhoods = tree.query_ball_point(query_pts, radius)
    for i, idxs in enumerate(neighborhoods):
        if len(idxs) < 4:
            continue
        p = points[idxs]
        t = temperatures[idxs]
        centered = p - p.mean(axis=0)
        g, *_ = np.linalg.lstsq(centered, t - t.mean(), rcond=None)
        grads[i] = float(np.linalg.norm(g))
    return grads


def _connected_clusters(points: np.ndarray, radius: float) -> list[np.ndarray]:
    tree = cKDTree(points)
    n = len(points)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in tree.query_pairs(radius):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    # sorted members keep fitting order-independent
    return [np.asarray(sorted(m), dtype=int) for m in
            sorted(groups.values(), key=lambda m: min(m))]


def fit_circle_2d(xy: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Algebraic least-squares circle fit; returns (center, radius, rms)."""
    x, y = xy[:, 0], xy[:, 1]
    A = np.column_stack([2 * x, 2 * y, np.ones(len(x))])
    b = x * x + y * y
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    cx, cy = sol[0], sol[1]
    r = math.sqrt(max(sol[2] + cx * cx + cy * cy, 0.0))
    residuals = np.hypot(x - cx, y - cy) - r
    rms = float(np.sqrt(np.mean(residuals ** 2)))
    return np.array([cx, cy]), r, rms


def _plane_basis(points: np.ndarray):
    centroid = points.mean(axis=0)
    centered = points - centroid
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    # rows of vt: principal axes, last one is the plane normal
    return centroid, vt[0], vt[1], vt[2]


def detect_rois(thermal_points, ambient: float,
                gradient_threshold: float = DEFAULT_GRADIENT_THRESHOLD,
                cluster_radius: float = DEFAULT_CLUSTER_RADIUS,
                min_points: int = DEFAULT_MIN_POINTS,
                candidate_min_delta: float = 0.0) -> list[ROI]:
    """Threshold gradient magnitudes, cluster, and fit geometry per cluster.

    Model selection is fixed: circle first (RMS residual < 20% of radius),
    then segment (lateral RMS < cluster_radius / 2), else patch.
    candidate_min_delta > 0 skips the gradient regression for points whose
    temperature sits within that margin of ambient (a speed knob for large
    clouds; such points cannot carry a steep gradient for realistic leaks).
    """
    if gradient_threshold <= 0 or cluster_radius <= 0:
        raise ValueError("thresholds must be positive")
    if not thermal_points:
        return []
    pts = np.array([tp.position for tp in thermal_points], dtype=float)
    temps = np.array([tp.temperature for tp in thermal_points], dtype=float)

    if candidate_min_delta > 0.0:
        candidates = np.abs(temps - ambient) >= candidate_min_delta
        grads = np.zeros(len(pts))
        if candidates.any():
            grads[candidates] = gradient_magnitudes(
                pts, temps, cluster_radius, subset=np.nonzero(candidates)[0])
    else:
        grads = gradient_magnitudes(pts, temps, cluster_radius)
    hot = grads >= gradient_threshold
    if not hot.any():
        return []
    hot_pts = pts[hot]
    hot_temps = temps[hot]
    hot_grads = grads[hot]

    rois = []
    for members in _connected_clusters(hot_pts, cluster_radius):
        if len(members) < min_points:
            continue
        cpts = hot_pts[members]
        centroid, u, v, normal = _plane_basis(cpts)
        uv = np.column_stack([(cpts - centroid) @ u, (cpts - centroid) @ v])

        center2, radius, circ_rms = fit_circle_2d(uv)
        # a near-collinear cluster fits a huge circle with tiny residual;
        # demand the fitted radius stay commensurate with the cluster itself
        extent_diag = float(np.hypot(uv[:, 0].max() - uv[:, 0].min(),
                                     uv[:, 1].max() - uv[:, 1].min()))
        if (radius > 0 and circ_rms < 0.2 * radius
                and radius <= 1.5 * extent_diag):
            center3 = centroid + center2[0] * u + center2[1] * v
            geometry = {"type": "circle", "center": center3, "radius": radius,
                        "normal": normal}
        else:
            lateral_rms = float(np.sqrt(np.mean(uv[:, 1] ** 2)))
            if lateral_rms < cluster_radius / 2.0:
                lo, hi = uv[:, 0].min(), uv[:, 0].max()
                geometry = {"type": "segment",
                            "p0": centroid + lo * u, "p1": centroid + hi * u}
            else:
                extent = (float(uv[:, 0].max() - uv[:, 0].min()),
                          float(uv[:, 1].max() - uv[:, 1].min()))
                geometry = {"type": "patch", "centroid": centroid,
                            "extent": extent}
        pose = transforms.transform(translation=centroid)
        rois.append(ROI(
            id=f"roi{len(rois)}",
            geometry=geometry,
            peak_gradient=float(hot_grads[members].max()),
            mean_delta_t=float(hot_temps[members].mean() - ambient),
            point_count=int(len(members)),
            map_frame_pose=pose,
        ))
    return rois
