import math

import numpy as np
import pytest

from atticsim import perception, transforms
from atticsim.perception import (PoseEstimate, ROI, ThermalPoint, VoxelMap,
                                 detect_rois, fiducial_correct, fit_circle_2d,
                                 fuse_thermal, integrate_map, odometry_update,
                                 rois_to_document)
from atticsim.sensors import CameraIntrinsics


def test_odometry_noiseless_is_exact():
    est = PoseEstimate(x=1.0, y=2.0, heading=0.0)
    est = odometry_update(est, (0.5, math.pi / 2.0), {})
    assert est.heading == pytest.approx(math.pi / 2.0)
    # motion is applied along the post-increment heading
    assert est.x == pytest.approx(1.0, abs=1e-12)
    assert est.y == pytest.approx(2.5, abs=1e-12)
    assert est.uncertainty == 0.0


def test_odometry_bias_accumulates():
    est = PoseEstimate()
    for _ in range(100):
        est = odometry_update(est, (0.01, 0.0), {"bias": 0.001})
    assert est.x == pytest.approx(1.1, abs=1e-9)


def test_odometry_drift_statistics():
    """RMS displacement after N sigma-scaled random steps ~ sigma * sqrt(N)."""
    sigma, n, trials = 0.01, 200, 300
    finals = []
    for seed in range(trials):
        rng = np.random.default_rng(seed)
        est = PoseEstimate()
        for _ in range(n):
            est = odometry_update(est, (0.0, 0.0), {"sigma_pos": sigma}, rng=rng)
        finals.append(math.hypot(est.x, est.y))
    rms = math.sqrt(np.mean(np.square(finals)))
    assert rms == pytest.approx(sigma * math.sqrt(n), rel=0.15)
    assert est.uncertainty == pytest.approx(sigma * n)


def test_odometry_rejects_negative_sigma():
    with pytest.raises(ValueError):
        odometry_update(PoseEstimate(), (0, 0), {"sigma_pos": -1.0})


def _obs(tag_world, robot_pose_2d, camera_from_robot=np.eye(4)):
    """Synthesize a FiducialObservation for a robot at (x, y, heading)."""
    from atticsim.sensors import FiducialObservation
    x, y, h = robot_pose_2d
    robot_world = transforms.transform(transforms.rot_z(h), (x, y, 0.0))
    tag_in_robot = transforms.invert(robot_world) @ tag_world
    rel = camera_from_robot @ tag_in_robot
    return FiducialObservation(tag_id="t0", relative_pose=rel,
                               noise_applied=False)


def test_fiducial_correct_single_tag_exact():
    tag_world = transforms.transform(transforms.rot_z(0.3), (0.5, 1.2, 0.35))
    truth = (0.2, -0.4, 0.7)
    obs = _obs(tag_world, truth)
    est = fiducial_correct(PoseEstimate(x=9.0, y=9.0, heading=0.0), [obs],
                           {"t0": tag_world}, time=5.0)
    assert est.x == pytest.approx(truth[0], abs=1e-9)
    assert est.y == pytest.approx(truth[1], abs=1e-9)
    assert est.heading == pytest.approx(truth[2], abs=1e-9)
    assert est.last_correction_time == 5.0


def test_fiducial_correct_multi_tag_least_squares():
    tags = {}
    observations = []
    truth = (-0.3, 0.8, -0.5)
    for i, (tx, ty) in enumerate([(-0.4, 1.2), (0.1, 1.2), (0.5, 1.3)]):
        tw = transforms.transform(transforms.rot_z(-math.pi / 2), (tx, ty, 0.35))
        tags[f"t{i}"] = tw
        obs = _obs(tw, truth)
        observations.append(type(obs)(tag_id=f"t{i}",
                                      relative_pose=obs.relative_pose,
                                      noise_applied=False))
    est = fiducial_correct(PoseEstimate(), observations, tags)
    assert est.x == pytest.approx(truth[0], abs=1e-9)
    assert est.y == pytest.approx(truth[1], abs=1e-9)
    assert est.heading == pytest.approx(truth[2], abs=1e-9)


def test_fiducial_correct_respects_camera_extrinsics():
    cam_from_robot = transforms.transform(transforms.rot_z(0.2), (0.2, 0.0, 0.3))
    tag_world = transforms.transform(np.eye(3), (0.0, 1.0, 0.4))
    truth = (0.1, 0.2, 0.3)
    obs = _obs(tag_world, truth, camera_from_robot=cam_from_robot)
    est = fiducial_correct(PoseEstimate(), [obs], {"t0": tag_world},
                           camera_from_robot=cam_from_robot)
    assert est.x == pytest.approx(truth[0], abs=1e-9)
    assert est.y == pytest.approx(truth[1], abs=1e-9)


def test_fiducial_correct_unknown_tag_raises():
    tag_world = np.eye(4)
    obs = _obs(tag_world, (0, 0, 0))
    with pytest.raises(KeyError):
        fiducial_correct(PoseEstimate(), [obs], {})


def test_voxel_map_indexing():
    vmap = VoxelMap(voxel_size=0.02)
    assert vmap.index_of((0.001, 0.039, -0.001)) == (0, 1, -1)
    assert np.allclose(vmap.center_of((0, 1, -1)), (0.01, 0.03, -0.01))
    with pytest.raises(ValueError):
        VoxelMap(voxel_size=0.0)


def test_integrate_map_accumulates_colors():
    vmap = VoxelMap(voxel_size=0.1)
    pts = np.array([[0.05, 0.05, 0.05], [0.051, 0.049, 0.05], [0.95, 0.0, 0.0]])
    cols = np.array([[100, 0, 0], [200, 0, 0], [0, 255, 0]], dtype=np.uint8)
    integrate_map(vmap, pts, PoseEstimate(), colors=cols,
                  temperatures=np.array([290.0, 292.0, 300.0]))
    assert len(vmap.cells) == 2
    cell = vmap.cells[(0, 0, 0)]
    assert cell.hits == 2
    assert np.array_equal(cell.color, [150, 0, 0])
    assert cell.mean_temperature == pytest.approx(291.0)


def test_integrate_map_in_robot_frame_uses_estimate():
    vmap = VoxelMap(voxel_size=0.05)
    est = PoseEstimate(x=1.0, y=0.0, heading=math.pi / 2.0)
    pts = np.array([[0.5, 0.0, 0.1]])  # 0.5 ahead of the robot
    integrate_map(vmap, pts, est, points_in_robot_frame=True)
    centers = vmap.centers()
    assert np.allclose(centers[0], [1.025, 0.525, 0.125])


def test_fuse_thermal_bilinear_oracle():
    intr = CameraIntrinsics.from_fov(8, 6, 60.0, 45.0)
    img = np.arange(48, dtype=float).reshape(6, 8)
    # a point on the optical axis hits the principal point exactly
    pts = np.array([[0.0, 0.0, 1.0]])
    out = fuse_thermal(pts, img, np.eye(4), intr)
    assert len(out) == 1
    u, v = intr.cx, intr.cy
    u0, v0 = int(u), int(v)
    expected = img[v0, u0]  # integer pixel: bilinear degenerates to lookup
    assert out[0].temperature == pytest.approx(expected)
    # points behind the camera or outside the frustum are dropped
    assert fuse_thermal(np.array([[0.0, 0.0, -1.0]]), img, np.eye(4), intr) == []
    assert fuse_thermal(np.array([[99.0, 0.0, 1.0]]), img, np.eye(4), intr) == []


def test_fit_circle_recovers_ground_truth():
    rng = np.random.default_rng(4)
    th = rng.uniform(0, 2 * math.pi, 200)
    cx, cy, r = 0.3, -0.2, 0.12
    xy = np.column_stack([cx + r * np.cos(th), cy + r * np.sin(th)])
    center, radius, rms = fit_circle_2d(xy)
    assert np.allclose(center, [cx, cy], atol=1e-9)
    assert radius == pytest.approx(r, abs=1e-9)
    assert rms < 1e-9


def _thermal_ring(center, radius, delta_t=-10.0, ambient=290.0, sigma=0.008,
                  spacing=0.01, extent=0.3, noise=0.0, seed=0):
    """Synthetic fused cloud of a floor patch around an annulus anomaly."""
    rng = np.random.default_rng(seed)
    xs = np.arange(center[0] - extent, center[0] + extent, spacing)
    ys = np.arange(center[1] - extent, center[1] + extent, spacing)
    pts = []
    for x in xs:
        for y in ys:
            d = abs(math.hypot(x - center[0], y - center[1]) - radius)
            t = ambient + delta_t * math.exp(-d * d / (2 * sigma ** 2))
            if noise:
                t += rng.normal(0.0, noise)
            pts.append(ThermalPoint(position=np.array([x, y, 0.0]),
                                    temperature=t, source_pixel=(0, 0)))
    return pts


def test_detect_rois_circle_fit():
    pts = _thermal_ring((0.1, 0.2), 0.1)
    # candidate_min_delta trims the cluster to the anomaly core, as the
    # simulator does; without it the smoothed gradient band is too wide
    rois = detect_rois(pts, ambient=290.0, candidate_min_delta=0.3)
    assert len(rois) == 1
    roi = rois[0]
    assert roi.geometry["type"] == "circle"
    assert roi.geometry["radius"] == pytest.approx(0.1, rel=0.1)
    assert np.allclose(roi.geometry["center"][:2], [0.1, 0.2], atol=0.01)
    assert roi.mean_delta_t < 0.0
    assert roi.peak_gradient >= 50.0


def test_detect_rois_segment_fit():
    pts = []
    for x in np.arange(-0.3, 0.3, 0.01):
        for y in np.arange(-0.15, 0.15, 0.01):
            d = abs(y)  # cold line along y = 0
            t = 290.0 - 9.0 * math.exp(-d * d / (2 * 0.01 ** 2))
            pts.append(ThermalPoint(position=np.array([x, y, 0.0]),
                                    temperature=t, source_pixel=(0, 0)))
    rois = detect_rois(pts, ambient=290.0, candidate_min_delta=0.3)
    assert len(rois) == 1
    g = rois[0].geometry
    assert g["type"] == "segment"
    ends = sorted([g["p0"][0], g["p1"][0]])
    assert ends[0] == pytest.approx(-0.3, abs=0.03)
    assert ends[1] == pytest.approx(0.29, abs=0.03)
    assert abs(g["p0"][1]) < 0.02 and abs(g["p1"][1]) < 0.02


def test_detect_rois_empty_and_quiet():
    assert detect_rois([], ambient=290.0) == []
    flat = [ThermalPoint(position=np.array([x, 0.0, 0.0]), temperature=290.0,
                         source_pixel=(0, 0)) for x in np.arange(0, 1, 0.01)]
    assert detect_rois(flat, ambient=290.0) == []


def test_detect_rois_threshold_validation():
    with pytest.raises(ValueError):
        detect_rois([], ambient=290.0, gradient_threshold=0.0)


def test_rois_document_shape():
    pts = _thermal_ring((0.0, 0.0), 0.1)
    doc = rois_to_document(detect_rois(pts, ambient=290.0,
                                       candidate_min_delta=0.3))
    assert doc["schema_version"] == 1
    roi = doc["rois"][0]
    assert set(roi) == {"id", "geometry", "peak_gradient_k_per_m",
                        "mean_delta_t_k", "point_count", "map_frame_pose"}
    assert isinstance(roi["geometry"]["center"], list)
    import json
    json.dumps(doc)  # must be JSON-serializable
