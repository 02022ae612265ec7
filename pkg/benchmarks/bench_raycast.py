#!/usr/bin/env python3
"""Benchmark the compiled ray-cast kernel against the numpy fallback.

Casts full depth-camera frames against the default attic mesh and reports
per-frame timings plus the speedup.  Both backends must agree exactly on
hit parameters and triangle indices; the script fails loudly if they do
not.

Usage:
    python3 benchmarks/bench_raycast.py [--frames N] [--width W] [--height H]
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from atticsim import scenarios
from atticsim.geometry import build_mesh
from atticsim.kernels import fallback
from atticsim.sensors import _pixel_dirs, default_rgbd_intrinsics
from atticsim.transforms import camera_pose
from atticsim.world import load_scene

try:
    from atticsim.kernels import _raycast as compiled
except ImportError:
    compiled = None


def _camera_rays(intrinsics, camera_pose):
    dirs_cam = _pixel_dirs(intrinsics).reshape(-1, 3)
    rot = camera_pose[:3, :3]
    origin = camera_pose[:3, 3].copy()
    dirs = dirs_cam @ rot.T
    return origin, np.ascontiguousarray(dirs)


def _time_backend(impl, origin, dirs, tris, frames):
    impl.raycast(origin, dirs, tris, 1e-6)  # warm up
    times = []
    for _ in range(frames):
        t0 = time.perf_counter()
        impl.raycast(origin, dirs, tris, 1e-6)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--frames", type=int, default=5,
                        help="timed frames per backend (best-of is reported)")
    parser.add_argument("--width", type=int, default=160)
    parser.add_argument("--height", type=int, default=120)
    args = parser.parse_args(argv)

    scene = load_scene(scenarios.base_scene())
    mesh = build_mesh(scene)
    tris = np.ascontiguousarray(mesh.vertices, dtype=np.float64)
    intrinsics = default_rgbd_intrinsics(args.width, args.height)
    # camera at mid-attic looking down at the floor ahead
    pose = camera_pose((0.0, -0.5, 0.9), look_at=(0.0, 0.3, 0.0))
    origin, dirs = _camera_rays(intrinsics, pose)
    n_rays = len(dirs)
    print(f"mesh: {mesh.n_triangles} triangles, frame: {args.width}x{args.height} "
          f"({n_rays} rays)")

    t_np = _time_backend(fallback, origin, dirs, tris, args.frames)
    print(f"numpy fallback : {t_np * 1e3:9.2f} ms/frame "
          f"({n_rays / t_np / 1e6:.2f} Mray/s)")

    if compiled is None:
        print("compiled kernel: not built (install with the Cython extension "
              "to compare)")
        return 0

    t_cy = _time_backend(compiled, origin, dirs, tris, args.frames)
    print(f"compiled kernel: {t_cy * 1e3:9.2f} ms/frame "
          f"({n_rays / t_cy / 1e6:.2f} Mray/s)")
    print(f"speedup        : {t_np / t_cy:9.2f}x")

    t_a, idx_a = fallback.raycast(origin, dirs, tris, 1e-6)
    t_b, idx_b = compiled.raycast(origin, dirs, tris, 1e-6)
    if not (np.array_equal(idx_a, idx_b) and np.array_equal(t_a, t_b)):
        print("ERROR: backends disagree", file=sys.stderr)
        return 1
    print("backends agree bit-exactly on all rays")
    return 0


if __name__ == "__main__":
    sys.exit(main())
