"""Deterministic attic-retrofit robot simulator and teleoperation stack.

Modules:
  world       attic scene model, leak thermal field, seal bookkeeping
  geometry    triangle-mesh construction for ray-cast sensing
  kernels     ray-cast hot loop (compiled extension with numpy fallback)
  robot       platform presets, hatch fit, track/flipper contact + drive model
  arm         5-DOF dispensing arm forward/inverse kinematics
  sensors     synthetic RGBD, thermal, and fiducial observations
  perception  odometry, fiducial correction, voxel mapping, ROI detection
  planner     arc bead paths, foam accounting, seal execution
  protocol    command envelope schema shared by script and live paths
  teleop      session management, watchdog, mode gating
  server      WebSocket/HTTP service wrapping a live simulation
  sim         tick-driven simulation, replay logging, metrics
  export      PLY/JSON/PNG artifact writers
  scenarios   built-in testbed scenes and scripted missions
"""

from .kernels import KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
