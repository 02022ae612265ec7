"""Built-in testbed scenes and scenarios used by the CLI examples and the
acceptance suite.

The standard testbed mirrors a household attic section: 1.22 x 2.51 m
footprint, joists spaced 0.355-0.405 m, fixtures in need of sealing, and an
optional 0.18 m elevation step.
"""

from __future__ import annotations

import math


def joist_row(spacing: float = 0.405, top_height: float = 0.235,
              count: int = 6, length: float = 1.22,
              width: float = 0.045, start_y: float | None = None) -> list[dict]:
    """Joists running along x, spaced along y."""
    if start_y is None:
        start_y = -spacing * (count - 1) / 2.0
    return [
        {
            "origin_m": [-length / 2.0, start_y + i * spacing],
            "direction": [1.0, 0.0],
            "length_m": length,
            "width_m": width,
            "top_height_m": top_height,
        }
        for i in range(count)
    ]


def base_scene(joists=None, fixtures=(), leaks=(), tags=(),
               footprint=(1.22, 2.51), ambient=290.0, exterior=273.0) -> dict:
    return {
        "schema_version": 1,
        "scene": {
            "footprint_m": list(footprint),
            "ambient_attic_temp_k": ambient,
            "exterior_temp_k": exterior,
            "drywall_level_m": 0.0,
            "roof_height_m": 1.5,
        },
        "joists": joists if joists is not None else joist_row(),
        "fixtures": list(fixtures),
        "leaks": list(leaks),
        "hatch": {"width_m": 0.57, "height_m": 0.76, "position_m": [0.0, -1.0]},
        "tags": list(tags),
    }


def light_fixture_leak(center=(0.0, 0.4), radius=0.10, delta_t=-10.0,
                       sigma=0.008, floor_z=0.0) -> tuple[dict, dict]:
    """(fixture, annulus leak) pair for a recessed can light."""
    fixture = {
        "kind": "light_fixture",
        "position_m": [center[0], center[1], floor_z + 0.001],
        "yaw_rad": 0.0,
        "shape": {"type": "circle", "radius": radius * 0.9},
    }
    leak = {
        "id": "leak_light",
        "geometry": {"type": "annulus",
                     "center": [center[0], center[1], floor_z],
                     "radius": radius, "width": 0.01},
        "delta_t_k": delta_t,
        "sigma_m": sigma,
        "relaxation_tau_s": 600.0,
    }
    return fixture, leak


def four_fixture_scene(spacing: float = 0.405) -> dict:
    """Inspection testbed: fan duct, junction box, light fixture, conduit.

    One leak per drywall strip between joist rows (strip centers at -0.405,
    0.0, 0.405, and 0.81 for the default spacing), clear of occluders.
    """
    light_fix, light_leak = light_fixture_leak(center=(0.0, 0.405))
    fixtures = [
        light_fix,
        {"kind": "fan_duct", "position_m": [0.0, -0.42, 0.001], "yaw_rad": 0.0,
         "shape": {"type": "cylinder", "radius": 0.06, "height": 0.20}},
        {"kind": "junction_box", "position_m": [0.12, -0.04, 0.001], "yaw_rad": 0.0,
         "shape": {"type": "rectangle", "w": 0.10, "h": 0.10}},
        {"kind": "conduit", "position_m": [-0.1, 0.86, 0.001], "yaw_rad": 0.0,
         "shape": {"type": "rectangle", "w": 0.30, "h": 0.04}},
    ]
    leaks = [
        light_leak,
        {"id": "leak_fan",
         "geometry": {"type": "point", "center": [0.13, -0.42, 0.0]},
         "delta_t_k": -8.0, "sigma_m": 0.02, "relaxation_tau_s": 600.0},
        {"id": "leak_jbox",
         "geometry": {"type": "segment", "p0": [0.05, -0.10, 0.0],
                      "p1": [0.05, 0.02, 0.0], "width": 0.005},
         "delta_t_k": -8.0, "sigma_m": 0.01, "relaxation_tau_s": 600.0},
        {"id": "leak_conduit",
         "geometry": {"type": "segment", "p0": [-0.25, 0.81, 0.0],
                      "p1": [0.05, 0.81, 0.0], "width": 0.005},
         "delta_t_k": -9.0, "sigma_m": 0.01, "relaxation_tau_s": 600.0},
    ]
    return base_scene(joists=joist_row(spacing=spacing), fixtures=fixtures,
                      leaks=leaks)


def step_scene(spacing: float = 0.38, step_height: float = 0.18) -> dict:
    """Traversal testbed: flat joists, then a raised section one step up."""
    low = joist_row(spacing=spacing, count=4, start_y=-1.0)
    high = joist_row(spacing=spacing, top_height=0.235 + step_height, count=3,
                     start_y=-1.0 + 4 * spacing)
    return base_scene(joists=low + high)


def tagged_scene(spacing: float = 0.405, n_tags: int = 4) -> dict:
    """Flat testbed with fiducial tags along the far wall."""
    scene = base_scene(joists=joist_row(spacing=spacing))
    xs = [-0.45, -0.15, 0.15, 0.45][:n_tags]
    scene["tags"] = [
        {"id": f"tag{i}", "position_m": [x, 1.25, 0.35], "yaw_rad": -math.pi / 2.0}
        for i, x in enumerate(xs)
    ]
    return scene


def drive_script(v: float = 0.1, t0: float = 0.0, t1: float = 10.0) -> list[dict]:
    return [
        {"t": t0, "type": "drive", "data": {"v": v, "w": 0.0}},
        {"t": t1, "type": "drive", "data": {"v": 0.0, "w": 0.0}},
    ]


def mobility_scenario(locked_flippers: bool = False, seed: int = 7) -> dict:
    """Scripted traversal over 0.38 m-spaced joists and one 0.18 m step.

    Flippers start flat (full span); the front pair is raised shortly before
    the step unless locked_flippers.
    """
    script = [
        {"t": 0.0, "type": "drive", "data": {"v": 0.1, "w": 0.0}},
    ]
    if not locked_flippers:
        # raise front flippers (0, 1) to 1.0 rad so the tips clear the step
        script += [
            {"t": 2.0, "type": "flipper", "data": {"index": 0, "rate": 0.5}},
            {"t": 2.0, "type": "flipper", "data": {"index": 1, "rate": 0.5}},
            {"t": 4.0, "type": "flipper", "data": {"index": 0, "rate": 0.0}},
            {"t": 4.0, "type": "flipper", "data": {"index": 1, "rate": 0.0}},
        ]
    script.append({"t": 15.5, "type": "drive", "data": {"v": 0.0, "w": 0.0}})
    script.sort(key=lambda c: c["t"])
    return {
        "schema_version": 1,
        "name": "mobility",
        "scene": step_scene(),
        "robot": {"preset": "paris1"},
        "initial_pose": [0.0, -0.9, math.pi / 2.0],
        "seed": seed,
        "duration_s": 16.5,
        "tick_rate_hz": 20.0,
        "frame_stride": 0,
        "script": script,
    }


def inspection_scenario(seed: int = 3, seal: bool = False) -> dict:
    """Drive the thermal module across the four-fixture testbed."""
    script = [
        {"t": 0.0, "type": "drive", "data": {"v": 0.12, "w": 0.0}},
        {"t": 12.5, "type": "drive", "data": {"v": 0.0, "w": 0.0}},
    ]
    if seal:
        script += [
            {"t": 13.0, "type": "mode_toggle", "data": {"mode": "arm"}},
            {"t": 13.5, "type": "request_seal", "data": {"roi_id": "auto"}},
        ]
    return {
        "schema_version": 1,
        "name": "inspection",
        "scene": four_fixture_scene(),
        "robot": {"preset": "paris1"},
        # arm camera rides 0.45 m ahead of the base along +y here
        "initial_pose": [0.0, -0.81, math.pi / 2.0],
        "seed": seed,
        "duration_s": 14.0,
        "tick_rate_hz": 20.0,
        "frame_stride": 4,
        "sense": "thermal",
        "roi_stride": 4,
        "thermal_noise_sigma": 0.1,
        "script": script,
    }


def seal_scenario(seed: int = 11) -> dict:
    """Drive up to a leaky light fixture, detect it, and seal it."""
    fixture, leak = light_fixture_leak(center=(0.0, 0.405))
    scene = base_scene(fixtures=[fixture], leaks=[leak])
    script = [
        {"t": 0.0, "type": "drive", "data": {"v": 0.1, "w": 0.0}},
        {"t": 4.05, "type": "drive", "data": {"v": 0.0, "w": 0.0}},
        {"t": 5.0, "type": "mode_toggle", "data": {"mode": "arm"}},
        {"t": 5.5, "type": "request_seal", "data": {"roi_id": "auto"}},
    ]
    return {
        "schema_version": 1,
        "name": "seal",
        "scene": scene,
        "robot": {"preset": "paris1"},
        "initial_pose": [0.0, -0.405, math.pi / 2.0],
        "seed": seed,
        "duration_s": 8.0,
        "tick_rate_hz": 20.0,
        "frame_stride": 4,
        "sense": "thermal",
        "roi_stride": 4,
        "thermal_noise_sigma": 0.1,
        "script": script,
    }


def mapping_scenario(seed: int = 5) -> dict:
    """Zero-noise RGBD mapping sweep with perfect poses."""
    return {
        "schema_version": 1,
        "name": "mapping",
        "scene": base_scene(),
        "robot": {"preset": "paris1"},
        "initial_pose": [0.0, -0.8, math.pi / 2.0],
        "seed": seed,
        "duration_s": 10.0,
        "tick_rate_hz": 20.0,
        "frame_stride": 10,
        "sense": "rgbd",
        "thermal_noise_sigma": 0.0,
        "script": drive_script(v=0.12, t1=9.0),
    }


BUILTIN = {
    "mobility": mobility_scenario,
    "inspection": inspection_scenario,
    "mapping": mapping_scenario,
    "seal": seal_scenario,
}
