"""Run artifact exporters: voxel map PLY, ROI JSON, frame PNGs."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .perception import VoxelMap, rois_to_document
from .sim import Scenario, Simulation, run


class ExportError(RuntimeError):
    pass


def voxel_map_ply(vmap: VoxelMap) -> str:
    """ASCII PLY of voxel centers with color and mean temperature."""
    lines = [
        "ply", "format ascii 1.0",
        f"element vertex {len(vmap.cells)}",
        "property float x", "property float y", "property float z",
        "property uchar red", "property uchar green", "property uchar blue",
        "property float temperature",
        "end_header",
    ]
    for idx, cell in vmap.cells.items():
        c = vmap.center_of(idx)
        col = cell.color
        temp = cell.mean_temperature
        lines.append(f"{c[0]:.6f} {c[1]:.6f} {c[2]:.6f} "
                     f"{col[0]} {col[1]} {col[2]} "
                     f"{temp if temp is not None else 0.0:.3f}")
    return "\n".join(lines) + "\n"


def write_run_artifacts(sim: Simulation, metrics, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "map.ply").write_text(voxel_map_ply(sim.vmap))
    (out / "rois.json").write_text(json.dumps(rois_to_document(sim.rois), indent=2))
    (out / "metrics.json").write_text(json.dumps(metrics.to_dict(), indent=2))


def export(run_dir, kind: str, out_dir=None) -> list[Path]:
    """Re-derive artifacts for a completed run directory.

    Runs are deterministic, so frames are reproduced by re-executing the
    replay log's embedded scenario.
    """
    run_dir = Path(run_dir)
    out = Path(out_dir) if out_dir is not None else run_dir
    out.mkdir(parents=True, exist_ok=True)
    log_path = run_dir / "replay.jsonl"
    if not log_path.exists():
        raise ExportError(f"missing replay log {log_path}")
    with open(log_path) as fh:
        header = json.loads(fh.readline())
    if header.get("record") != "header":
        raise ExportError("replay log has no header record")
    scenario = Scenario.from_document(header["scenario"])

    written: list[Path] = []
    if kind == "frames":
        from .sensors import save_color_png, save_thermal_png16

        frames_dir = out / "frames"
        frames_dir.mkdir(parents=True, exist_ok=True)

        def sink(tick, stream, image):
            if stream == "rgb":
                path = frames_dir / f"rgb_{tick:06d}.png"
                save_color_png(path, image)
            else:
                path = frames_dir / f"thermal_{tick:06d}.png"
                save_thermal_png16(path, image)
            written.append(path)

        sim = Simulation(scenario)
        sim.frame_sink = sink
        n_ticks = int(round(scenario.duration * scenario.tick_rate))
        script = list(scenario.script)
        si = 0
        seq = 0
        from .protocol import CommandEnvelope
        for tick in range(n_ticks):
            now = tick / scenario.tick_rate
            commands = []
            while si < len(script) and float(script[si].get("t", 0.0)) <= now + 1e-12:
                seq += 1
                commands.append(CommandEnvelope(
                    seq=seq, type=script[si]["type"],
                    data=dict(script[si].get("data", {})), sent_at=now * 1000.0))
                si += 1
            sim.step(commands)
        return written

    sim, metrics = run(scenario)
    if kind == "map":
        path = out / "map.ply"
        path.write_text(voxel_map_ply(sim.vmap))
        written.append(path)
    elif kind == "rois":
        path = out / "rois.json"
        path.write_text(json.dumps(rois_to_document(sim.rois), indent=2))
        written.append(path)
    else:
        raise ExportError(f"unknown export kind {kind!r}")
    return written
