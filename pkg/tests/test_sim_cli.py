import copy
import json
import math

import numpy as np
import pytest

from atticsim import cli, scenarios
from atticsim.sim import (Scenario, ScenarioError, Simulation, fnv1a64,
                          replay, run)


def _tiny_scenario(seed=0, **extra):
    doc = {
        "schema_version": 1,
        "scene": scenarios.base_scene(),
        "robot": {"preset": "paris1"},
        "initial_pose": [0.0, -0.9, math.pi / 2.0],
        "seed": seed,
        "duration_s": 1.0,
        "tick_rate_hz": 20.0,
        "frame_stride": 0,
        "script": [{"t": 0.0, "type": "drive", "data": {"v": 0.1, "w": 0.0}}],
    }
    doc.update(extra)
    return doc


def test_fnv1a64_known_vectors():
    # published FNV-1a 64-bit test vectors
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"foobar") == 0x85944171F73967E8


def test_scenario_validation():
    with pytest.raises(ScenarioError, match="schema_version"):
        Scenario.from_document({"scene": scenarios.base_scene()})
    with pytest.raises(ScenarioError, match="unknown"):
        Scenario.from_document(_tiny_scenario(bogus=1))
    with pytest.raises(ScenarioError, match="scene"):
        Scenario.from_document({"schema_version": 1})
    bad = _tiny_scenario()
    bad["scene"]["joists"] = scenarios.joist_row(spacing=0.25)
    with pytest.raises(ScenarioError, match="invalid scene"):
        Scenario.from_document(bad)


def test_identical_seeds_identical_hashes():
    doc = _tiny_scenario(seed=123, frame_stride=4, sense="thermal")
    sim_a, _ = run(Scenario.from_document(doc))
    sim_b, _ = run(Scenario.from_document(copy.deepcopy(doc)))
    hashes_a = [r["hash"] for r in sim_a.replay_records if r["record"] == "tick"]
    hashes_b = [r["hash"] for r in sim_b.replay_records if r["record"] == "tick"]
    assert hashes_a == hashes_b
    assert sim_a.state_hash() == sim_b.state_hash()


def test_different_seeds_diverge():
    # drift makes the rng visible in the hashed pose estimate
    doc_a = _tiny_scenario(seed=1, drift={"sigma_pos": 0.01})
    doc_b = _tiny_scenario(seed=2, drift={"sigma_pos": 0.01})
    sim_a, _ = run(Scenario.from_document(doc_a))
    sim_b, _ = run(Scenario.from_document(doc_b))
    assert sim_a.state_hash() != sim_b.state_hash()


def test_replay_verifies_log(tmp_path):
    doc = _tiny_scenario(seed=7, frame_stride=4, sense="thermal")
    log = tmp_path / "replay.jsonl"
    run(Scenario.from_document(doc), log_path=log)
    verdict = replay(log)
    assert verdict.ok
    assert verdict.ticks_checked == 20
    assert verdict.first_divergence is None


def test_replay_detects_single_bit_tamper(tmp_path):
    doc = _tiny_scenario(seed=7)
    log = tmp_path / "replay.jsonl"
    run(Scenario.from_document(doc), log_path=log)
    lines = log.read_text().splitlines()
    # flip one bit in the last tick's hash
    rec = json.loads(lines[-1])
    h = int(rec["hash"], 16) ^ 1
    rec["hash"] = f"{h:016x}"
    lines[-1] = json.dumps(rec, separators=(",", ":"), sort_keys=True)
    log.write_text("\n".join(lines) + "\n")
    verdict = replay(log)
    assert not verdict.ok
    assert verdict.first_divergence == 20
    assert "hash" in verdict.reason


def test_replay_detects_tampered_command(tmp_path):
    doc = _tiny_scenario(seed=7)
    log = tmp_path / "replay.jsonl"
    run(Scenario.from_document(doc), log_path=log)
    lines = log.read_text().splitlines()
    rec = json.loads(lines[1])
    assert rec["commands"], "expected the scripted drive on the first tick"
    rec["commands"][0]["data"]["v"] = 0.2  # not what was hashed
    lines[1] = json.dumps(rec, separators=(",", ":"), sort_keys=True)
    log.write_text("\n".join(lines) + "\n")
    verdict = replay(log)
    assert not verdict.ok


def test_replay_rejects_missing_header(tmp_path):
    log = tmp_path / "replay.jsonl"
    log.write_text('{"record":"tick","tick":1}\n')
    verdict = replay(log)
    assert not verdict.ok and "header" in verdict.reason


def test_metrics_counts_and_pose_error():
    doc = _tiny_scenario(seed=3)
    sim, metrics = run(Scenario.from_document(doc))
    d = metrics.to_dict()
    assert set(d) == {"roi_precision", "roi_recall", "seal_coverage",
                      "final_pose_error_m", "contact_violations",
                      "foam_used_m2", "runtime_s"}
    assert d["contact_violations"] == 0
    assert d["final_pose_error_m"] == pytest.approx(0.0, abs=1e-12)
    assert d["foam_used_m2"] == 0.0


def test_script_commands_fire_at_time():
    doc = _tiny_scenario()
    doc["script"] = [
        {"t": 0.0, "type": "drive", "data": {"v": 0.1, "w": 0.0}},
        {"t": 0.5, "type": "drive", "data": {"v": 0.0, "w": 0.0}},
    ]
    sim, _ = run(Scenario.from_document(doc))
    # 0.5 s of motion at 0.1 m/s from y = -0.9
    assert sim.state.y == pytest.approx(-0.85, abs=1e-9)
    assert sim.state.x == pytest.approx(0.0, abs=1e-12)


def test_events_recorded_in_log(tmp_path):
    doc = _tiny_scenario()
    doc["script"] = [{"t": 0.2, "type": "mode_toggle", "data": {"mode": "arm"}}]
    log = tmp_path / "r.jsonl"
    sim, _ = run(Scenario.from_document(doc), log_path=log)
    assert sim.mode == "arm"
    records = [json.loads(line) for line in log.read_text().splitlines()]
    assert records[0]["record"] == "header"
    assert records[0]["scenario"]["schema_version"] == 1
    cmds = [c for r in records[1:] for c in r["commands"]]
    assert any(c["type"] == "mode_toggle" for c in cmds)


# ---------------------------------------------------------------------------
# CLI


def _write_scenario(tmp_path, doc):
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(doc))
    return p


def test_cli_run_and_replay(tmp_path, capsys):
    path = _write_scenario(tmp_path, _tiny_scenario(seed=5))
    out = tmp_path / "out"
    rc = cli.main(["run", str(path), "--out", str(out)])
    assert rc == cli.EXIT_OK
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["contact_violations"] == 0
    for artifact in ("replay.jsonl", "map.ply", "rois.json", "metrics.json"):
        assert (out / artifact).exists()

    rc = cli.main(["replay", str(out / "replay.jsonl")])
    assert rc == cli.EXIT_OK
    assert "replay ok" in capsys.readouterr().out


def test_cli_run_builtin_name(tmp_path, capsys):
    out = tmp_path / "out"
    rc = cli.main(["run", "mobility", "--out", str(out)])
    assert rc == cli.EXIT_OK
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["contact_violations"] == 0


def test_cli_seed_override(tmp_path, capsys):
    path = _write_scenario(tmp_path, _tiny_scenario(seed=5))
    rc = cli.main(["run", str(path), "--seed", "9", "--out",
                   str(tmp_path / "o")])
    assert rc == cli.EXIT_OK
    capsys.readouterr()
    header = json.loads((tmp_path / "o" / "replay.jsonl").read_text()
                        .splitlines()[0])
    assert header["scenario"]["seed"] == 9


def test_cli_validation_exit_code(tmp_path, capsys):
    bad = _tiny_scenario()
    bad["scene"]["joists"] = scenarios.joist_row(spacing=0.25)
    path = _write_scenario(tmp_path, bad)
    rc = cli.main(["run", str(path), "--out", str(tmp_path / "o")])
    assert rc == cli.EXIT_VALIDATION
    assert cli.main(["run", str(tmp_path / "missing.json"),
                     "--out", str(tmp_path / "o")]) == cli.EXIT_VALIDATION


def test_cli_replay_divergence_exit_code(tmp_path, capsys):
    path = _write_scenario(tmp_path, _tiny_scenario(seed=5))
    out = tmp_path / "out"
    cli.main(["run", str(path), "--out", str(out)])
    capsys.readouterr()
    log = out / "replay.jsonl"
    lines = log.read_text().splitlines()
    rec = json.loads(lines[-1])
    rec["hash"] = "0" * 16
    lines[-1] = json.dumps(rec, separators=(",", ":"), sort_keys=True)
    log.write_text("\n".join(lines) + "\n")
    rc = cli.main(["replay", str(log)])
    assert rc == cli.EXIT_DIVERGENCE
    assert "FAILED" in capsys.readouterr().err


def _parse_ply(text):
    lines = text.splitlines()
    assert lines[0] == "ply"
    assert lines[1] == "format ascii 1.0"
    n = None
    props = []
    for i, line in enumerate(lines):
        if line.startswith("element vertex"):
            n = int(line.split()[-1])
        elif line.startswith("property"):
            props.append(line.split()[-1])
        elif line == "end_header":
            body = lines[i + 1:]
            break
    assert n is not None and len(body) == n
    return props, [line.split() for line in body]


def test_cli_export_map_and_rois(tmp_path, capsys):
    doc = _tiny_scenario(seed=5, frame_stride=5, sense="rgbd",
                         thermal_noise_sigma=0.0)
    path = _write_scenario(tmp_path, doc)
    out = tmp_path / "out"
    cli.main(["run", str(path), "--out", str(out)])
    capsys.readouterr()

    exp = tmp_path / "exported"
    rc = cli.main(["export", str(out), "--kind", "map", "--out", str(exp)])
    assert rc == cli.EXIT_OK
    props, rows = _parse_ply((exp / "map.ply").read_text())
    assert props == ["x", "y", "z", "red", "green", "blue", "temperature"]
    assert len(rows) > 100
    # exported map is identical to the run's own artifact (determinism)
    assert (exp / "map.ply").read_text() == (out / "map.ply").read_text()

    rc = cli.main(["export", str(out), "--kind", "rois", "--out", str(exp)])
    assert rc == cli.EXIT_OK
    assert json.loads((exp / "rois.json").read_text())["schema_version"] == 1

    rc = cli.main(["export", str(tmp_path / "nope"), "--kind", "map"])
    assert rc == cli.EXIT_VALIDATION


def test_cli_export_frames(tmp_path, capsys):
    doc = _tiny_scenario(seed=5, frame_stride=10, sense="rgbd",
                         thermal_noise_sigma=0.0)
    path = _write_scenario(tmp_path, doc)
    out = tmp_path / "out"
    cli.main(["run", str(path), "--out", str(out)])
    capsys.readouterr()
    rc = cli.main(["export", str(out), "--kind", "frames",
                   "--out", str(tmp_path / "f")])
    assert rc == cli.EXIT_OK
    written = capsys.readouterr().out.splitlines()
    assert len(written) == 2  # 20 ticks, stride 10
    assert all(p.endswith(".png") for p in written)
