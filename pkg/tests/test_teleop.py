import math

import numpy as np
import pytest

from atticsim import scenarios
from atticsim.sim import Scenario, Simulation
from atticsim.teleop import SEAL_PROGRESS_STEPS, TeleopCore


def _make_core(watchdog_ms=500.0, scenario_doc=None):
    doc = scenario_doc or {
        "schema_version": 1,
        "scene": scenarios.base_scene(),
        "robot": {"preset": "paris1"},
        "initial_pose": [0.0, -0.9, math.pi / 2.0],
        "seed": 0,
        "duration_s": 5.0,
        "tick_rate_hz": 50.0,
        "frame_stride": 0,
    }
    sim = Simulation(Scenario.from_document(doc))
    return TeleopCore(sim, watchdog_timeout_ms=watchdog_ms)


def _cmd(seq, kind, **data):
    return {"seq": seq, "type": kind, "data": data}


def test_first_session_is_driver_rest_observers():
    core = _make_core()
    a = core.open_session()
    b = core.open_session()
    assert a.role == "driver"
    assert b.role == "observer"
    core.close_session(a.id)
    c = core.open_session()
    assert c.role == "driver"


def test_closing_driver_halts_motion():
    core = _make_core()
    s = core.open_session()
    assert core.handle_command(s.id, _cmd(1, "drive", v=0.1, w=0.0))["type"] == "ack"
    core.tick()
    assert core.sim.active_command.linear_velocity == 0.1
    core.close_session(s.id)
    assert core.sim.active_command.linear_velocity == 0.0
    assert core.sim.state.watchdog_hold


def test_exactly_one_reply_per_message():
    core = _make_core()
    s = core.open_session()
    replies = [core.handle_command(s.id, _cmd(i, "heartbeat"))
               for i in range(1, 11)]
    assert all(r == {"type": "ack", "seq": i + 1}
               for i, r in enumerate(replies))


def test_seq_must_strictly_increase():
    core = _make_core()
    s = core.open_session()
    assert core.handle_command(s.id, _cmd(5, "heartbeat"))["type"] == "ack"
    dup = core.handle_command(s.id, _cmd(5, "heartbeat"))
    assert dup["type"] == "error" and dup["code"] == "out_of_order"
    old = core.handle_command(s.id, _cmd(3, "heartbeat"))
    assert old["code"] == "out_of_order"
    assert core.handle_command(s.id, _cmd(6, "heartbeat"))["type"] == "ack"


def test_malformed_envelopes_rejected():
    core = _make_core()
    s = core.open_session()
    assert core.handle_command(s.id, {"type": "drive"})["code"] == "malformed"
    assert core.handle_command(s.id, _cmd(1, "teleport"))["code"] == "unknown_type"
    assert core.handle_command(s.id, _cmd(2, "drive", v=0.1))["code"] == "malformed"
    assert core.handle_command(s.id, _cmd(3, "flipper", index=7,
                                          rate=0.1))["code"] == "malformed"
    assert core.handle_command("ghost", _cmd(1, "heartbeat"))["code"] == "no_session"


def test_observer_cannot_control():
    core = _make_core()
    core.open_session()
    obs = core.open_session()
    r = core.handle_command(obs.id, _cmd(1, "drive", v=0.1, w=0.0))
    assert r["code"] == "not_driver"
    # heartbeats are fine for observers
    assert core.handle_command(obs.id, _cmd(2, "heartbeat"))["type"] == "ack"


def test_mode_gating():
    core = _make_core()
    s = core.open_session()
    # arm commands rejected in drive mode
    r = core.handle_command(s.id, _cmd(1, "arm_jog", joint=0, delta=0.1))
    assert r["code"] == "wrong_mode"
    assert core.handle_command(s.id, _cmd(2, "mode_toggle",
                                          mode="arm"))["type"] == "ack"
    core.tick()
    assert core.sim.mode == "arm"
    # drive commands rejected in arm mode
    r = core.handle_command(s.id, _cmd(3, "drive", v=0.1, w=0.0))
    assert r["code"] == "wrong_mode"
    assert core.handle_command(s.id, _cmd(4, "arm_jog", joint=0,
                                          delta=0.1))["type"] == "ack"


def test_limit_enforcement():
    core = _make_core()
    s = core.open_session()
    assert core.handle_command(s.id, _cmd(1, "drive", v=0.4, w=0.0))["code"] == "limit"
    assert core.handle_command(s.id, _cmd(2, "flipper", index=0,
                                          rate=0.9))["code"] == "limit"


def test_estop_bypasses_queue():
    core = _make_core()
    s = core.open_session()
    core.handle_command(s.id, _cmd(1, "drive", v=0.1, w=0.0))
    core.tick()
    assert core.sim.active_command.linear_velocity == 0.1
    core.handle_command(s.id, _cmd(2, "estop"))
    # effective immediately, before any tick
    assert core.sim.active_command.linear_velocity == 0.0
    assert not core.sim.state.trigger_on


def test_watchdog_halts_after_timeout():
    core = _make_core(watchdog_ms=500.0)
    s = core.open_session()
    core.handle_command(s.id, _cmd(1, "drive", v=0.1, w=0.0))
    core.tick()
    y0 = core.sim.state.y
    # 500 ms of silence at 50 Hz = 25 ticks; one more tick may apply the hold
    for _ in range(27):
        core.tick()
    assert core.sim.state.watchdog_hold
    assert core.sim.active_command.linear_velocity == 0.0
    y_halt = core.sim.state.y
    for _ in range(10):
        core.tick()
    assert core.sim.state.y == y_halt  # fully stopped
    assert y_halt > y0


def test_heartbeat_feeds_watchdog():
    core = _make_core(watchdog_ms=500.0)
    s = core.open_session()
    core.handle_command(s.id, _cmd(1, "drive", v=0.1, w=0.0))
    seq = 2
    for _ in range(100):
        core.tick()
        core.handle_command(s.id, _cmd(seq, "heartbeat"))
        seq += 1
    assert not core.sim.state.watchdog_hold
    assert core.sim.active_command.linear_velocity == 0.1


def test_driver_activity_clears_hold():
    core = _make_core(watchdog_ms=500.0)
    s = core.open_session()
    core.handle_command(s.id, _cmd(1, "drive", v=0.1, w=0.0))
    for _ in range(30):
        core.tick()
    assert core.sim.state.watchdog_hold
    core.handle_command(s.id, _cmd(2, "drive", v=0.1, w=0.0))
    assert not core.sim.state.watchdog_hold
    core.tick()
    assert core.sim.active_command.linear_velocity == 0.1


def test_seal_flow_progress_then_result():
    doc = scenarios.seal_scenario()
    doc["script"] = []  # drive manually via teleop
    sim = Simulation(Scenario.from_document(doc))
    core = TeleopCore(sim)
    s = core.open_session()
    seq = 0

    def send(kind, **data):
        nonlocal seq
        seq += 1
        return core.handle_command(s.id, _cmd(seq, kind, **data))

    assert send("drive", v=0.1, w=0.0)["type"] == "ack"
    for _ in range(81):  # 4.05 s at 20 Hz: stop at y ~ 0
        core.tick()
        send("heartbeat")
    send("drive", v=0.0, w=0.0)
    core.tick()
    # sense until the ROI shows up
    for _ in range(200):
        core.tick()
        send("heartbeat")
        if sim.rois:
            break
    assert sim.rois, "no ROI detected while parked at the fixture"

    assert send("request_seal", roi_id="auto")["code"] == "wrong_mode"
    assert send("mode_toggle", mode="arm")["type"] == "ack"
    core.tick()
    assert send("request_seal", roi_id="auto")["type"] == "ack"
    # a second request while busy is rejected
    assert send("request_seal", roi_id="auto")["code"] == "busy"

    progress = []
    result = None
    for _ in range(SEAL_PROGRESS_STEPS + 4):
        for ev in core.tick():
            if ev["type"] == "seal_progress":
                progress.append(ev["progress"])
            elif ev["type"] == "seal_result":
                result = ev
        send("heartbeat")
    assert progress == [i / SEAL_PROGRESS_STEPS
                        for i in range(SEAL_PROGRESS_STEPS + 1)]
    assert result is not None
    assert result["coverage"] == pytest.approx(1.0)
    assert core.active_seal is None


def test_request_seal_unknown_roi():
    core = _make_core()
    s = core.open_session()
    core.handle_command(s.id, _cmd(1, "mode_toggle", mode="arm"))
    core.tick()
    r = core.handle_command(s.id, _cmd(2, "request_seal", roi_id="roi99"))
    assert r["code"] == "unknown_roi"


def test_telemetry_snapshot_fields():
    core = _make_core()
    core.open_session()
    core.tick()
    snap = core.telemetry_snapshot()
    for key in ("time", "battery_voltage", "signal_strength", "pose_estimate",
                "canister_remaining", "mode", "contact_safe", "watchdog_hold"):
        assert key in snap
    assert 0 <= snap["signal_strength"] <= 100
    assert 19.8 <= snap["battery_voltage"] <= 25.2
