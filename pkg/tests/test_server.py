import json
import math
import struct
import time

import pytest
from fastapi.testclient import TestClient

from atticsim import scenarios
from atticsim.server import STREAM_IDS, create_app
from atticsim.sim import Scenario, Simulation


def _make_app(frame_stride=0, sense="both"):
    doc = {
        "schema_version": 1,
        "scene": scenarios.base_scene(),
        "robot": {"preset": "paris1"},
        "initial_pose": [0.0, -0.9, math.pi / 2.0],
        "seed": 0,
        "duration_s": 60.0,
        "tick_rate_hz": 50.0,
        "frame_stride": frame_stride,
        "sense": sense,
        "thermal_noise_sigma": 0.0,
    }
    sim = Simulation(Scenario.from_document(doc))
    return create_app(sim), sim


def test_http_endpoints():
    app, sim = _make_app()
    with TestClient(app) as client:
        health = client.get("/healthz").json()
        assert health["status"] == "ok"

        scene = client.get("/scene").json()
        assert scene["schema_version"] == 1
        assert scene["hatch"]["width_m"] == pytest.approx(0.57)

        rois = client.get("/rois").json()
        assert rois == {"schema_version": 1, "rois": []}

        ply = client.get("/map.ply").text
        assert ply.startswith("ply\nformat ascii 1.0")


def test_ws_welcome_and_roles():
    app, sim = _make_app()
    with TestClient(app) as client:
        with client.websocket_connect("/ws") as ws1:
            hello1 = json.loads(ws1.receive_text())
            assert hello1["type"] == "welcome"
            assert hello1["role"] == "driver"
            with client.websocket_connect("/ws") as ws2:
                hello2 = json.loads(ws2.receive_text())
                assert hello2["role"] == "observer"


def test_ws_ack_and_errors():
    app, sim = _make_app()
    with TestClient(app) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()  # welcome
            ws.send_text(json.dumps({"seq": 1, "type": "drive",
                                     "data": {"v": 0.1, "w": 0.0}}))
            reply = _next_json(ws, "ack", "error")
            assert reply == {"type": "ack", "seq": 1}

            ws.send_text("this is not json")
            reply = _next_json(ws, "ack", "error")
            assert reply["type"] == "error"
            assert reply["code"] == "malformed"

            ws.send_text(json.dumps({"seq": 1, "type": "heartbeat"}))
            reply = _next_json(ws, "ack", "error")
            assert reply["code"] == "out_of_order"


def _next_json(ws, *types, tries=50):
    """Skip telemetry/frame broadcasts until one of the wanted types."""
    for _ in range(tries):
        msg = ws.receive()
        if "text" not in msg:
            continue
        obj = json.loads(msg["text"])
        if obj.get("type") in types:
            return obj
    raise AssertionError(f"no message of type {types}")


def test_ws_telemetry_broadcast():
    app, sim = _make_app()
    with TestClient(app) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            snap = _next_json(ws, "telemetry", tries=200)
            data = snap["data"]
            assert "battery_voltage" in data
            assert "pose_estimate" in data
            assert data["mode"] == "drive"


def test_ws_frame_binary_header():
    app, sim = _make_app(frame_stride=5, sense="rgbd")
    with TestClient(app) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            payload = None
            for _ in range(400):
                msg = ws.receive()
                if "bytes" in msg and msg["bytes"] is not None:
                    payload = msg["bytes"]
                    break
            assert payload is not None, "no binary frame received"
            stream, ts_ms, w, h = struct.unpack("<IIII", payload[:16])
            assert stream in STREAM_IDS.values()
            assert payload[16:24].startswith(b"\x89PNG\r\n")
            assert (w, h) in {(160, 120), (80, 60)}


def test_ws_drive_moves_robot():
    app, sim = _make_app()
    with TestClient(app) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            y0 = sim.state.y
            seq = 0
            deadline = time.monotonic() + 5.0
            while time.monotonic() < deadline and sim.state.y - y0 < 0.01:
                seq += 1
                ws.send_text(json.dumps({"seq": seq, "type": "drive",
                                         "data": {"v": 0.1, "w": 0.0}}))
                _next_json(ws, "ack", "error")
                time.sleep(0.02)
            assert sim.state.y - y0 >= 0.01
