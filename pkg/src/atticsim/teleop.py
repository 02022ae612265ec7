"""Teleoperation control plane, transport-agnostic.

Validates ordered operator commands (seq ordering, role, mode gating,
limits), funnels them into a single queue consumed by the simulation
stepper, enforces the safety watchdog, and assembles telemetry and seal
progress events.  The socket server in server.py is a thin transport over
this core.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .protocol import (CONTROL_TYPES, MODE_REQUIRED, CommandEnvelope,
                       ProtocolError)
from .robot import BaseCommand
from .sim import Simulation

DEFAULT_WATCHDOG_TIMEOUT_MS = 500.0
SEAL_PROGRESS_STEPS = 4


@dataclass
class Session:
    id: str
    role: str  # driver | observer
    last_seq: int = -1
    last_heartbeat_ms: float = 0.0
    selected_feed: str = "rgb"


@dataclass
class ActiveSeal:
    roi_id: str
    progress_emitted: int = 0
    result_event: dict | None = None


class TeleopCore:
    def __init__(self, sim: Simulation,
                 watchdog_timeout_ms: float = DEFAULT_WATCHDOG_TIMEOUT_MS):
        self.sim = sim
        self.watchdog_timeout_ms = watchdog_timeout_ms
        self.sessions: dict[str, Session] = {}
        self.driver_id: str | None = None
        self._ids = itertools.count(1)
        self.queue: list[CommandEnvelope] = []
        self.active_seal: ActiveSeal | None = None
        self.last_driver_activity_ms: float = 0.0
        self.events_out: list[dict] = []

    # -- sessions -----------------------------------------------------------

    def open_session(self, want_driver: bool = True) -> Session:
        sid = f"s{next(self._ids)}"
        role = "driver" if want_driver and self.driver_id is None else "observer"
        session = Session(id=sid, role=role,
                          last_heartbeat_ms=self.sim.state.time * 1000.0)
        self.sessions[sid] = session
        if role == "driver":
            self.driver_id = sid
        return session

    def close_session(self, session_id: str) -> None:
        self.sessions.pop(session_id, None)
        if self.driver_id == session_id:
            self.driver_id = None
            self._hold()

    # -- command path -------------------------------------------------------

    def handle_command(self, session_id: str, message: dict) -> dict:
        """Validate and enqueue one envelope; returns exactly one ack/error."""
        session = self.sessions.get(session_id)
        if session is None:
            return _err(message.get("seq"), "no_session", "session not open")
        try:
            env = CommandEnvelope.from_dict(message)
        except ProtocolError as exc:
            return _err(message.get("seq"), exc.code, str(exc))

        if env.seq <= session.last_seq:
            return _err(env.seq, "out_of_order",
                        f"seq {env.seq} not greater than {session.last_seq}")
        session.last_seq = env.seq

        if env.type in CONTROL_TYPES and session.role != "driver":
            return _err(env.seq, "not_driver",
                        "observer sessions cannot send control commands")

        required = MODE_REQUIRED.get(env.type)
        if required is not None and self.sim.mode != required:
            return _err(env.seq, "wrong_mode",
                        f"{env.type} requires mode {required!r}, "
                        f"current mode is {self.sim.mode!r}")

        if env.type == "drive":
            geom = self.sim.geometry
            if abs(float(env.data["v"])) > geom.max_linear_velocity + 1e-12 \
                    or abs(float(env.data["w"])) > geom.max_angular_velocity + 1e-12:
                return _err(env.seq, "limit", "drive command over limits")
        if env.type == "flipper":
            if abs(float(env.data["rate"])) > self.sim.geometry.max_flipper_rate + 1e-12:
                return _err(env.seq, "limit", "flipper rate over limit")
        if env.type == "request_seal":
            if self.active_seal is not None:
                return _err(env.seq, "busy", "a seal is already in progress")
            roi = self.sim.find_roi(str(env.data["roi_id"]))
            if roi is None:
                return _err(env.seq, "unknown_roi",
                            f"no ROI {env.data['roi_id']!r}")
            self.active_seal = ActiveSeal(roi_id=str(env.data["roi_id"]))

        now_ms = self.sim.state.time * 1000.0
        if session.role == "driver":
            self.last_driver_activity_ms = now_ms
            session.last_heartbeat_ms = now_ms
            if self.sim.state.watchdog_hold:
                self.sim.state.watchdog_hold = False

        if env.type == "estop":
            # bypasses the queue: takes effect immediately
            self.sim.apply_command(env)
        elif env.type != "heartbeat":
            self.queue.append(env)
        return {"type": "ack", "seq": env.seq}

    # -- tick integration ---------------------------------------------------

    def tick(self) -> list[dict]:
        """Run the watchdog, apply queued commands, step once, emit events."""
        self.safety_watchdog(self.sim.state.time * 1000.0)
        commands, self.queue = self.queue, []
        if self.sim.state.watchdog_hold:
            commands = [c for c in commands if c.type not in ("drive", "flipper")]
        events = list(self.sim.step(commands))
        events.extend(self._pump_seal(events))
        self.events_out = events
        return events

    def _pump_seal(self, sim_events: list[dict]) -> list[dict]:
        out = []
        seal = self.active_seal
        if seal is None:
            return out
        if seal.result_event is None:
            for ev in sim_events:
                if ev["type"] == "seal_result" or ev["type"] == "seal_error":
                    seal.result_event = ev
        step = seal.progress_emitted
        if step <= SEAL_PROGRESS_STEPS:
            out.append({"type": "seal_progress", "roi_id": seal.roi_id,
                        "progress": step / SEAL_PROGRESS_STEPS})
            seal.progress_emitted += 1
        else:
            if seal.result_event is not None \
                    and seal.result_event not in sim_events:
                out.append(seal.result_event)
            self.active_seal = None
        return out

    def safety_watchdog(self, now_ms: float) -> None:
        """Zero motion and release the trigger on driver silence."""
        if self.driver_id is None:
            if _moving(self.sim.active_command):
                self._hold()
            return
        if now_ms - self.last_driver_activity_ms > self.watchdog_timeout_ms:
            self._hold()

    def _hold(self) -> None:
        self.sim.active_command = BaseCommand()
        self.sim.flipper_rates = [0.0, 0.0, 0.0, 0.0]
        self.sim.state.trigger_on = False
        self.sim.state.watchdog_hold = True

    def telemetry_snapshot(self) -> dict:
        snap = self.sim.telemetry()
        if self.active_seal is not None:
            snap["active_seal"] = {
                "roi_id": self.active_seal.roi_id,
                "progress": min(1.0, self.active_seal.progress_emitted
                                / SEAL_PROGRESS_STEPS),
            }
        return snap


def _moving(cmd: BaseCommand) -> bool:
    return cmd.linear_velocity != 0.0 or cmd.angular_velocity != 0.0 \
        or any(r != 0.0 for r in cmd.flipper_rates)


def _err(seq, code: str, message: str) -> dict:
    return {"type": "error", "seq": seq, "code": code, "message": message}
