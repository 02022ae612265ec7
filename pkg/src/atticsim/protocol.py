"""Operator command envelopes and validation, shared by the live socket
service and scripted mission execution.

Wire form: JSON objects {"seq": int, "sent_at": ms, "type": str, "data": {...}}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

COMMAND_TYPES = {
    "drive", "flipper", "arm_jog", "arm_goto", "trigger", "mode_toggle",
    "request_seal", "swap_canister", "estop", "heartbeat",
}

# commands that require the driver role
CONTROL_TYPES = COMMAND_TYPES - {"heartbeat"}

# mode gating: which mode each command requires (None = any)
MODE_REQUIRED = {
    "drive": "drive",
    "flipper": "drive",
    "arm_jog": "arm",
    "arm_goto": "arm",
    "trigger": "arm",
    "request_seal": "arm",
}


class ProtocolError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class CommandEnvelope:
    seq: int
    type: str
    data: dict = field(default_factory=dict)
    sent_at: float = 0.0

    def to_dict(self) -> dict:
        return {"seq": self.seq, "sent_at": self.sent_at,
                "type": self.type, "data": self.data}

    @classmethod
    def from_dict(cls, obj: dict) -> "CommandEnvelope":
        if not isinstance(obj, dict):
            raise ProtocolError("malformed", "envelope must be a JSON object")
        if "seq" not in obj or not isinstance(obj["seq"], int):
            raise ProtocolError("malformed", "envelope requires an integer seq")
        kind = obj.get("type")
        if kind not in COMMAND_TYPES:
            raise ProtocolError("unknown_type", f"unknown command type {kind!r}")
        data = obj.get("data", {})
        if not isinstance(data, dict):
            raise ProtocolError("malformed", "data must be an object")
        validate_payload(kind, data)
        return cls(seq=obj["seq"], type=kind, data=data,
                   sent_at=float(obj.get("sent_at", 0.0)))


def validate_payload(kind: str, data: dict) -> None:
    def need(*keys):
        for k in keys:
            if k not in data:
                raise ProtocolError("malformed", f"{kind} requires {k!r}")

    if kind == "drive":
        need("v", "w")
    elif kind == "flipper":
        need("index", "rate")
        if not 0 <= int(data["index"]) <= 3:
            raise ProtocolError("malformed", "flipper index must be 0..3")
    elif kind == "arm_jog":
        need("joint", "delta")
        if not 0 <= int(data["joint"]) <= 4:
            raise ProtocolError("malformed", "arm joint must be 0..4")
    elif kind == "arm_goto":
        need("position", "approach")
    elif kind == "trigger":
        need("on")
    elif kind == "mode_toggle":
        need("mode")
        if data["mode"] not in ("drive", "arm"):
            raise ProtocolError("malformed", "mode must be 'drive' or 'arm'")
    elif kind == "request_seal":
        need("roi_id")
