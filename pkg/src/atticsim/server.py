"""WebSocket + HTTP transport for the teleop core.

Endpoints:
  WS  /ws        text JSON envelopes in, JSON events out; binary camera
                 frames with a 16-byte header (stream id, timestamp ms,
                 width, height as u32 LE) followed by a PNG payload.
  GET /scene     active scene document
  GET /map.ply   voxel map as ASCII PLY
  GET /rois      current ROI list (JSON)
  GET /healthz
"""

from __future__ import annotations

import asyncio
import io
import json
import struct
from contextlib import asynccontextmanager

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse

from .perception import rois_to_document
from .sim import Simulation
from .teleop import DEFAULT_WATCHDOG_TIMEOUT_MS, TeleopCore
from .world import scene_to_document

STREAM_IDS = {"rgb": 1, "thermal": 2, "depth": 3}
TELEMETRY_EVERY_TICKS = 5  # 10 Hz at the default 50 Hz tick rate


def _frame_message(stream: str, timestamp: float, image: np.ndarray) -> bytes:
    from PIL import Image

    if image.ndim == 2:  # depth/thermal scaled into 16-bit gray
        lo, hi = float(np.min(image)), float(np.max(image))
        span = (hi - lo) if hi > lo else 1.0
        arr = ((image - lo) / span * 65535.0).astype(np.uint16)
        pil = Image.fromarray(arr)
    else:
        pil = Image.fromarray(image, mode="RGB")
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    payload = buf.getvalue()
    header = struct.pack("<IIII", STREAM_IDS.get(stream, 0),
                         int(timestamp * 1000.0), pil.width, pil.height)
    return header + payload


class _Client:
    def __init__(self, ws: WebSocket, session_id: str):
        self.ws = ws
        self.session_id = session_id
        self.queue: asyncio.Queue = asyncio.Queue(maxsize=64)

    def push(self, message) -> None:
        # drop the stalest message rather than block the stepper
        if self.queue.full():
            try:
                self.queue.get_nowait()
            except asyncio.QueueEmpty:
                pass
        try:
            self.queue.put_nowait(message)
        except asyncio.QueueFull:
            pass


def create_app(sim: Simulation,
               watchdog_timeout_ms: float = DEFAULT_WATCHDOG_TIMEOUT_MS,
               real_time: bool = True) -> FastAPI:
    core = TeleopCore(sim, watchdog_timeout_ms=watchdog_timeout_ms)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(stepper())
        app.state.stepper_task = task
        try:
            yield
        finally:
            task.cancel()

    app = FastAPI(lifespan=lifespan)
    app.state.core = core
    app.state.sim = sim
    clients: dict[str, _Client] = {}

    def broadcast(message) -> None:
        for client in list(clients.values()):
            client.push(message)

    async def stepper() -> None:
        dt = sim.dt
        tick = 0
        last_roi_count = -1
        while True:
            events = core.tick()
            tick += 1
            for ev in events:
                if ev["type"] in ("seal_progress", "seal_result", "seal_error"):
                    broadcast({"type": ev["type"], **{k: v for k, v in ev.items()
                                                      if k != "type"}})
            if tick % TELEMETRY_EVERY_TICKS == 0:
                broadcast({"type": "telemetry", "data": core.telemetry_snapshot()})
            if len(sim.rois) != last_roi_count:
                last_roi_count = len(sim.rois)
                broadcast({"type": "roi_list", "data": rois_to_document(sim.rois)})
            if sim.last_frames:
                for stream, (ts, img) in list(sim.last_frames.items()):
                    broadcast(_frame_message(stream, ts, img))
                sim.last_frames = {}
            if real_time:
                await asyncio.sleep(dt)
            else:
                await asyncio.sleep(0)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session = core.open_session(want_driver=True)
        client = _Client(ws, session.id)
        clients[session.id] = client
        await ws.send_text(json.dumps({"type": "welcome", "session": session.id,
                                       "role": session.role}))

        async def sender():
            while True:
                msg = await client.queue.get()
                if isinstance(msg, bytes):
                    await ws.send_bytes(msg)
                else:
                    await ws.send_text(json.dumps(msg))

        send_task = asyncio.create_task(sender())
        try:
            while True:
                text = await ws.receive_text()
                try:
                    obj = json.loads(text)
                except json.JSONDecodeError:
                    await ws.send_text(json.dumps(
                        {"type": "error", "seq": None, "code": "malformed",
                         "message": "not valid JSON"}))
                    continue
                reply = core.handle_command(session.id, obj)
                await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            send_task.cancel()
            clients.pop(session.id, None)
            core.close_session(session.id)

    @app.get("/scene")
    async def scene():
        return JSONResponse(scene_to_document(sim.scene))

    @app.get("/rois")
    async def rois():
        return JSONResponse(rois_to_document(sim.rois))

    @app.get("/map.ply")
    async def map_ply():
        from .export import voxel_map_ply
        text = voxel_map_ply(sim.vmap)
        return PlainTextResponse(text, media_type="text/plain")

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "tick": sim.tick}

    return app


def serve(sim: Simulation, host: str, port: int,
          watchdog_timeout_ms: float = DEFAULT_WATCHDOG_TIMEOUT_MS) -> None:
    import uvicorn

    app = create_app(sim, watchdog_timeout_ms=watchdog_timeout_ms)
    uvicorn.run(app, host=host, port=port, log_level="warning")
