"""The gateway service: one engine ticking inside the event loop, any
number of observers, at most one choreographer.

Single-owner concurrency: the tick task and the socket handlers share one
asyncio loop, and engine calls are synchronous, so no locking is needed.
Slow clients never stall the engine — each connection has a bounded frame
queue that drops oldest-first, and the next state frame the client does
receive carries a gap notice.
"""

from __future__ import annotations

import asyncio
import contextlib
import datetime
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from ..commands import command_from_dict
from ..engine import Engine
from ..runner import SNAPSHOT_DECIMATION
from ..sessionlog import LogFooter, LogHeader, LogRecord, LogWriter, RecordKind
from .models import (
    PROTOCOL_VERSION,
    ClientCommand,
    ClientHello,
    ConfigResponse,
    FrameKind,
    GestureStatsResponse,
    HealthResponse,
    ModeStatsResponse,
    Role,
    SnapshotResponse,
    frame,
    parse_client_message,
)

CLIENT_QUEUE_FRAMES = 32


class ClientSlot:
    """Per-connection outbound frame buffer with oldest-first drop."""

    def __init__(self, client_id: int, maxsize: int = CLIENT_QUEUE_FRAMES) -> None:
        self.client_id = client_id
        self.role = Role.OBSERVER
        self.queue: asyncio.Queue[tuple[FrameKind, dict]] = asyncio.Queue(maxsize=maxsize)
        self.gap_pending = False
        self.sequence = 0

    def push(self, kind: FrameKind, payload: dict) -> None:
        while True:
            try:
                self.queue.put_nowait((kind, payload))
                return
            except asyncio.QueueFull:
                try:
                    self.queue.get_nowait()
                    self.gap_pending = True
                except asyncio.QueueEmpty:  # pragma: no cover - racy edge
                    pass

    def next_frame(self, kind: FrameKind, payload: dict) -> str:
        if kind is FrameKind.STATE and self.gap_pending:
            payload = dict(payload)
            payload["gap_before"] = True
            self.gap_pending = False
        text = frame(kind, self.sequence, payload)
        self.sequence += 1
        return text


class EngineRuntime:
    """Drives the engine at its tick rate and fans state out to clients."""

    def __init__(
        self,
        engine: Engine,
        state_rate_hz: float = 10.0,
        log_path: str | None = None,
        scenario_name: str | None = None,
    ) -> None:
        if state_rate_hz <= 0:
            raise ValueError("state_rate_hz must be positive")
        self.engine = engine
        self.state_every = max(1, round(engine.config.tick_hz / state_rate_hz))
        self.clients: dict[int, ClientSlot] = {}
        self._next_client_id = 1
        self.choreographer_id: int | None = None
        self.mode_occupancy_s: dict[str, float] = {}
        self.gesture_counts: dict[str, int] = {}
        self._writer: LogWriter | None = None
        self._last_logged_mode = engine.latest_snapshot.active_mode
        if log_path:
            self._writer = LogWriter(log_path)
            self._writer.write_header(
                LogHeader(
                    seed=engine.config.seed,
                    config=engine.config.to_dict(),
                    robots=[[p.x, p.y] for p in engine.initial_robot_positions],
                    scenario=scenario_name,
                    started_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
                    model=engine.model.to_dict() if engine.model else None,
                )
            )
            self._writer.write_record(
                LogRecord(
                    tick=0,
                    kind=RecordKind.SNAPSHOT,
                    payload=engine.latest_snapshot.to_dict(),
                )
            )

    # -- client management -------------------------------------------- #

    def register(self) -> ClientSlot:
        slot = ClientSlot(self._next_client_id)
        self._next_client_id += 1
        self.clients[slot.client_id] = slot
        return slot

    def unregister(self, slot: ClientSlot) -> None:
        self.clients.pop(slot.client_id, None)
        if self.choreographer_id == slot.client_id:
            self.choreographer_id = None

    def claim_role(self, slot: ClientSlot, wanted: Role) -> tuple[Role, str | None]:
        """Grant the requested role; the choreographer seat is first-come.
        Returns (granted role, error reason or None)."""
        if wanted is Role.CHOREOGRAPHER:
            if self.choreographer_id is None:
                self.choreographer_id = slot.client_id
                slot.role = Role.CHOREOGRAPHER
                return Role.CHOREOGRAPHER, None
            slot.role = Role.OBSERVER
            return Role.OBSERVER, "role taken"
        slot.role = Role.OBSERVER
        return Role.OBSERVER, None

    def submit_command(self, slot: ClientSlot, msg: ClientCommand) -> tuple[bool, str | None]:
        if slot.role is not Role.CHOREOGRAPHER:
            return False, "role required: only the choreographer may send commands"
        try:
            cmd = command_from_dict(msg.command)
        except ValueError as exc:
            return False, str(exc)
        ack = self.engine.apply_command(cmd)
        return ack.ok, ack.detail

    # -- engine loop ---------------------------------------------------- #

    async def run(self) -> None:
        loop = asyncio.get_running_loop()
        dt = self.engine.config.dt
        next_deadline = loop.time()
        try:
            while True:
                now = loop.time()
                if now < next_deadline:
                    await asyncio.sleep(next_deadline - now)
                    continue
                next_deadline = max(next_deadline + dt, now)  # never burst after a stall
                if not self.engine.running:
                    await asyncio.sleep(dt)
                    continue
                snapshot = self.engine.step()
                self._account(snapshot)
                self._log_tick(snapshot)
                if snapshot.tick % self.state_every == 0:
                    payload = snapshot.to_dict()
                    for slot in self.clients.values():
                        slot.push(FrameKind.STATE, payload)
        finally:
            self.close()

    def _account(self, snapshot) -> None:
        mode = snapshot.active_mode.value
        self.mode_occupancy_s[mode] = (
            self.mode_occupancy_s.get(mode, 0.0) + self.engine.config.dt
        )
        for _, gesture in snapshot.gesture_onsets:
            self.gesture_counts[gesture.value] = self.gesture_counts.get(gesture.value, 0) + 1

    def _log_tick(self, snapshot) -> None:
        if self._writer is None:
            return
        for record in self.engine.drain_records():
            self._writer.write_record(record)
        force = (
            snapshot.active_mode is not self._last_logged_mode
            or snapshot.gesture_onsets
            or not self.engine.running
        )
        if force or snapshot.tick % SNAPSHOT_DECIMATION == 0:
            self._writer.write_record(
                LogRecord(tick=snapshot.tick, kind=RecordKind.SNAPSHOT, payload=snapshot.to_dict())
            )
        self._last_logged_mode = snapshot.active_mode

    def close(self) -> None:
        if self._writer is not None:
            snapshot = self.engine.latest_snapshot
            self._writer.write_record(
                LogRecord(tick=snapshot.tick, kind=RecordKind.SNAPSHOT, payload=snapshot.to_dict())
            )
            self._writer.write_footer(
                LogFooter(final_tick=snapshot.tick, final_state_hash=snapshot.hash())
            )
            self._writer.close()
            self._writer = None


def create_app(runtime: EngineRuntime, ui_dir: str | None = None) -> FastAPI:
    @contextlib.asynccontextmanager
    async def lifespan(_: FastAPI):
        task = asyncio.create_task(runtime.run())
        try:
            yield
        finally:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(title="flocksim gateway", version="0.1.0", lifespan=lifespan)
    app.state.runtime = runtime

    @app.get("/healthz", response_model=HealthResponse)
    def healthz() -> HealthResponse:
        engine = runtime.engine
        return HealthResponse(
            status="error" if engine.error else "ok",
            tick=engine.tick,
            running=engine.running,
            error=engine.error,
        )

    @app.get("/config", response_model=ConfigResponse)
    def config() -> ConfigResponse:
        return ConfigResponse(
            protocol_version=PROTOCOL_VERSION,
            config=runtime.engine.config.to_dict(),
            robots=[[p.x, p.y] for p in runtime.engine.initial_robot_positions],
        )

    @app.get("/snapshot", response_model=SnapshotResponse)
    def snapshot() -> SnapshotResponse:
        return SnapshotResponse(snapshot=runtime.engine.latest_snapshot.to_dict())

    @app.get("/stats/modes", response_model=ModeStatsResponse)
    def mode_stats() -> ModeStatsResponse:
        return ModeStatsResponse(occupancy_s=dict(runtime.mode_occupancy_s))

    @app.get("/stats/gestures", response_model=GestureStatsResponse)
    def gesture_stats() -> GestureStatsResponse:
        return GestureStatsResponse(counts=dict(runtime.gesture_counts))

    @app.websocket("/ws")
    async def websocket_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        slot = runtime.register()
        try:
            await _serve_connection(runtime, websocket, slot)
        except WebSocketDisconnect:
            pass
        finally:
            runtime.unregister(slot)

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="console")

    return app


async def _serve_connection(
    runtime: EngineRuntime, websocket: WebSocket, slot: ClientSlot
) -> None:
    """Handshake, then pump frames out of the slot queue while commands
    come in. The engine is never awaited on: frames go through the queue."""
    raw = await websocket.receive_text()
    try:
        message = parse_client_message(raw)
    except ValueError as exc:
        await websocket.send_text(slot.next_frame(FrameKind.ERROR, {"reason": str(exc)}))
        await websocket.close()
        return
    if not isinstance(message, ClientHello):
        await websocket.send_text(
            slot.next_frame(FrameKind.ERROR, {"reason": "expected a hello message first"})
        )
        await websocket.close()
        return
    if message.hello.protocol_version != PROTOCOL_VERSION:
        await websocket.send_text(
            slot.next_frame(
                FrameKind.ERROR,
                {"reason": f"protocol version {message.hello.protocol_version} unsupported"},
            )
        )
        await websocket.close()
        return
    granted, problem = runtime.claim_role(slot, message.hello.role)
    if problem:
        await websocket.send_text(slot.next_frame(FrameKind.ERROR, {"reason": problem}))
    await websocket.send_text(
        slot.next_frame(
            FrameKind.HELLO,
            {
                "protocol_version": PROTOCOL_VERSION,
                "role": granted.value,
                "config": runtime.engine.config.to_dict(),
                "state_interval_ticks": runtime.state_every,
            },
        )
    )
    slot.push(FrameKind.STATE, runtime.engine.latest_snapshot.to_dict())

    async def sender() -> None:
        while True:
            kind, payload = await slot.queue.get()
            await websocket.send_text(slot.next_frame(kind, payload))

    async def receiver() -> None:
        while True:
            raw = await websocket.receive_text()
            try:
                msg = parse_client_message(raw)
            except ValueError as exc:
                slot.push(FrameKind.ERROR, {"reason": str(exc)})
                continue
            if isinstance(msg, ClientHello):
                slot.push(FrameKind.ERROR, {"reason": "already connected; hello not allowed"})
                continue
            ok, detail = runtime.submit_command(slot, msg)
            if ok:
                slot.push(FrameKind.ACK, {"request_id": msg.request_id, "detail": detail})
            else:
                slot.push(
                    FrameKind.ERROR, {"request_id": msg.request_id, "reason": detail}
                )

    send_task = asyncio.create_task(sender())
    try:
        await receiver()
    finally:
        send_task.cancel()
        with contextlib.suppress(asyncio.CancelledError):
            await send_task


def serve(
    engine: Engine,
    host: str = "127.0.0.1",
    port: int = 8000,
    state_rate_hz: float = 10.0,
    log_path: str | None = None,
    scenario_name: str | None = None,
    ui_dir: str | None = None,
) -> None:
    """Run the gateway until interrupted (blocking)."""
    import uvicorn

    runtime = EngineRuntime(
        engine, state_rate_hz=state_rate_hz, log_path=log_path, scenario_name=scenario_name
    )
    app = create_app(runtime, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
