"""Multi-client session service.

Each session owns one engine world and a single-writer tick loop paced at
the scenario's tick_hz. Any number of clients share the session: commands
from HTTP or stream frames funnel into one ordered queue (server-assigned
seq), and every engine tick fans out the same envelope sequence to every
connected client. Slow clients are dropped after a 64-envelope backlog
rather than stalling the session.

Envelope kinds: hello (per-client snapshot on join), snapshot (per tick),
event, command_ack, command_reject. Envelope seq is strictly increasing
per session; the hello carries the latest issued seq without consuming
one, so a client's stream is gap-free from its join point.
"""

from __future__ import annotations

import asyncio
import enum
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, HTTPException, WebSocket
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .engine import (
    Command,
    WorldState,
    command_from_obj,
    init_world,
    tick,
    world_snapshot,
)
from .errors import MalformedCommand, NotJoined, ScenarioError, UnknownSession
from .scenario import Mode, default_scenario, scenario_digest, scenario_from_obj

CLIENT_QUEUE_LIMIT = 64

#: Bytes of unsent frame data tolerated on a client's socket before its
#: stream pump stops consuming the envelope queue (letting the queue-limit
#: drop fire). ASGI servers buffer writes in process memory without
#: backpressure, so delivery progress has to be watched explicitly.
TRANSPORT_BACKLOG_LIMIT = 256 * 1024
_DRAIN_POLL_SECONDS = 0.02
#: How long a dropped client gets to receive its close frame before the
#: connection is aborted outright (a stalled reader never drains the
#: close, which would otherwise leak the handler and its buffers).
ABORT_GRACE_SECONDS = 0.5

#: WebSocket close codes (private-range, mirrored in the protocol reference)
CLOSE_UNKNOWN_SESSION = 4404
CLOSE_DUPLICATE_CLIENT = 4400
CLOSE_SLOW_CLIENT = 4408
CLOSE_SESSION_ENDED = 4410


def _transport_of(websocket: WebSocket):
    """Underlying asyncio transport, or None when the server hides it.

    The ASGI spec exposes no delivery feedback, so the write-buffer size is
    read straight off the transport; it is found by walking the bound
    ``send`` callable's closure (uvicorn wraps it in plain functions).
    Returning None degrades gracefully: slow clients are then caught only
    by the server's own keepalive timeout.
    """
    queue: list = [websocket._send]
    seen: set[int] = set()
    while queue:
        fn = queue.pop()
        if id(fn) in seen or len(seen) > 64:
            continue
        seen.add(id(fn))
        owner = getattr(fn, "__self__", None)
        transport = getattr(owner, "transport", None)
        if transport is not None and hasattr(transport, "get_write_buffer_size"):
            return transport
        for cell in getattr(fn, "__closure__", None) or ():
            try:
                value = cell.cell_contents
            except ValueError:
                continue
            if hasattr(value, "transport"):
                transport = value.transport
                if hasattr(transport, "get_write_buffer_size"):
                    return transport
            if callable(value):
                queue.append(value)
    return None


async def _send_when_draining(websocket: WebSocket, transport, frame: str) -> None:
    """Send one frame, then hold until the peer is actually consuming."""
    await websocket.send_text(frame)
    if transport is None:
        return
    while transport.get_write_buffer_size() > TRANSPORT_BACKLOG_LIMIT:
        await asyncio.sleep(_DRAIN_POLL_SECONDS)


class EnvelopeKind(str, enum.Enum):
    HELLO = "hello"
    SNAPSHOT = "snapshot"
    EVENT = "event"
    COMMAND_ACK = "command_ack"
    COMMAND_REJECT = "command_reject"


@dataclass
class ClientLink:
    id: str
    queue: asyncio.Queue = field(default_factory=lambda: asyncio.Queue(maxsize=CLIENT_QUEUE_LIMIT))
    websocket: WebSocket | None = None


@dataclass
class SessionRuntime:
    """One scenario instance shared by all connected clients."""

    id: str
    world: WorldState
    seq: int = 0  # last issued envelope seq
    command_seq: int = 0
    pending: list[Command] = field(default_factory=list)
    clients: dict[str, ClientLink] = field(default_factory=dict)
    latest_snapshot: dict = field(default_factory=dict)
    completed: bool = False
    tick_task: asyncio.Task | None = None
    closed: bool = False

    def envelope(self, kind: EnvelopeKind, payload: dict) -> str:
        self.seq += 1
        return json.dumps({
            "seq": self.seq,
            "kind": kind.value,
            "sim_time": self.world.sim_time,
            "payload": payload,
        })

    def broadcast(self, frame: str) -> None:
        for client in list(self.clients.values()):
            try:
                client.queue.put_nowait(frame)
            except asyncio.QueueFull:
                self.drop_client(client, CLOSE_SLOW_CLIENT, "slow client")

    def drop_client(self, client: ClientLink, code: int, reason: str) -> None:
        self.clients.pop(client.id, None)
        if client.websocket is not None:
            loop = asyncio.get_running_loop()
            loop.create_task(_close_quietly(client.websocket, code, reason))
            transport = _transport_of(client.websocket)
            if transport is not None:
                # A reader that stopped draining never receives the close
                # frame; cut the connection after a short grace so the
                # stream handler and its buffered frames get released.
                loop.call_later(ABORT_GRACE_SECONDS, transport.abort)

    def submit(self, obj, issued_by: str) -> Command:
        """Parse, assign the next command seq, and enqueue for the tick loop."""
        cmd = command_from_obj(obj, seq=self.command_seq, issued_by=issued_by)
        self.command_seq += 1
        self.pending.append(cmd)
        return cmd

    def max_ticks(self) -> int:
        cfg = self.world.scenario.mode_config
        return round(cfg.time_limit * cfg.tick_hz)


async def _close_quietly(websocket: WebSocket, code: int, reason: str) -> None:
    try:
        await websocket.close(code=code, reason=reason)
    except Exception:
        pass


def run_session_step(session: SessionRuntime) -> None:
    """One engine tick plus envelope fan-out; synchronous, hence atomic
    with respect to every other coroutine on the loop."""
    drained, session.pending = session.pending, []
    result = tick(session.world, drained)

    frames = []
    for outcome in result.outcomes:
        payload = {"command": outcome.command.to_obj(), "ok": outcome.ok}
        if outcome.ok:
            frames.append(session.envelope(EnvelopeKind.COMMAND_ACK, payload))
        else:
            payload["error"] = outcome.error
            payload["message"] = outcome.message
            frames.append(session.envelope(EnvelopeKind.COMMAND_REJECT, payload))
    for event in result.events:
        frames.append(session.envelope(EnvelopeKind.EVENT, event))

    if not session.completed and not session.world.unknown_targets():
        session.world.paused = True
        session.completed = True
        frames.append(session.envelope(
            EnvelopeKind.EVENT, {"type": "run_completed", "reason": "all_classified"}))
    elif not session.completed and session.world.tick_index >= session.max_ticks():
        session.world.paused = True
        session.completed = True
        frames.append(session.envelope(
            EnvelopeKind.EVENT, {"type": "run_completed", "reason": "time_limit"}))

    session.latest_snapshot = world_snapshot(session.world)
    frames.append(session.envelope(EnvelopeKind.SNAPSHOT, session.latest_snapshot))
    for frame in frames:
        session.broadcast(frame)


async def session_loop(session: SessionRuntime) -> None:
    """Paced single writer: wall-clock scheduled at tick_hz, drift-free."""
    loop = asyncio.get_running_loop()
    dt = session.world.dt
    deadline = loop.time()
    while not session.closed:
        run_session_step(session)
        deadline += dt
        delay = deadline - loop.time()
        if delay <= 0.0:
            deadline = loop.time()  # fell behind; don't try to catch up
            await asyncio.sleep(0)
        else:
            await asyncio.sleep(delay)


def _http_error(status: int, exc: Exception) -> HTTPException:
    detail: dict = {"error": type(exc).__name__, "message": str(exc)}
    path = getattr(exc, "path", None)
    if path is not None:
        detail["path"] = path
    return HTTPException(status_code=status, detail=detail)


def create_app(static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="sarswarm session service")
    sessions: dict[str, SessionRuntime] = {}
    ids = itertools.count(1)
    app.state.sessions = sessions

    def get_session(session_id: str) -> SessionRuntime:
        session = sessions.get(session_id)
        if session is None:
            raise _http_error(404, UnknownSession(f"unknown session {session_id!r}"))
        return session

    @app.post("/sessions")
    async def create_session(body: Any = Body(default=None)):
        try:
            if body:
                scenario = scenario_from_obj(body)
            else:
                scenario = default_scenario()
        except ScenarioError as exc:
            raise _http_error(400, exc) from None
        world = init_world(scenario)
        world.paused = True  # sessions start paused; Resume starts the run
        session = SessionRuntime(id=f"sess-{next(ids)}", world=world)
        session.latest_snapshot = world_snapshot(world)
        session.tick_task = asyncio.create_task(session_loop(session))
        sessions[session.id] = session
        return {"session": session.id, "digest": scenario_digest(scenario),
                "mode": world.mode.value, "paused": world.paused}

    @app.get("/sessions")
    async def list_sessions():
        return {
            "sessions": [
                {
                    "id": s.id,
                    "clients": sorted(s.clients),
                    "sim_time": s.world.sim_time,
                    "paused": s.world.paused,
                    "mode": s.world.mode.value,
                }
                for s in sessions.values()
            ]
        }

    @app.get("/sessions/{session_id}/state")
    async def get_state(session_id: str):
        return get_session(session_id).latest_snapshot

    @app.post("/sessions/{session_id}/commands")
    async def post_command(session_id: str, body: Any = Body(default=None)):
        session = get_session(session_id)
        if not isinstance(body, dict):
            raise _http_error(400, MalformedCommand("body must be a JSON object"))
        client_id = body.get("client")
        if not isinstance(client_id, str) or client_id not in session.clients:
            raise _http_error(403, NotJoined(
                f"client {client_id!r} has not joined session {session_id!r}"))
        try:
            cmd = session.submit(body.get("command"), issued_by=client_id)
        except MalformedCommand as exc:
            raise _http_error(400, exc) from None
        return {"queued": True, "seq": cmd.seq}

    @app.post("/sessions/{session_id}/mode")
    async def post_mode(session_id: str, body: Any = Body(default=None)):
        session = get_session(session_id)
        if not isinstance(body, dict):
            raise _http_error(400, MalformedCommand("body must be a JSON object"))
        mode_name = body.get("mode")
        try:
            Mode(mode_name)
        except ValueError:
            raise _http_error(400, MalformedCommand(f"unknown mode {mode_name!r}")) from None
        cmd = session.submit({"type": "set_mode", "mode": mode_name},
                             issued_by=body.get("client") or "http")
        return {"queued": True, "seq": cmd.seq}

    @app.delete("/sessions/{session_id}")
    async def close_session(session_id: str):
        session = get_session(session_id)
        session.closed = True
        if session.tick_task is not None:
            session.tick_task.cancel()
        for client in list(session.clients.values()):
            session.drop_client(client, CLOSE_SESSION_ENDED, "session closed")
        del sessions[session_id]
        return JSONResponse({"closed": session_id})

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str, client: str = ""):
        session = sessions.get(session_id)
        await websocket.accept()
        if session is None:
            await _close_quietly(websocket, CLOSE_UNKNOWN_SESSION,
                                 f"unknown session {session_id!r}")
            return
        client_id = client or f"client-{id(websocket):x}"
        if client_id in session.clients:
            await _close_quietly(websocket, CLOSE_DUPLICATE_CLIENT,
                                 f"client id {client_id!r} already connected")
            return

        link = ClientLink(id=client_id, websocket=websocket)
        # hello + registration happen without an await between them, so the
        # streamed envelopes continue gap-free from the hello's seq
        hello = json.dumps({
            "seq": session.seq,
            "kind": EnvelopeKind.HELLO.value,
            "sim_time": session.world.sim_time,
            "payload": {"client": client_id, "session": session.id,
                        "snapshot": session.latest_snapshot},
        })
        session.clients[client_id] = link

        async def pump_out() -> None:
            transport = _transport_of(websocket)
            await _send_when_draining(websocket, transport, hello)
            while True:
                frame = await link.queue.get()
                await _send_when_draining(websocket, transport, frame)

        async def pump_in() -> None:
            while True:
                text = await websocket.receive_text()
                try:
                    obj = json.loads(text)
                except ValueError as exc:
                    raise MalformedCommand(f"command frame is not JSON: {exc}") from None
                session.submit(obj, issued_by=client_id)

        outbound = asyncio.create_task(pump_out())
        inbound = asyncio.create_task(pump_in())
        try:
            done, pending = await asyncio.wait(
                {outbound, inbound}, return_when=asyncio.FIRST_COMPLETED)
            for task in pending:
                task.cancel()
            for task in done:
                exc = task.exception()
                if isinstance(exc, MalformedCommand):
                    await _close_quietly(websocket, CLOSE_DUPLICATE_CLIENT, str(exc))
        except asyncio.CancelledError:
            outbound.cancel()
            inbound.cancel()
            raise
        finally:
            session.clients.pop(client_id, None)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def serve(host: str = "127.0.0.1", port: int = 8000,
          static_dir: str | Path | None = None) -> None:
    """Blocking uvicorn runner used by the CLI's serve command."""
    import uvicorn

    uvicorn.run(create_app(static_dir=static_dir), host=host, port=port, log_level="warning")
