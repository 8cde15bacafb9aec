"""Real-time play service: one human seat versus any policy over WebSocket.

The engine consumes the action transcript, not wall time, so tick-period
jitter never changes game outcomes. Human input is latest-wins within a tick
window with STAY as the default; a disconnected human degrades to STAY and
the episode still runs to its horizon, emitting a log that replays
identically through the CLI ``replay`` command.

Wire protocol (all frames JSON text; see docs/wire_protocol.md):

* client -> server: ``{"type": "start", "layout": ..., "seat": 0|1,
  "opponent": <policy spec>, "seed": optional int}``
  and ``{"type": "action", "action": "NORTH|SOUTH|WEST|EAST|INTERACT|STAY"}``
* server -> client: ``{"type": "frame", "tick", "score", "state", "reasoning"}``,
  ``{"type": "finished", "log_ref", "score"}``, ``{"type": "error", "code"}``
"""

from __future__ import annotations

import asyncio
import json
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from .engine import (
    ACTIONS,
    EV_DELIVERED,
    STAY,
    TraceHasher,
    event_to_dict,
    initial_state,
    state_snapshot,
    step,
)
from .layout import list_layouts, load_layout, render_layout
from .orchestrator import (
    PolicySpecError,
    SkillPlannerPolicy,
    build_policy,
    parse_policy_spec,
)

LOBBY = "lobby"
RUNNING = "running"
FINISHED = "finished"


@dataclass
class ServerConfig:
    layouts: list[str] = dc_field(default_factory=list)
    log_dir: Path = Path("play_logs")
    tick_rate: float = 5.0
    horizon: int = 400
    session_limit: int = 8

    def __post_init__(self):
        if not self.layouts:
            self.layouts = list_layouts()
        self.log_dir = Path(self.log_dir)


class AsyncPlannerDriver:
    """Keeps ticks from blocking on a slow planner: remote-backend planning
    runs in a worker thread while the current skill (or STAY) keeps acting."""

    def __init__(self, policy):
        self.policy = policy
        self._is_async = (
            isinstance(policy, SkillPlannerPolicy)
            and policy.config.backend.kind == "remote"
        )
        self._executor = ThreadPoolExecutor(max_workers=1) if self._is_async else None
        self._future = None

    def act(self, state) -> str:
        policy = self.policy
        if self._is_async and policy.needs_plan():
            if self._future is None:
                self._future = self._executor.submit(policy.plan_now, state)
            if not self._future.done():
                return STAY
            future, self._future = self._future, None
            if future.exception() is not None or policy.needs_plan():
                return STAY
        return policy.act(state)

    def observe(self, prev_state, actions, state, events) -> None:
        self.policy.observe(prev_state, actions, state, events)


@dataclass
class Session:
    id: str
    layout_name: str
    human_seat: int
    opponent_spec: str
    seed: int
    status: str = LOBBY
    pending_action: str | None = None
    connected: bool = True


def create_app(config: ServerConfig | None = None) -> FastAPI:
    config = config or ServerConfig()
    config.log_dir.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="coopkitchen")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    active_sessions: set[str] = set()

    @app.get("/layouts")
    def get_layouts():
        out = []
        for name in config.layouts:
            layout = load_layout(name)
            out.append({
                "name": name,
                "width": layout.width,
                "height": layout.height,
                "grid": render_layout(layout),
            })
        return out

    @app.get("/logs/{log_id}")
    def get_log(log_id: str):
        path = config.log_dir / f"{log_id}.json"
        if not path.exists():
            from fastapi import HTTPException

            raise HTTPException(status_code=404, detail="unknown log")
        return json.loads(path.read_text(encoding="utf-8"))

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        if len(active_sessions) >= config.session_limit:
            await _send(ws, {"type": "error", "code": "session_limit",
                             "message": "too many active sessions"})
            await ws.close()
            return
        session: Session | None = None
        ticker: asyncio.Task | None = None
        try:
            while True:
                try:
                    message = json.loads(await ws.receive_text())
                    if not isinstance(message, dict):
                        raise ValueError("message must be an object")
                except WebSocketDisconnect:
                    raise
                except Exception:
                    await _protocol_violation(ws, "malformed message")
                    return
                kind = message.get("type")
                if kind == "start":
                    if session is not None:
                        await _protocol_violation(ws, "session already started")
                        return
                    try:
                        session = _make_session(config, message)
                    except (PolicySpecError, KeyError, ValueError) as exc:
                        await _protocol_violation(ws, str(exc))
                        return
                    active_sessions.add(session.id)
                    ticker = asyncio.create_task(
                        _run_session(config, session, ws, active_sessions)
                    )
                elif kind == "action":
                    action = message.get("action")
                    if action not in ACTIONS:
                        await _protocol_violation(ws, f"unknown action {action!r}")
                        return
                    if session is not None:
                        session.pending_action = action  # latest wins
                else:
                    await _protocol_violation(ws, f"unknown message type {kind!r}")
                    return
        except WebSocketDisconnect:
            pass
        finally:
            if session is not None:
                session.connected = False
            # the ticker keeps running to horizon; a disconnected human is STAY

    async def _protocol_violation(ws: WebSocket, message: str):
        await _send(ws, {"type": "error", "code": "protocol_violation",
                         "message": message})
        try:
            await ws.close()
        except RuntimeError:
            pass

    return app


def _make_session(config: ServerConfig, message: dict) -> Session:
    layout_name = message["layout"]
    if layout_name not in config.layouts:
        raise ValueError(f"unknown layout {layout_name!r}")
    seat = message["seat"]
    if seat not in (0, 1):
        raise ValueError("seat must be 0 or 1")
    opponent = message["opponent"]
    parse_policy_spec(opponent)
    seed = int(message.get("seed", 0))
    return Session(
        id=uuid.uuid4().hex[:12],
        layout_name=layout_name,
        human_seat=seat,
        opponent_spec=opponent,
        seed=seed,
        status=RUNNING,
    )


async def _send(ws: WebSocket, payload: dict) -> bool:
    try:
        await ws.send_text(json.dumps(payload))
        return True
    except Exception:
        return False


async def _run_session(config: ServerConfig, session: Session,
                       ws: WebSocket, active_sessions: set[str]) -> None:
    layout = load_layout(session.layout_name)
    agent_seat = 1 - session.human_seat
    policy = build_policy(session.opponent_spec, layout, agent_seat, session.seed)
    driver = AsyncPlannerDriver(policy)
    state = initial_state(layout)
    hasher = TraceHasher()
    hasher.update_state(state)
    trace: list[dict] = []
    deliveries = 0
    period = 1.0 / config.tick_rate

    await _send(ws, _frame(state, policy))
    try:
        for _ in range(config.horizon):
            started = asyncio.get_event_loop().time()
            human_action = session.pending_action or STAY
            session.pending_action = None
            try:
                agent_action = driver.act(state)
            except Exception:
                agent_action = STAY
            actions = [STAY, STAY]
            actions[session.human_seat] = human_action
            actions[agent_seat] = agent_action

            next_state, reward, events = step(state, actions[0], actions[1])
            driver.observe(state, tuple(actions), next_state, events)
            deliveries += sum(1 for ev in events if ev.kind == EV_DELIVERED)
            hasher.update_step((actions[0], actions[1]), reward)
            hasher.update_state(next_state)
            trace.append({
                "tick": state.tick,
                "actions": list(actions),
                "reward": reward,
                "events": [event_to_dict(ev) for ev in events],
                "state": state_snapshot(next_state),
            })
            state = next_state
            if session.connected:
                await _send(ws, _frame(state, policy))
            elapsed = asyncio.get_event_loop().time() - started
            await asyncio.sleep(max(0.0, period - elapsed))

        session.status = FINISHED
        log = _session_log(session, layout.name, config.horizon, state.score,
                           deliveries, hasher.hexdigest(), trace, policy,
                           agent_seat)
        path = config.log_dir / f"{session.id}.json"
        path.write_text(json.dumps(log), encoding="utf-8")
        if session.connected:
            await _send(ws, {"type": "finished", "log_ref": session.id,
                             "score": state.score})
    finally:
        active_sessions.discard(session.id)


def _frame(state, policy) -> dict:
    reasoning = None
    if isinstance(policy, SkillPlannerPolicy):
        reasoning = policy.latest_reasoning()
    return {
        "type": "frame",
        "tick": state.tick,
        "score": state.score,
        "state": state_snapshot(state),
        "reasoning": reasoning,
    }


def _session_log(session: Session, layout_name: str, horizon: int, score: int,
                 deliveries: int, trace_hash: str, trace: list[dict],
                 policy, agent_seat: int) -> dict:
    policies = ["human", "human"]
    policies[agent_seat] = session.opponent_spec
    agents: list[dict] = [{"kind": "human"}, {"kind": "human"}]
    agents[agent_seat] = policy.summary()
    return {
        "layout": layout_name,
        "policies": policies,
        "seed": session.seed,
        "horizon": horizon,
        "totals": {"reward": score, "deliveries": deliveries},
        "trace_hash": trace_hash,
        "policy_faults": 0,
        "agents": agents,
        "trace": trace,
    }
