"""HTTP training service: live tutoring sessions over JSON, with an event stream.

Each session pairs one tutor board with one agent.  In HumanTutor mode the
service never auto-grades: the human demonstrates steps and marks the agent's
attempts via /train.  Every mutation appends to an event log (kept in memory
and mirrored to an NDJSON file), and replaying that log reconstructs the
agent exactly.
"""

from __future__ import annotations

import asyncio
import json
import random
import tempfile
import threading
import time
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field

from .agent import Agent, AgentConfig, HintRequest
from .harness import default_agent_config
from .model import SAI, SignalSource, TrainingSignal, decode_state, encode_state
from .tutors import DOMAINS, gen_problem, kc_labels

HEARTBEAT_SECONDS = 15.0


class CreateSession(BaseModel):
    domain: str
    mode: str = "HumanTutor"
    seed: int = 0
    agent_config: Optional[dict] = None


class TrainBody(BaseModel):
    sai: dict
    reward: float
    foci: Optional[list[str]] = None
    skill_label: Optional[str] = None
    source: str = Field(default="Demonstration")


class Session:
    def __init__(self, session_id: str, body: CreateSession, log_dir: Path):
        self.id = session_id
        self.mode = body.mode
        self.tutor = gen_problem(body.domain, random.Random(body.seed))
        base = default_agent_config(body.domain, body.seed)
        if body.agent_config:
            base = AgentConfig(**{**base.__dict__, **body.agent_config})
        self.agent = Agent(base)
        self.lock = threading.Lock()
        self.events: list[dict] = []
        self.log_path = log_dir / f"{session_id}.ndjson"
        self.emit("state-changed", {"state": json.loads(encode_state(self.tutor.state))})

    def emit(self, event_type: str, payload: dict) -> dict:
        event = {"seq": len(self.events), "type": event_type, "ts": time.time(), **payload}
        self.events.append(event)
        with self.log_path.open("a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
        return event

    def skills_summary(self) -> dict:
        skills = self.agent.export_skills()
        return {"count": len(skills), "skills": skills}


def replay_agent(events: list[dict], domain: str, seed: int = 0) -> Agent:
    """Rebuild an agent purely from a session's train events."""
    agent = Agent(default_agent_config(domain, seed))
    for event in events:
        if event["type"] != "skill-updated":
            continue
        signal = event["signal"]
        agent.train(
            TrainingSignal(
                state=decode_state(json.dumps(signal["state"])),
                sai=SAI.from_wire(signal["sai"]),
                reward=signal["reward"],
                foci=tuple(signal["foci"]) if signal.get("foci") else None,
                skill_label=signal.get("skill_label"),
                source=SignalSource(signal["source"]),
            )
        )
    return agent


def create_app(event_log_dir: Optional[str] = None, frontend_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="tutorlearn trainer service")
    log_dir = Path(event_log_dir) if event_log_dir else Path(tempfile.mkdtemp(prefix="tutorlearn-"))
    log_dir.mkdir(parents=True, exist_ok=True)
    sessions: dict[str, Session] = {}

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session {session_id}")
        return session

    @app.get("/domains/{domain}/meta")
    def domain_meta(domain: str):
        if domain not in DOMAINS:
            raise HTTPException(400, f"unknown domain {domain!r}")
        return {"domain": domain, "kc_labels": kc_labels(domain)}

    @app.post("/sessions")
    def create_session(body: CreateSession):
        if body.domain not in DOMAINS:
            raise HTTPException(400, f"unknown domain {body.domain!r}")
        if body.mode not in ("HumanTutor", "AutoTutor"):
            raise HTTPException(400, f"unknown mode {body.mode!r}")
        try:
            session = Session(uuid.uuid4().hex[:12], body, log_dir)
        except (ValueError, TypeError) as exc:
            raise HTTPException(400, f"bad agent config: {exc}") from exc
        sessions[session.id] = session
        return {
            "session_id": session.id,
            "domain": body.domain,
            "mode": session.mode,
            "state": json.loads(encode_state(session.tutor.state)),
        }

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return {
                "state": json.loads(encode_state(session.tutor.state)),
                "complete": session.tutor.complete,
                "skills": session.skills_summary(),
            }

    @app.post("/sessions/{session_id}/step")
    def step(session_id: str):
        session = get_session(session_id)
        with session.lock:
            if session.tutor.complete:
                raise HTTPException(409, "session complete")
            action = session.agent.act(session.tutor.state)
            conflict = [
                {
                    "skill": a.skill_id,
                    "selection": a.binding.selection,
                    "args": list(a.binding.args),
                    "sai": a.sai.to_wire(),
                    "utility": a.utility,
                }
                for a in session.agent.conflict_set(session.tutor.state)
            ]
            if isinstance(action, HintRequest):
                session.emit("agent-attempted", {"hint_request": True})
                return {"hint_request": True, "conflict_set": conflict}
            payload = {"action": action.to_wire(), "skill": session.agent.last_skill_id()}
            if session.mode == "AutoTutor":
                reward = session.tutor.grade(action)
                session.agent.train(
                    TrainingSignal(session.tutor.state, action, reward, source=SignalSource.FEEDBACK)
                )
                if reward > 0:
                    session.tutor.apply(action, reward)
                    session.emit(
                        "state-changed", {"state": json.loads(encode_state(session.tutor.state))}
                    )
                payload["reward"] = reward
            session.emit("agent-attempted", payload)
            return {**payload, "conflict_set": conflict}

    @app.post("/sessions/{session_id}/train")
    def train(session_id: str, body: TrainBody):
        session = get_session(session_id)
        with session.lock:
            try:
                sai = SAI.from_wire(body.sai)
                source = SignalSource(body.source)
                signal = TrainingSignal(
                    state=session.tutor.state,
                    sai=sai,
                    reward=body.reward,
                    foci=tuple(body.foci) if body.foci else None,
                    skill_label=body.skill_label,
                    source=source,
                )
            except (KeyError, ValueError) as exc:
                raise HTTPException(400, f"malformed training signal: {exc}") from exc
            session.emit(
                "skill-updated",
                {
                    "signal": {
                        "state": json.loads(encode_state(session.tutor.state)),
                        "sai": sai.to_wire(),
                        "reward": body.reward,
                        "foci": list(body.foci) if body.foci else None,
                        "skill_label": body.skill_label,
                        "source": source.value,
                    }
                },
            )
            session.agent.train(signal)
            if body.reward > 0 and session.mode == "HumanTutor":
                # demonstrations and confirmed attempts advance the board
                session.tutor.apply(sai, body.reward)
                session.emit(
                    "state-changed", {"state": json.loads(encode_state(session.tutor.state))}
                )
            return {
                "skills_summary": session.skills_summary(),
                "complete": session.tutor.complete,
            }

    @app.get("/sessions/{session_id}/skills")
    def skills(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return session.skills_summary()

    @app.get("/sessions/{session_id}/events")
    async def events(session_id: str, after: int = -1):
        session = get_session(session_id)

        async def stream():
            cursor = after + 1
            last_sent = time.monotonic()
            while True:
                with session.lock:
                    pending = session.events[cursor:]
                for event in pending:
                    yield json.dumps(event, sort_keys=True) + "\n"
                    cursor += 1
                    last_sent = time.monotonic()
                if time.monotonic() - last_sent >= HEARTBEAT_SECONDS:
                    yield json.dumps({"type": "heartbeat", "ts": time.time()}) + "\n"
                    last_sent = time.monotonic()
                await asyncio.sleep(0.05)

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    if frontend_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="frontend")

    app.state.sessions = sessions
    app.state.log_dir = log_dir
    return app
