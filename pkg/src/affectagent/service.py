"""Live session service.

Small HTTP API exposing interactive sessions: a human plays the client side
(answering questions and picking statements, or steering the assisted-task
demo) while the agent runs its full belief-update and action-selection loop
each turn.  Sessions live in memory, one writer at a time; every state
change appends an event that the event-stream endpoint replays and follows.
"""

from __future__ import annotations

import asyncio
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field

from .apps.coach import (
    CoachApp,
    CoachState,
    PATIENT_IDENTITY,
    ASSISTANT_IDENTITY,
    awareness_marginal,
    coach_prompt_policy,
    planstep_marginal,
    sample_world_transition,
)
from .apps.tutor import (
    STUDENT_IDENTITY,
    TUTOR_IDENTITY,
    StatementTable,
    TutorApp,
    load_question_bank,
    load_tutor_statements,
    propositional_policy,
    skill_marginal,
)
from .engine import Agent, IdentityPrior
from .equations import EquationSet, Lexicon, data_path, load_sample_equations, load_sample_lexicon
from .filter import AgentAction, AgentConfig, belief_to_dict
from .policy import greedy_action

SESSION_KINDS = ("tutor", "coach")


class SessionConfig(BaseModel):
    seed: int = 0
    n_particles: int = Field(default=300, ge=1, le=5000)
    beta_a: float = Field(default=0.01, gt=0)
    beta_c: float = Field(default=0.01, gt=0)
    beta0_a: float = Field(default=0.01, gt=0)
    beta0_c: float = Field(default=0.5, gt=0)
    gamma: float = Field(default=1.0, gt=0)
    alpha: float = Field(default=1.0, gt=0)
    client_identity: Optional[list[float]] = None


class CreateSessionRequest(BaseModel):
    kind: str
    config: SessionConfig = Field(default_factory=SessionConfig)


class ActRequest(BaseModel):
    answer_choice: Optional[int] = None
    statement_id: Optional[str] = None


class StatementOut(BaseModel):
    statement_id: str
    context: str
    text: str
    label: str
    epa: list[float]


class QuestionOut(BaseModel):
    question_id: str
    difficulty: int
    prompt: str
    choices: list[str]


class BeliefSummary(BaseModel):
    step: int
    self_identity: list[float]
    other_identity: list[float]
    expected_deflection: float
    skill_marginal: Optional[list[float]] = None
    awareness: Optional[float] = None
    planstep_marginal: Optional[list[float]] = None


class SessionDescriptor(BaseModel):
    id: str
    kind: str
    step: int
    created: float
    updated: float
    belief: BeliefSummary
    question: Optional[QuestionOut] = None
    planstep: Optional[int] = None
    planstep_label: Optional[str] = None
    client_statements: Optional[list[StatementOut]] = None
    debug_particles: Optional[dict] = None


class ActResponse(BaseModel):
    feedback: Optional[bool] = None
    agent_statement: Optional[StatementOut] = None
    client_statements: Optional[list[StatementOut]] = None
    prompted: Optional[bool] = None
    next_question: Optional[QuestionOut] = None
    planstep: Optional[int] = None
    planstep_label: Optional[str] = None
    belief: BeliefSummary
    deflection: float
    event_index: Optional[int] = None


class EventOut(BaseModel):
    index: int
    step: int
    belief: BeliefSummary


@dataclass
class Session:
    id: str
    kind: str
    config: SessionConfig
    agent: Agent
    rng: np.random.Generator
    created: float
    updated: float
    step: int = 0
    question: Any = None
    coach_state: Any = None
    pending_correct: Optional[bool] = None
    events: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    closed: bool = False


class _FixedActionApp:
    """Restrict an application's propositional choices to one action, so the
    greedy policy only optimizes the affective delivery."""

    def __init__(self, app, action):
        self._app = app
        self._action = action

    def action_set(self, x):
        return [self._action]

    def __getattr__(self, name):
        return getattr(self._app, name)


def create_app(
    eq: EquationSet | None = None,
    lexicon: Lexicon | None = None,
    journal_dir: str | None = None,
    console_dir: str | None = None,
) -> FastAPI:
    eq = eq if eq is not None else load_sample_equations()
    lexicon = lexicon if lexicon is not None else load_sample_lexicon()
    statements = load_tutor_statements()
    questions = load_question_bank()

    coach_statements = StatementTable.from_csv(data_path("coach_statements.csv"))

    app = FastAPI(
        title="affectagent session service",
        description="Live belief-tracking agent sessions over HTTP",
        version="0.1.0",
    )
    sessions: dict[str, Session] = {}

    def _agent_config(cfg: SessionConfig) -> AgentConfig:
        return AgentConfig(
            alpha=cfg.alpha,
            beta_a=cfg.beta_a,
            beta_c=cfg.beta_c,
            beta0_a=cfg.beta0_a,
            beta0_c=cfg.beta0_c,
            gamma=cfg.gamma,
            n_particles=cfg.n_particles,
            sigma_r=0.0,
            candidate_count=50,
            integrand_samples=5,
        )

    def _belief_summary(session: Session) -> BeliefSummary:
        agent = session.agent
        summary = BeliefSummary(
            step=session.step,
            self_identity=[round(float(v), 6) for v in agent.expected_self_identity()],
            other_identity=[round(float(v), 6) for v in agent.expected_other_identity()],
            expected_deflection=round(float(agent.expected_deflection()), 6),
        )
        if session.kind == "tutor":
            summary.skill_marginal = [round(float(v), 6) for v in skill_marginal(agent.belief)]
        else:
            summary.awareness = round(float(awareness_marginal(agent.belief)), 6)
            summary.planstep_marginal = [
                round(float(v), 6) for v in planstep_marginal(agent.belief)
            ]
        return summary

    def _statement_out(entry) -> StatementOut:
        return StatementOut(
            statement_id=entry.statement_id,
            context=entry.context,
            text=entry.text,
            label=entry.label,
            epa=list(entry.epa),
        )

    def _question_out(question) -> QuestionOut:
        return QuestionOut(
            question_id=question.question_id,
            difficulty=question.difficulty,
            prompt=question.prompt,
            choices=list(question.choices),
        )

    def _client_statements(session: Session) -> list[StatementOut]:
        if session.kind == "tutor":
            pool = statements.in_context("client-correct") + statements.in_context(
                "client-incorrect"
            )
        else:
            pool = coach_statements.in_context("coach-client") if coach_statements else []
        return [_statement_out(e) for e in pool]

    def _descriptor(session: Session, debug: bool = False) -> SessionDescriptor:
        graph = session.agent.app.graph if session.kind == "coach" else None
        descriptor = SessionDescriptor(
            id=session.id,
            kind=session.kind,
            step=session.step,
            created=session.created,
            updated=session.updated,
            belief=_belief_summary(session),
            question=_question_out(session.question) if session.question else None,
            planstep=session.coach_state.planstep if session.coach_state else None,
            planstep_label=(
                graph.labels.get(session.coach_state.planstep) if graph and session.coach_state else None
            ),
            client_statements=_client_statements(session),
        )
        if debug:
            descriptor.debug_particles = belief_to_dict(session.agent.belief, session.agent.app)
        return descriptor

    def _append_event(session: Session) -> int:
        event = {
            "index": len(session.events),
            "step": session.step,
            "belief": _belief_summary(session).model_dump(),
        }
        session.events.append(event)
        if journal_dir:
            path = Path(journal_dir) / f"{session.id}.jsonl"
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "a") as handle:
                handle.write(json.dumps(event) + "\n")
        return event["index"]

    def _get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None or session.closed:
            raise HTTPException(status_code=404, detail="no such session")
        return session

    @app.post("/api/sessions", response_model=SessionDescriptor, status_code=201)
    def create_session(request: CreateSessionRequest) -> SessionDescriptor:
        if request.kind not in SESSION_KINDS:
            raise HTTPException(status_code=404, detail=f"unknown session kind {request.kind!r}")
        cfg = request.config
        rng = np.random.default_rng(cfg.seed)
        if request.kind == "tutor":
            agent = Agent(
                config=_agent_config(cfg),
                eq=eq,
                app=TutorApp(),
                self_identity=TUTOR_IDENTITY,
                other_prior=IdentityPrior(
                    mean=cfg.client_identity or STUDENT_IDENTITY, std=cfg.beta0_c
                ),
                rng=rng,
                name="tutor",
            )
            session = Session(
                id=uuid.uuid4().hex[:12],
                kind="tutor",
                config=cfg,
                agent=agent,
                rng=rng,
                created=time.time(),
                updated=time.time(),
            )
            state = session.agent.belief.x[0]
            session.question = questions.draw(state.difficulty, rng)
        else:
            agent = Agent(
                config=_agent_config(cfg),
                eq=eq,
                app=CoachApp(),
                self_identity=ASSISTANT_IDENTITY,
                other_prior=IdentityPrior(
                    mean=cfg.client_identity or PATIENT_IDENTITY, std=max(cfg.beta0_c, 1.0)
                ),
                rng=rng,
                name="assistant",
            )
            session = Session(
                id=uuid.uuid4().hex[:12],
                kind="coach",
                config=cfg,
                agent=agent,
                rng=rng,
                created=time.time(),
                updated=time.time(),
            )
            session.coach_state = CoachState(
                planstep=0,
                aware=bool(rng.uniform() < 0.72),
                prompted=False,
                turn="client",
            )
        sessions[session.id] = session
        _append_event(session)
        return _descriptor(session)

    @app.get("/api/sessions/{session_id}", response_model=SessionDescriptor)
    def get_session(session_id: str, debug: int = Query(default=0)) -> SessionDescriptor:
        return _descriptor(_get_session(session_id), debug=bool(debug))

    @app.delete("/api/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str) -> None:
        session = _get_session(session_id)
        session.closed = True
        del sessions[session_id]

    def _act_tutor(session: Session, request: ActRequest) -> ActResponse:
        if request.answer_choice is None and request.statement_id is None:
            raise HTTPException(status_code=422, detail="nothing to act on")

        if request.answer_choice is not None:
            # answering phase
            if session.pending_correct is not None:
                raise HTTPException(
                    status_code=409, detail="a statement is still owed for the last answer"
                )
            question = session.question
            if not 0 <= request.answer_choice < len(question.choices):
                raise HTTPException(status_code=422, detail="answer_choice out of range")
            correct = request.answer_choice == question.answer_index
            if request.statement_id is None:
                session.pending_correct = correct
                context = "client-correct" if correct else "client-incorrect"
                return ActResponse(
                    feedback=correct,
                    client_statements=[
                        _statement_out(e) for e in statements.in_context(context)
                    ],
                    belief=_belief_summary(session),
                    deflection=round(float(session.agent.expected_deflection()), 6),
                )
        else:
            # statement-only phase: an answer must be pending
            if session.pending_correct is None:
                raise HTTPException(
                    status_code=409, detail="not the statement phase: answer a question first"
                )
            correct = session.pending_correct

        try:
            statement = statements.get(request.statement_id)
        except KeyError:
            raise HTTPException(status_code=422, detail="unknown statement id") from None
        wanted_context = "client-correct" if correct else "client-incorrect"
        if statement.context != wanted_context:
            raise HTTPException(
                status_code=422,
                detail=f"statement belongs to {statement.context!r}, expected {wanted_context!r}",
            )
        session.pending_correct = None
        agent = session.agent
        agent.update_as_observer(
            statement.epa_array, session.rng, omega_x=1 if correct else 0
        )
        difficulty = propositional_policy(agent.belief, session.rng)
        choice = greedy_action(
            agent.belief,
            _FixedActionApp(agent.app, difficulty),
            agent.eq,
            agent.config,
            session.rng,
        )
        agent.update_as_actor(AgentAction(a=difficulty, b_a=choice.b_a), session.rng)
        agent_context = "agent-correct" if correct else "agent-incorrect"
        reply = statements.nearest(choice.b_a, agent_context)
        session.question = questions.draw(difficulty, session.rng)
        session.step += 1
        session.updated = time.time()
        index = _append_event(session)
        return ActResponse(
            feedback=correct,
            agent_statement=_statement_out(reply),
            next_question=_question_out(session.question),
            belief=_belief_summary(session),
            deflection=round(float(agent.expected_deflection()), 6),
            event_index=index,
        )

    def _act_coach(session: Session, request: ActRequest) -> ActResponse:
        if request.statement_id is None:
            raise HTTPException(status_code=422, detail="coach turns need statement_id")
        try:
            statement = coach_statements.get(request.statement_id)
        except (KeyError, AttributeError):
            raise HTTPException(status_code=422, detail="unknown statement id") from None
        agent = session.agent
        d = float(agent.expected_deflection())
        session.coach_state = sample_world_transition(
            session.coach_state, d, agent.app.graph, agent.app.params, float(session.rng.uniform())
        )
        agent.update_as_observer(
            statement.epa_array, session.rng, omega_x=session.coach_state.planstep
        )
        prompting = coach_prompt_policy(agent.belief)
        b_a = agent.choose_action(session.rng)
        agent.update_as_actor(AgentAction(a=prompting, b_a=b_a), session.rng)
        from dataclasses import replace as dc_replace

        session.coach_state = dc_replace(session.coach_state, prompted=prompting, turn="client")
        reply = coach_statements.nearest(b_a, "coach-agent")
        session.step += 1
        session.updated = time.time()
        index = _append_event(session)
        graph = agent.app.graph
        return ActResponse(
            agent_statement=_statement_out(reply),
            prompted=prompting,
            planstep=session.coach_state.planstep,
            planstep_label=graph.labels.get(session.coach_state.planstep),
            belief=_belief_summary(session),
            deflection=round(float(agent.expected_deflection()), 6),
            event_index=index,
        )

    @app.post("/api/sessions/{session_id}/act", response_model=ActResponse)
    def act(session_id: str, request: ActRequest) -> ActResponse:
        session = _get_session(session_id)
        if not session.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="session is processing another turn")
        try:
            if session.kind == "tutor":
                return _act_tutor(session, request)
            return _act_coach(session, request)
        finally:
            session.lock.release()

    @app.get("/api/sessions/{session_id}/events")
    async def events(session_id: str, request: Request):
        session = _get_session(session_id)
        last_id = request.headers.get("Last-Event-ID")
        start = int(last_id) + 1 if last_id is not None else 0

        async def generate():
            cursor = start
            while True:
                live = sessions.get(session_id)
                if live is None or live.closed:
                    break
                while cursor < len(live.events):
                    event = live.events[cursor]
                    yield f"id: {event['index']}\ndata: {json.dumps(event)}\n\n"
                    cursor += 1
                if await request.is_disconnected():
                    break
                await asyncio.sleep(0.05)

        return StreamingResponse(generate(), media_type="text/event-stream")

    # serve the built browser console when present (API routes stay primary)
    candidate = (
        Path(console_dir)
        if console_dir
        else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    )
    if candidate.is_dir() and (candidate / "index.html").exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(candidate), html=True), name="console")

    return app


def dump_openapi(path: str = "openapi.json") -> Path:
    app = create_app()
    payload = app.openapi()
    out = Path(path)
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return out


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "openapi.json"
    print(dump_openapi(target))
