"""Two-agent episode runner.

Both interactants are full belief-tracking agents.  They alternate turns;
the actor's affective behaviour reaches the observer with added Gaussian
environment noise.  Every random draw comes from a generator derived from
(root seed, participant, step, purpose), so episodes are bit-reproducible
regardless of scheduling and can be replayed from their recorded
observations.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .apps.base import TurnApp
from .engine import Agent, AgentConfig, IdentityPrior
from .epa import ACTOR, OBJECT
from .equations import EquationSet
from .filter import AgentAction, BeliefState

# substream purposes
_INIT = 0
_POLICY = 1
_BELIEF = 2
_WORLD = 3
_WORLD_IDX = 2  # participant slot for the environment


def stream(entropy: int, *key: int) -> np.random.Generator:
    """Deterministic generator for a (participant, step, purpose) slot."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy, spawn_key=key)))


@dataclass
class AgentSpec:
    identity: np.ndarray
    config: AgentConfig
    other_prior: IdentityPrior
    name: str = ""


@dataclass
class IdentityShift:
    """Scripted identity that walks between two anchors in a straight line.

    The walker dwells at each anchor for ``dwell`` steps, then moves toward
    the other at ``speed`` per step (the final hop may be shorter).  With
    ``repeat`` off it stays at the second anchor forever.
    """

    first: np.ndarray
    second: np.ndarray
    speed: float
    dwell: int
    repeat: bool = True

    def __post_init__(self):
        self.first = np.asarray(self.first, dtype=float)
        self.second = np.asarray(self.second, dtype=float)
        self._pos = self.first.copy()
        self._target = self.second
        self._waited = 0
        self._moving = False
        self._done = False

    def current(self) -> np.ndarray:
        return self._pos.copy()

    def step(self) -> np.ndarray:
        if self._done:
            return self.current()
        if not self._moving:
            self._waited += 1
            if self._waited >= self.dwell:
                self._moving = True
                self._waited = 0
            return self.current()
        gap = self._target - self._pos
        distance = float(np.linalg.norm(gap))
        if distance <= self.speed:
            self._pos = self._target.copy()
            self._moving = False
            arrived_second = np.allclose(self._pos, self.second)
            if arrived_second and not self.repeat:
                self._done = True
            self._target = self.first if arrived_second else self.second
        else:
            self._pos = self._pos + self.speed * gap / distance
        return self.current()


@dataclass
class StepRecord:
    step: int
    actor: int
    b_a: list[float]
    omega_f: list[float]
    summaries: list[dict]

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "actor": self.actor,
            "b_a": self.b_a,
            "omega_f": self.omega_f,
            "summaries": self.summaries,
        }


@dataclass
class EpisodeTrace:
    seed: int
    sigma_e: float
    initial: list[dict]
    records: list[StepRecord] = field(default_factory=list)

    def final_id_deflection(self, agent_idx: int) -> float:
        if not self.records:
            return float(
                np.sum(
                    (
                        np.asarray(self.initial[agent_idx]["other_identity"])
                        - np.asarray(self.initial[1 - agent_idx]["self_identity"])
                    )
                    ** 2
                )
            )
        return self.records[-1].summaries[agent_idx]["id_deflection"]

    def mean_deflection(self, agent_idx: int) -> float:
        if not self.records:
            return 0.0
        return float(np.mean([r.summaries[agent_idx]["deflection"] for r in self.records]))

    def max_deflection(self, agent_idx: int) -> float:
        if not self.records:
            return 0.0
        return float(np.max([r.summaries[agent_idx]["deflection"] for r in self.records]))

    def id_deflection_series(self, agent_idx: int) -> np.ndarray:
        return np.array([r.summaries[agent_idx]["id_deflection"] for r in self.records])

    def to_json_lines(self) -> str:
        lines = [
            json.dumps(
                {
                    "type": "header",
                    "seed": self.seed,
                    "sigma_e": self.sigma_e,
                    "initial": self.initial,
                }
            )
        ]
        lines.extend(json.dumps(r.to_json()) for r in self.records)
        return "\n".join(lines) + "\n"


def id_deflection(belief_of_other: BeliefState, other_self_belief: BeliefState) -> float:
    """Squared error between one agent's estimate of the other's identity
    and that other agent's estimate of its own identity."""
    w1 = belief_of_other.normalized_weights()
    est_other = w1 @ belief_of_other.f[:, OBJECT]
    w2 = other_self_belief.normalized_weights()
    self_est = w2 @ other_self_belief.f[:, ACTOR]
    return float(np.sum((est_other - self_est) ** 2))


def _summaries(agents: list[Agent]) -> list[dict]:
    out = []
    for i, agent in enumerate(agents):
        other = agents[1 - i]
        out.append(
            {
                "self_identity": agent.expected_self_identity().tolist(),
                "other_identity": agent.expected_other_identity().tolist(),
                "deflection": agent.expected_deflection(),
                "id_deflection": id_deflection(agent.belief, other.belief),
            }
        )
    return out


def run_episode(
    specs: tuple[AgentSpec, AgentSpec],
    eq: EquationSet,
    max_steps: int,
    sigma_e: float,
    seed: int,
    app_factory: Callable = TurnApp,
    schedule: IdentityShift | None = None,
    scheduled_agent: int = 1,
    first_actor: int = 0,
) -> EpisodeTrace:
    agents = [
        Agent(
            config=spec.config,
            eq=eq,
            app=app_factory(),
            self_identity=spec.identity,
            other_prior=spec.other_prior,
            rng=stream(seed, i, 0, _INIT),
            name=spec.name or f"agent{i}",
        )
        for i, spec in enumerate(specs)
    ]
    trace = EpisodeTrace(seed=seed, sigma_e=sigma_e, initial=_summaries(agents))

    for step in range(1, max_steps + 1):
        actor_idx = (step - 1 + first_actor) % 2
        if schedule is not None:
            # the scripted identity moves one increment per own action
            if actor_idx == scheduled_agent:
                schedule.step()
            agents[scheduled_agent].pin_self_identity(schedule.current())
        actor, observer = agents[actor_idx], agents[1 - actor_idx]

        b_a = actor.choose_action(stream(seed, actor_idx, step, _POLICY))
        omega = b_a.copy()
        if sigma_e > 0:
            omega = omega + stream(seed, _WORLD_IDX, step, _WORLD).normal(0.0, sigma_e, 3)

        actor.update_as_actor(AgentAction(a=None, b_a=b_a), stream(seed, actor_idx, step, _BELIEF))
        observer.update_as_observer(omega, stream(seed, 1 - actor_idx, step, _BELIEF))

        trace.records.append(
            StepRecord(
                step=step,
                actor=actor_idx,
                b_a=b_a.tolist(),
                omega_f=omega.tolist(),
                summaries=_summaries(agents),
            )
        )
    return trace


def replay_episode(
    trace: EpisodeTrace,
    specs: tuple[AgentSpec, AgentSpec],
    eq: EquationSet,
    app_factory: Callable = TurnApp,
    schedule: IdentityShift | None = None,
    scheduled_agent: int = 1,
    first_actor: int = 0,
) -> EpisodeTrace:
    """Re-run the belief updates from a trace's recorded actions and
    observations; with the trace's seed this reproduces its summaries."""
    seed = trace.seed
    agents = [
        Agent(
            config=spec.config,
            eq=eq,
            app=app_factory(),
            self_identity=spec.identity,
            other_prior=spec.other_prior,
            rng=stream(seed, i, 0, _INIT),
            name=spec.name or f"agent{i}",
        )
        for i, spec in enumerate(specs)
    ]
    out = EpisodeTrace(seed=seed, sigma_e=trace.sigma_e, initial=_summaries(agents))
    for record in trace.records:
        actor_idx = record.actor
        if schedule is not None:
            if actor_idx == scheduled_agent:
                schedule.step()
            agents[scheduled_agent].pin_self_identity(schedule.current())
        actor, observer = agents[actor_idx], agents[1 - actor_idx]
        b_a = np.asarray(record.b_a)
        omega = np.asarray(record.omega_f)
        actor.update_as_actor(
            AgentAction(a=None, b_a=b_a), stream(seed, actor_idx, record.step, _BELIEF)
        )
        observer.update_as_observer(omega, stream(seed, 1 - actor_idx, record.step, _BELIEF))
        out.records.append(
            StepRecord(
                step=record.step,
                actor=actor_idx,
                b_a=record.b_a,
                omega_f=record.omega_f,
                summaries=_summaries(agents),
            )
        )
    return out


def run_many(tasks: list[Callable[[], EpisodeTrace]], workers: int = 1) -> list[EpisodeTrace]:
    """Run independent episode thunks, preserving order; results do not
    depend on the worker count because every thunk owns its seed."""
    if workers <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda task: task(), tasks))
