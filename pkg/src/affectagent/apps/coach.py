"""Handwashing-assistance application.

State is (planstep, aware, prompted, turn).  Plansteps follow a small
directed plan graph with one optional branch (soap before water); awareness
gates progress.  On the client's turn the person advances, stalls, gains or
loses awareness with probabilities coupled to the current deflection; the
assistant's turn only records whether a prompt was issued.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..dynamics import AGENT, CLIENT
from ..equations import data_path
from .base import AppModel

ASSISTANT_IDENTITY = np.array([1.5, 0.51, 0.45])
PATIENT_IDENTITY = np.array([0.9, -0.69, -1.05])
ELDER_IDENTITY = np.array([1.67, 0.01, -1.03])
BOSS_IDENTITY = np.array([0.48, 2.16, 0.94])
CONVALESCENT_IDENTITY = np.array([0.3, 0.09, -0.03])

PROMPT_EPA = np.array([0.15, 0.32, 0.06])
MIND_EPA = np.array([0.86, 0.17, -0.16])
COMMAND_EPA = np.array([-0.09, 1.29, 1.59])
CONFER_EPA = np.array([1.87, 0.87, -0.35])

PROMPT_THRESHOLD = 0.4
INITIAL_AWARENESS = 0.72


@dataclass(frozen=True)
class CoachState:
    planstep: int
    aware: bool
    prompted: bool
    turn: str


class PlanGraph:
    """Directed planstep graph; edge weights are the branch distribution
    taken when an advance happens (sum <= 1, remainder stays put)."""

    def __init__(self, edges: dict[int, list[tuple[int, float]]], terminal: int,
                 labels: dict[int, str] | None = None):
        self.edges = {int(k): [(int(t), float(p)) for t, p in v] for k, v in edges.items()}
        self.terminal = int(terminal)
        self.labels = {int(k): v for k, v in (labels or {}).items()}
        nodes = set(self.edges) | {t for outs in self.edges.values() for t, _ in outs}
        nodes.add(self.terminal)
        for node in nodes:
            if node == self.terminal:
                continue
            outs = self.edges.get(node, [])
            if not outs:
                raise ValueError(f"non-terminal planstep {node} has no outgoing edge")
            total = sum(p for _, p in outs)
            if total > 1.0 + 1e-9 or any(p < 0 for _, p in outs):
                raise ValueError(f"edge probabilities at planstep {node} exceed 1")

    @classmethod
    def from_json(cls, path) -> "PlanGraph":
        payload = json.loads(Path(path).read_text())
        return cls(
            edges={int(k): [tuple(e) for e in v] for k, v in payload["edges"].items()},
            terminal=payload["terminal"],
            labels={int(k): v for k, v in payload.get("labels", {}).items()},
        )

    def branches(self, planstep: int) -> list[tuple[int, float]]:
        return self.edges.get(planstep, [])


def load_plan_graph() -> PlanGraph:
    return PlanGraph.from_json(data_path("coach_plan_graph.json"))


@dataclass
class CoachParams:
    """Hand-tuned coupling between deflection and task progress.

    Advancing and prompt-following stay near their ceiling below the
    comfort point and fall off sharply beyond it; a prompt to an aware
    person confuses with probability ramping up past the same point; an
    unaware, unprompted person mostly does nothing.  The comfort point is
    calibrated to the bundled sample equation set, whose well-matched
    interactions settle near deflection 3.
    """

    advance_scale: float = 0.72
    tolerance_point: float = 4.45
    tolerance_sharpness: float = 0.15
    follow_scale: float = 0.9
    confusion_scale: float = 0.6
    confusion_onset: float = 3.3
    confusion_ramp: float = 1.2
    unaware_stall: float = 0.95

    def _falloff(self, d: float) -> float:
        return float(1.0 / (1.0 + np.exp((d - self.tolerance_point) / self.tolerance_sharpness)))

    def advance_prob(self, d: float) -> float:
        return self.advance_scale * self._falloff(d)

    def follow_prob(self, d: float) -> float:
        return self.follow_scale * self._falloff(d)

    def confusion_prob(self, d: float) -> float:
        excess = max(0.0, d - self.confusion_onset)
        return self.confusion_scale * min(1.0, excess / self.confusion_ramp)


def coach_transition_dist(
    state: CoachState, deflection_value: float, graph: PlanGraph, params: CoachParams
) -> list[tuple[CoachState, float]]:
    """Client-turn transition distribution over (planstep, aware)."""
    d = float(deflection_value)
    ps, aware, prompted = state.planstep, state.aware, state.prompted

    def nxt(planstep: int, aware_flag: bool) -> CoachState:
        return CoachState(planstep=planstep, aware=aware_flag, prompted=False, turn=AGENT)

    if ps == graph.terminal:
        return [(nxt(ps, aware), 1.0)]

    outcomes: dict[CoachState, float] = {}

    def add(target: CoachState, prob: float) -> None:
        if prob > 0:
            outcomes[target] = outcomes.get(target, 0.0) + prob

    branches = graph.branches(ps)
    if aware and not prompted:
        p_adv = params.advance_prob(d)
        for target, weight in branches:
            add(nxt(target, True), p_adv * weight)
        # a failed advance costs awareness
        add(nxt(ps, False), 1.0 - p_adv * sum(w for _, w in branches))
    elif aware and prompted:
        p_conf = params.confusion_prob(d)
        p_follow = params.follow_prob(d)
        add(nxt(ps, False), p_conf)
        for target, weight in branches:
            add(nxt(target, True), (1.0 - p_conf) * p_follow * weight)
        add(nxt(ps, True), (1.0 - p_conf) * (1.0 - p_follow * sum(w for _, w in branches)))
    elif not aware and prompted:
        p_follow = params.follow_prob(d)
        for target, weight in branches:
            add(nxt(target, True), p_follow * weight)
        add(nxt(ps, False), 1.0 - p_follow * sum(w for _, w in branches))
    else:
        add(nxt(ps, False), params.unaware_stall)
        add(nxt(ps, True), 1.0 - params.unaware_stall)

    return sorted(outcomes.items(), key=lambda kv: (kv[0].planstep, kv[0].aware))


class CoachApp(AppModel):
    """Assistant-side model of the person's task dynamics."""

    def __init__(self, graph: PlanGraph | None = None, params: CoachParams | None = None):
        self.graph = graph if graph is not None else load_plan_graph()
        self.params = params if params is not None else CoachParams()

    def init_x(self, rng):
        return CoachState(
            planstep=0,
            aware=bool(rng.uniform() < INITIAL_AWARENESS),
            prompted=False,
            turn=CLIENT,
        )

    def sample_x(self, x, f_prime, tau_prime, a, rng):
        if x.turn == CLIENT:
            d = float(np.sum((np.asarray(f_prime) - np.asarray(tau_prime)) ** 2))
            dist = coach_transition_dist(x, d, self.graph, self.params)
            probs = np.array([p for _, p in dist])
            probs = probs / probs.sum()
            return dist[int(rng.choice(len(dist), p=probs))][0]
        return replace(x, prompted=bool(a), turn=CLIENT)

    def reward(self, x, a, f_prime, tau_prime) -> float:
        return -float((x.planstep - self.graph.terminal) ** 2)

    def observe_x(self, x, omega_x) -> float:
        return 1.0 if x.planstep == int(omega_x) else 0.0

    def action_set(self, x) -> list:
        return [False, True]

    def x_to_json(self, x):
        return {
            "planstep": x.planstep,
            "aware": x.aware,
            "prompted": x.prompted,
            "turn": x.turn,
        }

    def x_from_json(self, payload):
        return CoachState(
            planstep=int(payload["planstep"]),
            aware=bool(payload["aware"]),
            prompted=bool(payload["prompted"]),
            turn=payload["turn"],
        )


def awareness_marginal(belief) -> float:
    w = belief.normalized_weights()
    return float(sum(wi for wi, xi in zip(w, belief.x) if xi.aware))


def planstep_marginal(belief, n_steps: int = 8) -> np.ndarray:
    w = belief.normalized_weights()
    out = np.zeros(n_steps)
    for wi, xi in zip(w, belief.x):
        out[xi.planstep] += wi
    return out


def coach_prompt_policy(belief) -> bool:
    """Prompt exactly when the believed awareness drops below the threshold
    (strictly below: 0.4 on the nose is a no-op)."""
    return awareness_marginal(belief) < PROMPT_THRESHOLD


def sample_world_transition(
    state: CoachState, deflection_value: float, graph: PlanGraph, params: CoachParams, u: float
) -> CoachState:
    """Advance the true client state with a single uniform draw, so the
    propositional randomness stream is identical across affective policies."""
    dist = coach_transition_dist(state, deflection_value, graph, params)
    acc = 0.0
    for target, prob in dist:
        acc += prob
        if u < acc:
            return target
    return dist[-1][0]


@dataclass
class FixedAffectivePolicy:
    """Constant EPA pair: one profile when prompting, another otherwise."""

    prompt_epa: np.ndarray
    idle_epa: np.ndarray

    def __post_init__(self):
        self.prompt_epa = np.asarray(self.prompt_epa, dtype=float)
        self.idle_epa = np.asarray(self.idle_epa, dtype=float)

    def __call__(self, agent, prompting: bool, rng) -> np.ndarray:
        return self.prompt_epa.copy() if prompting else self.idle_epa.copy()


def adaptive_affective_policy(agent, prompting: bool, rng) -> np.ndarray:
    """Belief-driven delivery: the agent's normative affective action."""
    return agent.choose_action(rng)


FIXED_POLICIES = {
    "prompt": FixedAffectivePolicy(PROMPT_EPA, MIND_EPA),
    "confer": FixedAffectivePolicy(CONFER_EPA, MIND_EPA),
    "command": FixedAffectivePolicy(COMMAND_EPA, MIND_EPA),
}


ADAPTIVE_POLICY_NAMES = ("adaptive", "bayesact")


def resolve_affective_policy(name: str):
    if name in ADAPTIVE_POLICY_NAMES:
        return adaptive_affective_policy
    if name in FIXED_POLICIES:
        return FIXED_POLICIES[name]
    raise ValueError(f"unknown affective policy {name!r}")


@dataclass
class CoachTurnRecord:
    turn: str
    planstep: int
    aware: bool
    prompted: bool
    b_a: list[float]
    awareness_belief: float
    client_deflection: float
    world_u: float | None


@dataclass
class CoachEpisode:
    interactions: int
    last_planstep: int
    finished: bool
    records: list[CoachTurnRecord]


def run_coach_episode(
    client_identity,
    affective_policy,
    seed: int,
    eq,
    graph: PlanGraph | None = None,
    params: CoachParams | None = None,
    max_interactions: int = 50,
    n_particles: int = 300,
    assistant_identity=ASSISTANT_IDENTITY,
    prior_client_identity=PATIENT_IDENTITY,
) -> CoachEpisode:
    """One assisted-task episode.

    The assistant must learn the client's affective identity; the client
    knows both identities.  Turns alternate starting with the client; the
    true task state moves on client turns with probabilities set by the
    deflection the client currently experiences.
    """
    from ..engine import Agent, IdentityPrior
    from ..filter import AgentAction, AgentConfig
    from ..harness import stream
    from .base import TurnApp

    graph = graph if graph is not None else load_plan_graph()
    params = params if params is not None else CoachParams()
    policy = resolve_affective_policy(affective_policy) if isinstance(affective_policy, str) else affective_policy

    assistant_cfg = AgentConfig(
        n_particles=n_particles,
        beta_a=0.01,
        beta_c=0.01,
        beta0_a=0.001,
        gamma=0.5,
        roughen_object=True,
    )
    client_cfg = AgentConfig(
        n_particles=max(50, n_particles // 2),
        beta_a=0.01,
        beta_c=0.01,
        beta0_a=0.001,
        gamma=0.5,
        sigma_r=0.0,
    )
    assistant = Agent(
        config=assistant_cfg,
        eq=eq,
        app=CoachApp(graph=graph, params=params),
        self_identity=assistant_identity,
        other_prior=IdentityPrior(mean=prior_client_identity, std=2.0),
        rng=stream(seed, 0, 0, 0),
        name="assistant",
    )
    client = Agent(
        config=client_cfg,
        eq=eq,
        app=TurnApp(),
        self_identity=client_identity,
        other_prior=IdentityPrior(mean=assistant_identity, std=1e-3),
        rng=stream(seed, 1, 0, 0),
        name="client",
    )

    initially_aware = bool(stream(seed, 2, 0, 3).uniform() < INITIAL_AWARENESS)
    state = CoachState(planstep=0, aware=initially_aware, prompted=False, turn=CLIENT)
    records: list[CoachTurnRecord] = []
    interactions = 0
    t = 0
    while interactions < max_interactions and state.planstep != graph.terminal:
        t += 1
        if state.turn == CLIENT:
            d = client.expected_deflection()
            u = float(stream(seed, 2, t, 3).uniform())
            state = sample_world_transition(state, d, graph, params, u)
            b_c = client.choose_action(stream(seed, 1, t, 1))
            client.update_as_actor(AgentAction(a=None, b_a=b_c), stream(seed, 1, t, 2))
            assistant.update_as_observer(
                b_c, stream(seed, 0, t, 2), omega_x=state.planstep
            )
            records.append(
                CoachTurnRecord(
                    turn=CLIENT,
                    planstep=state.planstep,
                    aware=state.aware,
                    prompted=False,
                    b_a=b_c.tolist(),
                    awareness_belief=awareness_marginal(assistant.belief),
                    client_deflection=d,
                    world_u=u,
                )
            )
        else:
            prompting = coach_prompt_policy(assistant.belief)
            b_a = np.asarray(policy(assistant, prompting, stream(seed, 0, t, 1)), dtype=float)
            assistant.update_as_actor(AgentAction(a=prompting, b_a=b_a), stream(seed, 0, t, 2))
            client.update_as_observer(b_a, stream(seed, 1, t, 2))
            state = replace(state, prompted=prompting, turn=CLIENT)
            records.append(
                CoachTurnRecord(
                    turn=AGENT,
                    planstep=state.planstep,
                    aware=state.aware,
                    prompted=prompting,
                    b_a=b_a.tolist(),
                    awareness_belief=awareness_marginal(assistant.belief),
                    client_deflection=client.expected_deflection(),
                    world_u=None,
                )
            )
        interactions += 1
    return CoachEpisode(
        interactions=interactions,
        last_planstep=state.planstep,
        finished=state.planstep == graph.terminal,
        records=records,
    )


@dataclass
class CoachComparison:
    client_identity: str
    policy: str
    mean_interactions: float
    se_interactions: float
    mean_last_planstep: float
    se_last_planstep: float
    completed: int
    trials: int


def coach_experiment(
    client_identity,
    affective_policy: str,
    trials: int,
    seed: int,
    eq,
    identity_label: str | None = None,
    **episode_kwargs,
) -> CoachComparison:
    """Repeated episodes for one (identity, policy) cell with mean and
    standard-error summaries."""
    interactions = []
    last_steps = []
    completed = 0
    for trial in range(trials):
        episode = run_coach_episode(
            client_identity, affective_policy, seed + 7919 * trial, eq, **episode_kwargs
        )
        interactions.append(episode.interactions)
        last_steps.append(episode.last_planstep)
        completed += episode.finished
    interactions = np.asarray(interactions, dtype=float)
    last_steps = np.asarray(last_steps, dtype=float)

    def se(v):
        return float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0

    return CoachComparison(
        client_identity=identity_label or np.array2string(np.asarray(client_identity)),
        policy=affective_policy if isinstance(affective_policy, str) else "custom",
        mean_interactions=float(interactions.mean()),
        se_interactions=se(interactions),
        mean_last_planstep=float(last_steps.mean()),
        se_last_planstep=se(last_steps),
        completed=completed,
        trials=trials,
    )
