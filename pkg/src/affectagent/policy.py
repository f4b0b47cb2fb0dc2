"""Action selection.

The normative affective proposal is the next-fundamentals Gaussian with the
behaviour block left unconstrained, evaluated at the expected state of the
belief; its behaviour marginal says what an interactant would "normally" do.
The greedy policy draws candidate behaviours from that proposal, estimates
each candidate's one-step expected reward by sampling the transition, and
keeps the argmax.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .dynamics import AGENT
from .epa import BEHAVIOUR, as_triple
from .equations import EquationSet
from .filter import (
    AgentConfig,
    BeliefState,
    ConditionedFamily,
    ExpectedState,
    FundamentalsPosterior,
    _posterior_core,
    expected_state,
)


@dataclass
class RewardBreakdown:
    """Additive reward: application term plus sentiment (deflection) term."""

    r_x: float
    r_s: float
    w_x: float = 1.0
    w_s: float = 1.0

    @property
    def total(self) -> float:
        return self.w_x * self.r_x + self.w_s * self.r_s


@dataclass
class ActionChoice:
    a: Any
    b_a: np.ndarray

    def __post_init__(self):
        self.b_a = as_triple(self.b_a)


def evaluate_reward(f_prime, tau_prime, x_prime, a, cfg: AgentConfig, app) -> RewardBreakdown:
    """Reward at the sampled next state: weighted application reward plus the
    (non-positive) negative deflection."""
    f_prime = np.asarray(f_prime, dtype=float)
    tau_prime = np.asarray(tau_prime, dtype=float)
    r_x = float(app.reward(x_prime, a, f_prime, tau_prime))
    r_s = -float(np.sum((f_prime - tau_prime) ** 2))
    return RewardBreakdown(r_x=r_x, r_s=r_s, w_x=cfg.reward_weight_x, w_s=cfg.reward_weight_s)


def pi_dagger_params(
    state: BeliefState | ExpectedState,
    eq: EquationSet,
    cfg: AgentConfig,
    turn: str = AGENT,
) -> FundamentalsPosterior:
    """Normative affective action distribution at the expected state.

    Identical to the next-fundamentals posterior except that the behaviour
    block is never pinned, so the marginal over the behaviour is a proper
    3-D Gaussian proposal.
    """
    s_star = expected_state(state) if isinstance(state, BeliefState) else state
    batch = _posterior_core(
        s_star.f[None, :], s_star.tau[None, :], turn, None, eq, cfg, behaviour_free=True
    )
    cov = batch.cov[0]
    return FundamentalsPosterior(
        mean=batch.mean[0], covariance=cov, sigma_n=2.0 * cov, pinned_behaviour=None
    )


def sample_affective_action(
    posterior: FundamentalsPosterior, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    draws = posterior.sample(rng, size if size is not None else None)
    return draws[BEHAVIOUR] if size is None else draws[:, BEHAVIOUR]


def normative_action(
    belief: BeliefState,
    eq: EquationSet,
    cfg: AgentConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Average of pi_samples draws from the normative proposal's behaviour
    marginal; the default affective policy for plain simulations."""
    proposal = pi_dagger_params(belief, eq, cfg)
    draws = sample_affective_action(proposal, rng, size=cfg.pi_samples)
    return draws.mean(axis=0)


def greedy_action(
    belief: BeliefState,
    app,
    eq: EquationSet,
    cfg: AgentConfig,
    rng: np.random.Generator,
    candidate_count: int | None = None,
    integrand_samples: int | None = None,
) -> ActionChoice:
    """One-step lookahead: sample candidate behaviours from the normative
    proposal, estimate each (propositional, affective) pair's expected next
    reward by sampling the transition, and return the argmax.

    Ties resolve to the first pair in the seeded candidate order.
    """
    n_cand = candidate_count if candidate_count is not None else cfg.candidate_count
    n_samp = integrand_samples if integrand_samples is not None else cfg.integrand_samples
    s_star = expected_state(belief)
    proposal = pi_dagger_params(s_star, eq, cfg)
    candidates = sample_affective_action(proposal, rng, size=n_cand)
    family = ConditionedFamily(s_star.f, s_star.tau, AGENT, eq, cfg)

    actions = list(app.action_set(s_star.x))
    if not actions:
        raise ValueError("application exposes no propositional actions")

    best: tuple[int, int] | None = None
    best_value = -np.inf
    for ai, a in enumerate(actions):
        for ci in range(n_cand):
            b = candidates[ci]
            tau_prime = family.tau_prime(b)
            f_draws = family.sample(b, rng, n_samp)
            value = 0.0
            for f_prime in f_draws:
                x_prime = app.sample_x(s_star.x, f_prime, tau_prime, a, rng)
                value += evaluate_reward(f_prime, tau_prime, x_prime, a, cfg, app).total
            value /= n_samp
            if value > best_value:
                best_value = value
                best = (ai, ci)
    return ActionChoice(a=actions[best[0]], b_a=candidates[best[1]])


def planner_hook(
    belief: BeliefState,
    app,
    eq: EquationSet,
    cfg: AgentConfig,
    rng: np.random.Generator,
    horizon: int = 1,
    planner: Callable[..., ActionChoice] | None = None,
) -> ActionChoice:
    """Planning integration point.

    A supplied planner wins outright.  Otherwise horizon 0 pairs a single
    normative draw with the first propositional action, and any deeper
    horizon currently delegates to the greedy one-step policy.
    """
    if planner is not None:
        return planner(belief, app, eq, cfg, rng, horizon)
    if horizon == 0:
        s_star = expected_state(belief)
        proposal = pi_dagger_params(s_star, eq, cfg)
        b = sample_affective_action(proposal, rng)
        actions = list(app.action_set(s_star.x))
        return ActionChoice(a=actions[0], b_a=b)
    return greedy_action(belief, app, eq, cfg, rng)
