"""One interactant: configuration, belief, and update entry points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .epa import ACTOR, OBJECT, as_triple
from .equations import EquationSet
from .filter import (
    AgentAction,
    AgentConfig,
    BeliefState,
    expected_deflection,
    expected_state,
    propagate,
    reweight,
)
from .policy import normative_action


@dataclass
class IdentityPrior:
    """Gaussian prior over one identity block."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = as_triple(self.mean)
        self.std = np.broadcast_to(np.asarray(self.std, dtype=float), (3,)).copy()
        if np.any(self.std <= 0):
            raise ValueError("prior standard deviations must be positive")


class Agent:
    """Belief owner tying the filter, the policy and an application model."""

    def __init__(
        self,
        config: AgentConfig,
        eq: EquationSet,
        app,
        self_identity,
        other_prior: IdentityPrior,
        rng: np.random.Generator,
        name: str = "agent",
    ):
        self.name = name
        self.config = config
        self.eq = eq
        self.app = app
        self.self_identity = as_triple(self_identity)
        self.other_prior = other_prior
        self.belief = self._init_belief(rng)

    def _init_belief(self, rng: np.random.Generator) -> BeliefState:
        n = self.config.n_particles
        f = np.zeros((n, 9))
        f[:, ACTOR] = self.self_identity + self.config.beta0_a * rng.standard_normal((n, 3))
        f[:, OBJECT] = self.other_prior.mean + self.other_prior.std * rng.standard_normal((n, 3))
        # the behaviour block plays no role before the first update
        tau = f.copy()
        xs = [self.app.init_x(rng) for _ in range(n)]
        return BeliefState(
            f=f, tau=tau, x=xs, weights=np.full(n, 1.0 / n), step=0, config=self.config
        )

    def pin_self_identity(self, value) -> None:
        """Overwrite the own-identity block of every particle (used when the
        true identity is externally scripted)."""
        self.belief.f[:, ACTOR] = as_triple(value)

    def choose_action(self, rng: np.random.Generator) -> np.ndarray:
        """Normative affective action (averaged proposal draws)."""
        return normative_action(self.belief, self.eq, self.config, rng)

    def update_as_actor(self, action: AgentAction, rng: np.random.Generator, omega_x=None) -> None:
        self.belief = propagate(self.belief, action, self.eq, self.config, self.app, rng)
        self.belief = reweight(self.belief, None, omega_x, self.config, self.app)

    def update_as_observer(self, omega_f, rng: np.random.Generator, omega_x=None) -> None:
        self.belief = propagate(self.belief, None, self.eq, self.config, self.app, rng)
        self.belief = reweight(self.belief, omega_f, omega_x, self.config, self.app)

    def expected_fundamentals(self) -> np.ndarray:
        return expected_state(self.belief).f

    def expected_self_identity(self) -> np.ndarray:
        return self.expected_fundamentals()[ACTOR]

    def expected_other_identity(self) -> np.ndarray:
        return self.expected_fundamentals()[OBJECT]

    def expected_deflection(self) -> float:
        return expected_deflection(self.belief)
