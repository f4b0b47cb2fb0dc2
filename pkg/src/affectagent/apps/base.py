"""Application plug-in contract.

An application supplies the discrete side of the state: how it starts, how
it moves given the sampled sentiments and the propositional action, what it
observes, what the agent may do, and what the application-level reward is.
Every state object must be hashable (beliefs take weighted modes over them)
and JSON-convertible.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from ..dynamics import AGENT, CLIENT


def flip(turn: str) -> str:
    return CLIENT if turn == AGENT else AGENT


class AppModel(ABC):
    """Behavioural contract every application implements."""

    @abstractmethod
    def init_x(self, rng: np.random.Generator):
        """Draw an initial application state."""

    @abstractmethod
    def sample_x(self, x, f_prime, tau_prime, a, rng: np.random.Generator):
        """Draw the next application state.

        ``a`` is the agent's propositional action when the agent is acting
        and None on the client's turn.
        """

    @abstractmethod
    def reward(self, x, a, f_prime, tau_prime) -> float:
        """Application-goal reward term (the sentiment term is added by the
        policy)."""

    @abstractmethod
    def observe_x(self, x, omega_x) -> float:
        """Likelihood of the observation given the state."""

    @abstractmethod
    def action_set(self, x) -> list:
        """Finite propositional action set at this state."""

    def x_to_json(self, x) -> Any:
        return x

    def x_from_json(self, payload):
        return payload


@dataclass(frozen=True)
class TurnState:
    """Minimal state: only whose turn it is."""

    turn: str = AGENT


class TurnApp(AppModel):
    """Turn bookkeeping and nothing else; the app used by the plain
    two-agent simulations."""

    def __init__(self, first_turn: str = AGENT):
        self.first_turn = first_turn

    def init_x(self, rng):
        return TurnState(turn=self.first_turn)

    def sample_x(self, x, f_prime, tau_prime, a, rng):
        return replace(x, turn=flip(x.turn))

    def reward(self, x, a, f_prime, tau_prime) -> float:
        return 0.0

    def observe_x(self, x, omega_x) -> float:
        return 1.0

    def action_set(self, x) -> list:
        return [None]

    def x_to_json(self, x):
        return {"turn": x.turn}

    def x_from_json(self, payload):
        return TurnState(turn=payload["turn"])
