"""Deterministic impression-formation machinery.

Evaluates the feature vector G, refactors ``M @ G`` into the linear form
``H @ f_b + C`` (H collects every coefficient multiplying a behaviour
component, C the rest), updates transients, and solves the classic
closed-form minimum-deflection problems: the optimal behaviour with
identities held fixed and the optimal identity with the behaviour held
fixed.  These closed forms serve as the deterministic reference for the
probabilistic machinery elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .epa import (
    ACTOR,
    BEHAVIOUR,
    D_DIMENSION,
    OBJECT,
    SWAP_AC,
    as_sentiment,
    deflection,
    flat_index,
    swap_actor_object,
)
from .equations import EquationSet, GTermSpec

AGENT = "agent"
CLIENT = "client"

COND_LIMIT = 1e12


class NumericalError(RuntimeError):
    """Raised when a linear system is too ill-conditioned to trust."""


def _check_turn(turn: str) -> str:
    if turn not in (AGENT, CLIENT):
        raise ValueError(f"turn must be '{AGENT}' or '{CLIENT}', got {turn!r}")
    return turn


def _guard_condition(mat: np.ndarray, what: str) -> None:
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NumericalError(f"{what} is ill-conditioned (cond={cond:.3e})")


def eval_g(f_prime, tau, turn: str, spec: GTermSpec) -> np.ndarray:
    """Evaluate the feature terms at (f', tau).

    The client turn is the agent turn evaluated on tau with the actor and
    object blocks swapped.
    """
    _check_turn(turn)
    fp = as_sentiment(f_prime)
    t = as_sentiment(tau)
    if turn == CLIENT:
        t = swap_actor_object(t)
    out = np.empty(len(spec))
    for j, term in enumerate(spec.terms):
        value = 1.0
        for source, obj, dim in term:
            if source == "tau":
                value *= t[flat_index(obj, dim)]
            else:
                value *= fp[flat_index("b", dim)]
        out[j] = value
    return out


@dataclass
class HCFactors:
    """Linear refactoring of M @ G: predicted transients = H @ f_b + C."""

    h: np.ndarray  # (9, 3)
    c: np.ndarray  # (9,)

    @property
    def h_actor(self) -> np.ndarray:
        return self.h[ACTOR]

    @property
    def h_behaviour(self) -> np.ndarray:
        return self.h[BEHAVIOUR]

    @property
    def h_object(self) -> np.ndarray:
        return self.h[OBJECT]


def hc_factors(tau, turn: str, eq: EquationSet) -> HCFactors:
    h, c = hc_factors_batch(np.asarray(tau, dtype=float)[None, :], turn, eq)
    return HCFactors(h=h[0], c=c[0])


def hc_factors_batch(tau: np.ndarray, turn: str, eq: EquationSet):
    """Vectorized H/C extraction for a stack of transient vectors.

    tau has shape (n, 9); returns (n, 9, 3) and (n, 9).  On the client turn
    the actor/object swap applies both to the tau references inside the
    terms and to the rows of the coefficient matrix.
    """
    _check_turn(turn)
    tau = np.asarray(tau, dtype=float)
    if tau.ndim != 2 or tau.shape[1] != 9:
        raise ValueError("expected transients with shape (n, 9)")
    n = tau.shape[0]
    t = tau[:, SWAP_AC] if turn == CLIENT else tau
    m = eq.m[SWAP_AC] if turn == CLIENT else eq.m

    h = np.zeros((n, 9, 3))
    c = np.zeros((n, 9))
    for j, term in enumerate(eq.terms.terms):
        tau_part = np.ones(n)
        f_dim = None
        for source, obj, dim in term:
            if source == "tau":
                tau_part = tau_part * t[:, flat_index(obj, dim)]
            else:
                f_dim = D_DIMENSION[dim]
        contribution = tau_part[:, None] * m[:, j][None, :]
        if f_dim is None:
            c += contribution
        else:
            h[:, :, f_dim] += contribution
    return h, c


def transient_update(tau, f_prime, turn: str, eq: EquationSet) -> np.ndarray:
    """Deterministic next transients: H(tau, turn) @ f'_b + C(tau, turn)."""
    hc = hc_factors(tau, turn, eq)
    fp = as_sentiment(f_prime)
    return hc.h @ fp[BEHAVIOUR] + hc.c


def predicted_transients(tau, turn: str, eq: EquationSet, f_b) -> np.ndarray:
    hc = hc_factors(tau, turn, eq)
    return hc.h @ np.asarray(f_b, dtype=float) + hc.c


def build_k(hc: HCFactors) -> np.ndarray:
    """Assemble the 9x9 block matrix whose action on f' gives the
    deflection residual K @ f' - C."""
    i3 = np.eye(3)
    k = np.zeros((9, 9))
    k[ACTOR, ACTOR] = i3
    k[ACTOR, BEHAVIOUR] = -hc.h_actor
    k[BEHAVIOUR, BEHAVIOUR] = i3 - hc.h_behaviour
    k[OBJECT, BEHAVIOUR] = -hc.h_object
    k[OBJECT, OBJECT] = i3
    return k


def build_k_batch(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    k = np.zeros((n, 9, 9))
    i3 = np.eye(3)
    k[:, ACTOR, ACTOR] = i3
    k[:, OBJECT, OBJECT] = i3
    k[:, 0:3, 3:6] = -h[:, 0:3, :]
    k[:, 3:6, 3:6] = i3 - h[:, 3:6, :]
    k[:, 6:9, 3:6] = -h[:, 6:9, :]
    return k


def psi(f_prime, tau, turn: str, eq: EquationSet, alpha: float = 1.0) -> float:
    """Deflection potential between f' and its predicted transients.

    Computed from the raw M @ G product (not the H/C refactoring) so it can
    serve as an independent check of the linear-algebra paths.  ``alpha`` is
    the per-component variance of the diagonal weighting.
    """
    fp = as_sentiment(f_prime)
    m = eq.m[SWAP_AC] if _check_turn(turn) == CLIENT else eq.m
    residual = fp - m @ eval_g(fp, tau, turn, eq.terms)
    return float(residual @ residual) / alpha


def xi(f_prime, f_anchor, b_a, turn: str, beta_a: float, beta_c: float) -> float:
    """Inertia potential keeping identities near their previous values and,
    on the agent turn, the behaviour at the chosen action."""
    fp = as_sentiment(f_prime)
    anchor = as_sentiment(f_anchor)
    total = float(np.sum((fp[ACTOR] - anchor[ACTOR]) ** 2)) / beta_a**2
    total += float(np.sum((fp[OBJECT] - anchor[OBJECT]) ** 2)) / beta_c**2
    if _check_turn(turn) == AGENT:
        if b_a is None:
            raise ValueError("agent turn requires the chosen behaviour")
        if not np.allclose(fp[BEHAVIOUR], np.asarray(b_a, dtype=float)):
            return np.inf
    return total


def _solve_quadratic_block(design: np.ndarray, base: np.ndarray, what: str) -> np.ndarray:
    """Minimize || base + design @ v ||^2 over the 3-vector v."""
    gram = design.T @ design
    _guard_condition(gram, what)
    return np.linalg.solve(gram, -design.T @ base)


def optimal_behaviour(f, tau, turn: str, eq: EquationSet, alpha: float = 1.0) -> np.ndarray:
    """Deflection-minimizing behaviour with both identities held fixed.

    Minimizes the quadratic residual [f_a - H_a b - C_a; (I - H_b) b - C_b;
    f_c - H_c b - C_c] over the behaviour b; with a uniform diagonal
    weighting the scale alpha does not move the minimizer.
    """
    fv = as_sentiment(f)
    hc = hc_factors(tau, turn, eq)
    design = np.vstack(
        [-hc.h_actor, np.eye(3) - hc.h_behaviour, -hc.h_object]
    )
    base = np.concatenate(
        [fv[ACTOR] - hc.c[ACTOR], -hc.c[BEHAVIOUR], fv[OBJECT] - hc.c[OBJECT]]
    )
    return _solve_quadratic_block(design, base, "behaviour system z")


def optimal_identity(role: str, f, tau, turn: str, eq: EquationSet, alpha: float = 1.0) -> np.ndarray:
    """Deflection-minimizing actor or object identity with the behaviour
    (and the other identity) held fixed."""
    if role not in ("actor", "object"):
        raise ValueError("role must be 'actor' or 'object'")
    fv = as_sentiment(f)
    hc = hc_factors(tau, turn, eq)
    predicted = hc.h @ fv[BEHAVIOUR] + hc.c
    residual = fv - predicted
    block = ACTOR if role == "actor" else OBJECT
    design = np.zeros((9, 3))
    design[block] = np.eye(3)
    base = residual.copy()
    base[block] = -predicted[block]
    return _solve_quadratic_block(design, base, f"{role} identity system")


@dataclass
class OracleStep:
    turn: str
    behaviour: np.ndarray
    f_prime: np.ndarray
    tau_prime: np.ndarray
    deflection: float


def interact_step(f, tau, acting_turn: str, eq: EquationSet) -> OracleStep:
    """One deterministic step: choose the optimal behaviour, realize it in
    the fundamentals, and update the transients."""
    behaviour = optimal_behaviour(f, tau, acting_turn, eq)
    f_prime = as_sentiment(f).copy()
    f_prime[BEHAVIOUR] = behaviour
    tau_prime = transient_update(tau, f_prime, acting_turn, eq)
    return OracleStep(
        turn=acting_turn,
        behaviour=behaviour,
        f_prime=f_prime,
        tau_prime=tau_prime,
        deflection=deflection(f_prime, tau_prime),
    )


def oracle_trace(
    agent_identity,
    client_identity,
    eq: EquationSet,
    steps: int,
    first_turn: str = AGENT,
) -> list[OracleStep]:
    """Alternating-turn deterministic interaction between two fixed
    identities, starting from transients equal to the fundamentals."""
    f = np.concatenate([np.asarray(agent_identity, float), np.zeros(3), np.asarray(client_identity, float)])
    tau = f.copy()
    turn = _check_turn(first_turn)
    trace = []
    for _ in range(steps):
        step = interact_step(f, tau, turn, eq)
        trace.append(step)
        f = step.f_prime
        tau = step.tau_prime
        turn = CLIENT if turn == AGENT else AGENT
    return trace
