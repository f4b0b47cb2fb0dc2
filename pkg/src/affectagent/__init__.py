"""Decision-theoretic affective agents.

Tracks a joint belief over interactant identities and behaviours in EPA
sentiment space with a particle filter, predicts what an interactant would
normally do via a deflection-minimizing action distribution, and selects
actions that combine application goals with affective alignment.
"""

from .dynamics import (
    AGENT,
    CLIENT,
    HCFactors,
    NumericalError,
    build_k,
    eval_g,
    hc_factors,
    interact_step,
    optimal_behaviour,
    optimal_identity,
    oracle_trace,
    transient_update,
)
from .engine import Agent, IdentityPrior
from .epa import DeflectionWeights, combine, deflection, flat_index
from .equations import (
    DEFAULT_TERMS,
    EquationSet,
    GTermSpec,
    Lexicon,
    load_equations,
    load_lexicon,
    load_sample_equations,
    load_sample_lexicon,
)
from .filter import (
    AgentAction,
    AgentConfig,
    BeliefState,
    FundamentalsPosterior,
    expected_deflection,
    expected_state,
    fundamentals_posterior,
    propagate,
    reweight,
    roughening_sigma,
    sample_fundamentals,
)
from .harness import AgentSpec, EpisodeTrace, IdentityShift, id_deflection, run_episode
from .policy import (
    ActionChoice,
    RewardBreakdown,
    evaluate_reward,
    greedy_action,
    pi_dagger_params,
    planner_hook,
)

__version__ = "0.1.0"

__all__ = [
    "AGENT",
    "CLIENT",
    "ActionChoice",
    "Agent",
    "AgentAction",
    "AgentConfig",
    "AgentSpec",
    "BeliefState",
    "DEFAULT_TERMS",
    "DeflectionWeights",
    "EpisodeTrace",
    "EquationSet",
    "FundamentalsPosterior",
    "GTermSpec",
    "HCFactors",
    "IdentityPrior",
    "IdentityShift",
    "Lexicon",
    "NumericalError",
    "RewardBreakdown",
    "build_k",
    "combine",
    "deflection",
    "eval_g",
    "evaluate_reward",
    "expected_deflection",
    "expected_state",
    "flat_index",
    "fundamentals_posterior",
    "greedy_action",
    "hc_factors",
    "id_deflection",
    "interact_step",
    "load_equations",
    "load_lexicon",
    "load_sample_equations",
    "load_sample_lexicon",
    "optimal_behaviour",
    "optimal_identity",
    "oracle_trace",
    "pi_dagger_params",
    "planner_hook",
    "propagate",
    "reweight",
    "roughening_sigma",
    "run_episode",
    "sample_fundamentals",
    "transient_update",
]
