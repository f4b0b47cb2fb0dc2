from .base import AppModel, TurnApp, TurnState
from .coach import CoachApp, CoachParams, CoachState, PlanGraph, coach_prompt_policy
from .tutor import TutorApp, TutorState, StatementTable

__all__ = [
    "AppModel",
    "TurnApp",
    "TurnState",
    "TutorApp",
    "TutorState",
    "StatementTable",
    "CoachApp",
    "CoachParams",
    "CoachState",
    "PlanGraph",
    "coach_prompt_policy",
]
