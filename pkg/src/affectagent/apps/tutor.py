"""Exam-practice application.

State is (difficulty, skill, turn) with three levels each for difficulty and
skill.  Skill drifts slowly; high deflection suppresses upward moves.  The
agent observes only success/failure of each answer, with a success
probability driven by how well the difficulty matches the skill.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dynamics import AGENT, CLIENT
from ..epa import as_triple
from ..equations import data_path
from .base import AppModel

N_LEVELS = 3
SKILL_GOAL = 2
STAY_PROB = 0.9
STAY_FLOOR = 0.5

# P(success | difficulty - skill) for deltas -2..+2; anything else is 0.
SUCCESS_TABLE = {-2: 0.999, -1: 0.99, 0: 0.9, 1: 0.5, 2: 0.1}

TUTOR_IDENTITY = np.array([1.5, 1.5, -0.2])
STUDENT_IDENTITY = np.array([1.5, 0.3, 0.8])


@dataclass(frozen=True)
class TutorState:
    difficulty: int
    skill: int
    turn: str

    def __post_init__(self):
        if not (0 <= self.difficulty < N_LEVELS and 0 <= self.skill < N_LEVELS):
            raise ValueError("difficulty and skill must be in 0..2")


def skill_kernel(skill: int, deflection_value: float, variant: str = "floored") -> np.ndarray:
    """Distribution over the next skill level.

    Base: stay with 0.9, the rest split over adjacent levels.  Rows at or
    below the current level are then scaled by min(1, deflection/2) and the
    whole thing renormalized, so low deflection favours climbing.  The
    literal recipe annihilates the stay probability at zero deflection; the
    default variant therefore floors stay at 0.5 after scaling.
    """
    if variant not in ("floored", "literal"):
        raise ValueError(f"unknown skill kernel variant {variant!r}")
    if deflection_value < 0:
        raise ValueError("deflection must be non-negative")
    base = np.zeros(N_LEVELS)
    base[skill] = STAY_PROB
    adjacent = [lvl for lvl in (skill - 1, skill + 1) if 0 <= lvl < N_LEVELS]
    for lvl in adjacent:
        base[lvl] = (1.0 - STAY_PROB) / len(adjacent)

    multiplier = deflection_value / 2.0
    if variant == "floored":
        multiplier = min(1.0, multiplier)
    scaled = base.copy()
    scaled[: skill + 1] *= multiplier

    total = scaled.sum()
    if total <= 0.0:
        # everything annihilated (top level, zero deflection): stay put
        out = np.zeros(N_LEVELS)
        out[skill] = 1.0
        return out
    out = scaled / total

    if variant == "floored" and out[skill] < STAY_FLOOR:
        rest = out.sum() - out[skill]
        out = out * ((1.0 - STAY_FLOOR) / rest) if rest > 0 else out
        out[skill] = STAY_FLOOR
        out /= out.sum()
    return out


def success_probability(difficulty: int, skill: int) -> float:
    return SUCCESS_TABLE.get(difficulty - skill, 0.0)


@dataclass(frozen=True)
class StatementEntry:
    statement_id: str
    context: str
    text: str
    label: str
    epa: tuple[float, float, float]

    @property
    def epa_array(self) -> np.ndarray:
        return np.array(self.epa)


class StatementTable:
    """Statement catalogue keyed by context, with nearest-EPA lookup."""

    def __init__(self, entries: list[StatementEntry]):
        if not entries:
            raise ValueError("no statements")
        self.entries = entries
        self._by_id = {e.statement_id: e for e in entries}

    @classmethod
    def from_csv(cls, path) -> "StatementTable":
        import csv

        entries = []
        counters: dict[str, int] = {}
        with open(path, newline="") as handle:
            for row in csv.DictReader(handle):
                context = row["context"].strip()
                counters[context] = counters.get(context, 0) + 1
                entries.append(
                    StatementEntry(
                        statement_id=f"{context}:{counters[context]}",
                        context=context,
                        text=row["text"],
                        label=row["label"].strip(),
                        epa=(float(row["E"]), float(row["P"]), float(row["A"])),
                    )
                )
        return cls(entries)

    def contexts(self) -> list[str]:
        seen = []
        for e in self.entries:
            if e.context not in seen:
                seen.append(e.context)
        return seen

    def in_context(self, context: str) -> list[StatementEntry]:
        found = [e for e in self.entries if e.context == context]
        if not found:
            raise KeyError(f"no statements for context {context!r}")
        return found

    def get(self, statement_id: str) -> StatementEntry:
        try:
            return self._by_id[statement_id]
        except KeyError:
            raise KeyError(f"unknown statement id {statement_id!r}") from None

    def map_statement(self, statement_id: str) -> np.ndarray:
        return self.get(statement_id).epa_array

    def nearest(self, b_a, context: str) -> StatementEntry:
        point = as_triple(b_a)
        pool = self.in_context(context)
        dists = [float(np.sum((e.epa_array - point) ** 2)) for e in pool]
        return pool[int(np.argmin(dists))]


def load_tutor_statements() -> StatementTable:
    return StatementTable.from_csv(data_path("tutor_statements.csv"))


@dataclass(frozen=True)
class Question:
    question_id: str
    difficulty: int
    prompt: str
    choices: tuple[str, ...]
    answer_index: int


class QuestionBank:
    def __init__(self, questions: list[Question]):
        if not questions:
            raise ValueError("no questions")
        self.questions = questions

    @classmethod
    def from_json(cls, path) -> "QuestionBank":
        items = json.loads(Path(path).read_text())
        return cls(
            [
                Question(
                    question_id=item["id"],
                    difficulty=int(item["difficulty"]),
                    prompt=item["prompt"],
                    choices=tuple(item["choices"]),
                    answer_index=int(item["answer_index"]),
                )
                for item in items
            ]
        )

    def at_difficulty(self, difficulty: int) -> list[Question]:
        found = [q for q in self.questions if q.difficulty == difficulty]
        if not found:
            raise KeyError(f"no questions at difficulty {difficulty}")
        return found

    def draw(self, difficulty: int, rng: np.random.Generator) -> Question:
        pool = self.at_difficulty(difficulty)
        return pool[int(rng.integers(len(pool)))]

    def get(self, question_id: str) -> Question:
        for q in self.questions:
            if q.question_id == question_id:
                return q
        raise KeyError(f"unknown question id {question_id!r}")


def load_question_bank() -> QuestionBank:
    return QuestionBank.from_json(data_path("gre_questions.json"))


class TutorApp(AppModel):
    """Skill/difficulty dynamics coupled to deflection."""

    def __init__(self, kernel_variant: str = "floored", initial_difficulty: int = 1):
        self.kernel_variant = kernel_variant
        self.initial_difficulty = initial_difficulty

    def init_x(self, rng):
        return TutorState(
            difficulty=self.initial_difficulty,
            skill=int(rng.integers(N_LEVELS)),
            turn=CLIENT,
        )

    def sample_x(self, x, f_prime, tau_prime, a, rng):
        if x.turn == CLIENT:
            d = float(np.sum((np.asarray(f_prime) - np.asarray(tau_prime)) ** 2))
            dist = skill_kernel(x.skill, d, self.kernel_variant)
            skill = int(rng.choice(N_LEVELS, p=dist))
            return TutorState(difficulty=x.difficulty, skill=skill, turn=AGENT)
        difficulty = x.difficulty if a is None else int(a)
        return TutorState(difficulty=difficulty, skill=x.skill, turn=CLIENT)

    def reward(self, x, a, f_prime, tau_prime) -> float:
        return -float((x.skill - SKILL_GOAL) ** 2)

    def observe_x(self, x, omega_x) -> float:
        p = success_probability(x.difficulty, x.skill)
        return p if omega_x else 1.0 - p

    def action_set(self, x) -> list:
        return list(range(N_LEVELS))

    def x_to_json(self, x):
        return {"difficulty": x.difficulty, "skill": x.skill, "turn": x.turn}

    def x_from_json(self, payload):
        return TutorState(
            difficulty=int(payload["difficulty"]),
            skill=int(payload["skill"]),
            turn=payload["turn"],
        )


def propositional_policy(belief, rng: np.random.Generator) -> int:
    """Heuristic difficulty choice: the student's mean (rounded) skill level
    90% of the time, one level higher (clamped) otherwise."""
    w = belief.normalized_weights()
    mean_skill = float(sum(wi * xi.skill for wi, xi in zip(w, belief.x)))
    level = int(np.floor(mean_skill + 0.5))
    level = max(0, min(N_LEVELS - 1, level))
    if rng.uniform() < 0.1:
        level = min(N_LEVELS - 1, level + 1)
    return level


def skill_marginal(belief) -> np.ndarray:
    w = belief.normalized_weights()
    out = np.zeros(N_LEVELS)
    for wi, xi in zip(w, belief.x):
        out[xi.skill] += wi
    return out
