import numpy as np
import pytest

from affectagent.apps.tutor import (
    N_LEVELS,
    TutorApp,
    TutorState,
    load_question_bank,
    load_tutor_statements,
    propositional_policy,
    skill_kernel,
    skill_marginal,
    success_probability,
)
from affectagent.filter import BeliefState


@pytest.fixture(scope="module")
def statements():
    return load_tutor_statements()


def belief_with_skills(skills, weights=None):
    n = len(skills)
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, float)
    return BeliefState(
        f=np.zeros((n, 9)),
        tau=np.zeros((n, 9)),
        x=[TutorState(1, s, "agent") for s in skills],
        weights=w,
    )


class TestSkillKernel:
    @pytest.mark.parametrize("variant", ["floored", "literal"])
    def test_rows_sum_to_one_on_grid(self, variant):
        for skill in range(N_LEVELS):
            for d in np.arange(0.0, 10.5, 0.5):
                dist = skill_kernel(skill, float(d), variant)
                assert dist.shape == (N_LEVELS,)
                assert np.all(dist >= 0)
                assert dist.sum() == pytest.approx(1.0)

    def test_literal_zero_deflection_forces_up(self):
        dist = skill_kernel(1, 0.0, "literal")
        assert dist[2] == pytest.approx(1.0)
        assert dist[0] == dist[1] == 0.0

    def test_floored_zero_deflection_keeps_stay(self):
        dist = skill_kernel(1, 0.0, "floored")
        assert dist[1] == pytest.approx(0.5)
        assert dist[2] == pytest.approx(0.5)

    def test_bottom_level_remainder_goes_up(self):
        # only one adjacent level: the spare 0.1 all lands on level 1
        dist = skill_kernel(0, 2.0, "floored")
        assert dist[1] == pytest.approx(0.1)
        assert dist[0] == pytest.approx(0.9)
        assert dist[2] == 0.0

    @pytest.mark.parametrize("variant", ["floored", "literal"])
    def test_deflection_two_matches_base(self, variant):
        # multiplier is exactly one, so the base distribution survives
        dist = skill_kernel(1, 2.0, variant)
        assert np.allclose(dist, [0.05, 0.9, 0.05])

    @pytest.mark.parametrize("variant", ["floored", "literal"])
    def test_up_probability_monotone_in_deflection(self, variant):
        for skill in (0, 1):
            previous = None
            for d in np.arange(0.0, 10.25, 0.25):
                p_up = skill_kernel(skill, float(d), variant)[skill + 1 :].sum()
                if previous is not None:
                    assert p_up <= previous + 1e-12
                previous = p_up

    def test_top_level_zero_deflection_stays(self):
        dist = skill_kernel(2, 0.0, "literal")
        assert dist[2] == pytest.approx(1.0)


class TestObservation:
    def test_listed_probabilities(self):
        assert success_probability(0, 2) == 0.999
        assert success_probability(1, 2) == 0.99
        assert success_probability(1, 1) == 0.9
        assert success_probability(2, 1) == 0.5
        assert success_probability(2, 0) == 0.1

    def test_out_of_range_is_zero(self):
        assert success_probability(9, 0) == 0.0

    def test_likelihood_complements(self):
        app = TutorApp()
        x = TutorState(1, 1, "agent")
        assert app.observe_x(x, 1) == pytest.approx(0.9)
        assert app.observe_x(x, 0) == pytest.approx(0.1)


class TestStatements:
    def test_counts_per_context(self, statements):
        counts = {c: len(statements.in_context(c)) for c in statements.contexts()}
        assert counts == {
            "agent-correct": 13,
            "agent-incorrect": 11,
            "client-correct": 7,
            "client-incorrect": 9,
        }

    def test_known_entries(self, statements):
        praise = [e for e in statements.in_context("client-correct") if e.label == "praise"]
        assert len(praise) == 1
        assert praise[0].text == "You are an amazing tutor."
        assert praise[0].epa == (2.96, 2.5, 1.5)
        whine = [e for e in statements.in_context("client-correct") if e.label == "whine to"]
        assert whine[0].epa == (-1.23, 1.27, 0.31)

    def test_map_statement_and_exact_nearest(self, statements):
        entry = statements.nearest([2.96, 2.5, 1.5], "client-correct")
        assert entry.label == "praise"
        assert np.array_equal(statements.map_statement(entry.statement_id), [2.96, 2.5, 1.5])

    def test_every_entry_is_its_own_nearest(self, statements):
        for entry in statements.entries:
            found = statements.nearest(entry.epa_array, entry.context)
            assert found.epa == entry.epa

    def test_nearest_matches_exhaustive_scan(self, statements):
        rng = np.random.default_rng(0)
        for _ in range(50):
            point = rng.uniform(-4, 4, 3)
            context = statements.contexts()[rng.integers(4)]
            pool = statements.in_context(context)
            brute = min(pool, key=lambda e: float(np.sum((e.epa_array - point) ** 2)))
            assert statements.nearest(point, context).statement_id == brute.statement_id

    def test_unknown_statement_id(self, statements):
        with pytest.raises(KeyError):
            statements.get("nope:1")


class TestPropositionalPolicy:
    def test_mean_skill_rounding_and_mixture(self):
        belief = belief_with_skills([1, 1, 1, 2], weights=[0.3, 0.3, 0.2, 0.2])
        # mean skill 1.2 -> level 1, bumped to 2 about 10% of the time
        picks = [
            propositional_policy(belief, np.random.default_rng(seed)) for seed in range(4000)
        ]
        frac_high = np.mean([p == 2 for p in picks])
        assert np.all(np.isin(picks, [1, 2]))
        assert 0.08 < frac_high < 0.12

    def test_top_skill_clamps(self):
        belief = belief_with_skills([2, 2])
        for seed in range(200):
            assert propositional_policy(belief, np.random.default_rng(seed)) == 2

    def test_seeded_determinism(self):
        belief = belief_with_skills([0, 1, 2])
        a = [propositional_policy(belief, np.random.default_rng(7)) for _ in range(5)]
        assert len(set(a)) == 1


class TestTutorApp:
    def test_turn_flow(self):
        app = TutorApp()
        rng = np.random.default_rng(1)
        x = TutorState(1, 1, "client")
        f = np.zeros(9)
        moved = app.sample_x(x, f, f, None, rng)
        assert moved.turn == "agent"
        chosen = app.sample_x(moved, f, f, 2, rng)
        assert chosen.turn == "client"
        assert chosen.difficulty == 2
        assert chosen.skill == moved.skill

    def test_client_turn_uses_deflection(self):
        app = TutorApp()
        x = TutorState(1, 1, "client")
        f = np.zeros(9)
        tau_far = np.full(9, 3.0)
        ups = 0
        for seed in range(500):
            out = app.sample_x(x, f, tau_far, None, np.random.default_rng(seed))
            ups += out.skill > x.skill
        # deflection 81: upward moves are rare
        assert ups / 500 < 0.1

    def test_json_round_trip(self):
        app = TutorApp()
        x = TutorState(2, 0, "agent")
        assert app.x_from_json(app.x_to_json(x)) == x

    def test_skill_marginal(self):
        belief = belief_with_skills([0, 1, 1, 2], weights=[0.4, 0.2, 0.2, 0.2])
        assert np.allclose(skill_marginal(belief), [0.4, 0.4, 0.2])

    def test_state_validation(self):
        with pytest.raises(ValueError):
            TutorState(3, 0, "agent")


class TestQuestionBank:
    def test_bank_levels(self):
        bank = load_question_bank()
        for level in range(N_LEVELS):
            assert len(bank.at_difficulty(level)) >= 3

    def test_draw_and_get(self):
        bank = load_question_bank()
        q = bank.draw(1, np.random.default_rng(0))
        assert q.difficulty == 1
        assert bank.get(q.question_id) == q
        with pytest.raises(KeyError):
            bank.get("missing")
