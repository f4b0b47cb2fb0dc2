import numpy as np
import pytest

from affectagent.apps.coach import (
    BOSS_IDENTITY,
    CoachApp,
    CoachParams,
    CoachState,
    ELDER_IDENTITY,
    PlanGraph,
    awareness_marginal,
    coach_prompt_policy,
    coach_transition_dist,
    load_plan_graph,
    run_coach_episode,
    sample_world_transition,
)
from affectagent.filter import BeliefState


@pytest.fixture(scope="module")
def graph():
    return load_plan_graph()


@pytest.fixture(scope="module")
def params():
    return CoachParams()


def state(ps=1, aware=True, prompted=False):
    return CoachState(planstep=ps, aware=aware, prompted=prompted, turn="client")


def dist_map(dist):
    return {(s.planstep, s.aware): p for s, p in dist}


def belief_with_awareness(frac):
    n = 100
    k = int(round(frac * n))
    xs = [CoachState(0, i < k, False, "client") for i in range(n)]
    return BeliefState(
        f=np.zeros((n, 9)), tau=np.zeros((n, 9)), x=xs, weights=np.full(n, 1.0 / n)
    )


class TestPlanGraph:
    def test_sample_graph_shape(self, graph):
        assert graph.terminal == 7
        targets = {t for t, _ in graph.branches(0)}
        assert targets == {1, 2}
        assert sum(p for _, p in graph.branches(0)) == pytest.approx(1.0)

    def test_every_nonterminal_has_edges(self, graph):
        for node in range(7):
            assert graph.branches(node)

    def test_validation(self):
        with pytest.raises(ValueError):
            PlanGraph(edges={0: []}, terminal=1)
        with pytest.raises(ValueError):
            PlanGraph(edges={0: [(1, 0.8), (1, 0.4)]}, terminal=1)


class TestKernel:
    @pytest.mark.parametrize("aware", [True, False])
    @pytest.mark.parametrize("prompted", [True, False])
    def test_distribution_is_proper(self, graph, params, aware, prompted):
        for d in np.arange(0.0, 10.5, 0.5):
            dist = coach_transition_dist(state(aware=aware, prompted=prompted), d, graph, params)
            probs = [p for _, p in dist]
            assert all(p >= -1e-12 for p in probs)
            assert sum(probs) == pytest.approx(1.0)

    def test_aware_unprompted_advances_or_loses_awareness(self, graph, params):
        dist = dist_map(coach_transition_dist(state(ps=1), 0.0, graph, params))
        assert dist[(3, True)] == pytest.approx(params.advance_prob(0.0))
        assert dist[(1, False)] == pytest.approx(1.0 - params.advance_prob(0.0))
        # no mass on staying aware without advancing: the loss is deterministic
        assert (1, True) not in dist

    def test_unaware_prompted_follows_and_wakes(self, graph, params):
        dist = dist_map(
            coach_transition_dist(state(ps=1, aware=False, prompted=True), 0.0, graph, params)
        )
        assert dist[(3, True)] == pytest.approx(params.follow_prob(0.0))
        assert dist[(1, False)] == pytest.approx(1.0 - params.follow_prob(0.0))

    def test_unaware_unprompted_mostly_stalls(self, graph, params):
        dist = dist_map(
            coach_transition_dist(state(ps=2, aware=False, prompted=False), 1.0, graph, params)
        )
        assert dist[(2, False)] == pytest.approx(params.unaware_stall)
        assert dist[(2, True)] == pytest.approx(1.0 - params.unaware_stall)

    def test_aware_prompted_confusion_rises_with_deflection(self, graph, params):
        low = dist_map(coach_transition_dist(state(prompted=True), 3.3, graph, params))
        high = dist_map(coach_transition_dist(state(prompted=True), 6.0, graph, params))
        assert high[(1, False)] > low.get((1, False), 0.0)

    def test_advance_monotone_nonincreasing_in_deflection(self, graph, params):
        previous = None
        for d in np.arange(0.0, 10.25, 0.25):
            dist = dist_map(coach_transition_dist(state(ps=3), float(d), graph, params))
            p_adv = dist.get((4, True), 0.0)
            if previous is not None:
                assert p_adv <= previous + 1e-12
            previous = p_adv

    def test_confusion_monotone_nondecreasing(self, params):
        previous = None
        for d in np.arange(0.0, 10.25, 0.25):
            c = params.confusion_prob(float(d))
            if previous is not None:
                assert c >= previous - 1e-12
            previous = c

    def test_terminal_is_absorbing(self, graph, params):
        dist = coach_transition_dist(state(ps=7), 0.0, graph, params)
        assert len(dist) == 1
        assert dist[0][0].planstep == 7

    def test_branch_split_at_start(self, graph, params):
        dist = dist_map(coach_transition_dist(state(ps=0), 0.0, graph, params))
        p_soap_first = dist[(1, True)]
        p_water_first = dist[(2, True)]
        assert p_soap_first / (p_soap_first + p_water_first) == pytest.approx(0.3)

    def test_single_uniform_world_sampler(self, graph, params):
        s = state(ps=1)
        dist = coach_transition_dist(s, 0.5, graph, params)
        acc = 0.0
        for target, prob in dist:
            mid = acc + prob / 2
            assert sample_world_transition(s, 0.5, graph, params, mid) == target
            acc += prob


class TestPromptPolicy:
    def test_below_threshold_prompts(self):
        assert coach_prompt_policy(belief_with_awareness(0.39)) is True

    def test_above_threshold_quiet(self):
        assert coach_prompt_policy(belief_with_awareness(0.72)) is False

    def test_exactly_at_threshold_is_quiet(self):
        assert coach_prompt_policy(belief_with_awareness(0.40)) is False

    def test_awareness_marginal(self):
        assert awareness_marginal(belief_with_awareness(0.25)) == pytest.approx(0.25)


class TestCoachApp:
    def test_agent_turn_records_prompt(self):
        app = CoachApp()
        x = CoachState(2, True, False, "agent")
        out = app.sample_x(x, np.zeros(9), np.zeros(9), True, np.random.default_rng(0))
        assert out.prompted is True
        assert out.turn == "client"
        assert out.planstep == 2

    def test_observe_x_is_exact_planstep(self):
        app = CoachApp()
        x = CoachState(3, True, False, "client")
        assert app.observe_x(x, 3) == 1.0
        assert app.observe_x(x, 4) == 0.0

    def test_json_round_trip(self):
        app = CoachApp()
        x = CoachState(5, False, True, "agent")
        assert app.x_from_json(app.x_to_json(x)) == x


class TestEpisodes:
    def test_episode_terminates_and_counts(self, sample_eq):
        ep = run_coach_episode(ELDER_IDENTITY, "adaptive", 5, sample_eq, n_particles=80)
        assert 1 <= ep.interactions <= 50
        assert 0 <= ep.last_planstep <= 7
        assert ep.finished == (ep.last_planstep == 7)
        assert len(ep.records) == ep.interactions

    def test_identical_seed_reproduces(self, sample_eq):
        a = run_coach_episode(ELDER_IDENTITY, "adaptive", 9, sample_eq, n_particles=60)
        b = run_coach_episode(ELDER_IDENTITY, "adaptive", 9, sample_eq, n_particles=60)
        assert a.interactions == b.interactions
        assert [r.b_a for r in a.records] == [r.b_a for r in b.records]

    def test_world_stream_identical_across_policies(self, sample_eq):
        # the propositional randomness must not depend on the affective
        # policy: client-turn world draws align step for step
        a = run_coach_episode(BOSS_IDENTITY, "command", 13, sample_eq, n_particles=60)
        b = run_coach_episode(BOSS_IDENTITY, "confer", 13, sample_eq, n_particles=60)
        u_a = [r.world_u for r in a.records if r.world_u is not None]
        u_b = [r.world_u for r in b.records if r.world_u is not None]
        shared = min(len(u_a), len(u_b))
        assert shared > 5
        assert u_a[:shared] == u_b[:shared]
