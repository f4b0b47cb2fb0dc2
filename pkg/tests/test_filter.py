import numpy as np
import pytest

from affectagent import dynamics as dyn
from affectagent.apps.base import TurnApp, TurnState
from affectagent.epa import ACTOR, BEHAVIOUR, OBJECT
from affectagent.equations import EquationSet
from affectagent.filter import (
    AgentAction,
    AgentConfig,
    BeliefState,
    FundamentalsPosterior,
    belief_from_json,
    belief_to_json,
    expected_deflection,
    expected_state,
    fundamentals_posterior,
    propagate,
    reweight,
    roughening_sigma,
    sample_fundamentals,
    systematic_resample,
)

from conftest import make_random_equations
from gridtools import behaviour_residual_parts


def mk_belief(f, tau, weights=None, n=None, config=None):
    f = np.atleast_2d(f)
    count = f.shape[0]
    tau = np.atleast_2d(tau)
    w = np.full(count, 1.0 / count) if weights is None else np.asarray(weights, float)
    return BeliefState(
        f=f,
        tau=tau,
        x=[TurnState("agent")] * count,
        weights=w,
        config=config,
    )


class TestConfig:
    def test_defaults(self):
        cfg = AgentConfig()
        assert cfg.alpha == 1.0
        assert cfg.beta_a == cfg.beta_c == 0.01
        assert cfg.gamma == 1.0
        assert cfg.gamma_d == 0.9
        assert cfg.n_particles == 300
        assert cfg.roughening() == pytest.approx(300 ** (-1 / 3))

    def test_validation(self):
        with pytest.raises(ValueError):
            AgentConfig(alpha=0.0)
        with pytest.raises(ValueError):
            AgentConfig(n_particles=0)
        with pytest.raises(ValueError):
            AgentConfig(sigma_r=-0.1)
        with pytest.raises(ValueError):
            AgentConfig(resampling="bogus")


def test_roughening_sigma_values():
    assert roughening_sigma(1000) == pytest.approx(0.1)
    assert roughening_sigma(8) == pytest.approx(0.5)
    assert roughening_sigma(300) == pytest.approx(300 ** (-1 / 3))
    assert roughening_sigma(300) == pytest.approx(0.1494, abs=2e-4)
    assert roughening_sigma(16, d=4, k=2.0) == pytest.approx(1.0)


class TestPosterior:
    def test_product_of_gaussians_case(self):
        # constant-only coefficients with swap-symmetric blocks so the
        # client-turn row permutation is invisible
        rng = np.random.default_rng(0)
        m = np.zeros((9, 29))
        block = rng.uniform(-1, 1, 3)
        c0 = np.concatenate([block, rng.uniform(-1, 1, 3), block])
        m[:, 0] = c0
        cfg = AgentConfig(alpha=1.0, beta_a=1.0, beta_c=1.0)
        f = rng.uniform(-1, 1, 9)
        post = fundamentals_posterior(f, np.zeros(9), "client", None, EquationSet(m=m), cfg)
        # identity blocks: product of two unit-variance Gaussians
        idx = [0, 1, 2, 6, 7, 8]
        assert np.allclose(post.mean[idx], (c0[idx] + f[idx]) / 2)
        assert np.allclose(np.diag(post.sigma_n)[idx], 0.5)
        # behaviour is unconstrained on the client turn: single potential
        assert np.allclose(post.mean[BEHAVIOUR], c0[3:6])
        assert np.allclose(np.diag(post.sigma_n)[3:6], 1.0)
        # the true sampling covariance is half the potential form
        assert np.allclose(post.covariance, post.sigma_n / 2)

    def test_identity_freeze_in_small_beta_limit(self, sample_eq):
        rng = np.random.default_rng(1)
        f = rng.uniform(-2, 2, 9)
        tau = rng.uniform(-2, 2, 9)
        cfg = AgentConfig(beta_a=1e-4, beta_c=1e-4)
        post = fundamentals_posterior(f, tau, "client", None, sample_eq, cfg)
        assert np.allclose(post.mean[ACTOR], f[ACTOR], atol=1e-6)
        assert np.allclose(post.mean[OBJECT], f[OBJECT], atol=1e-6)

    def test_agent_turn_requires_action(self, sample_eq):
        cfg = AgentConfig()
        with pytest.raises(ValueError):
            fundamentals_posterior(np.zeros(9), np.zeros(9), "agent", None, sample_eq, cfg)
        with pytest.raises(ValueError):
            fundamentals_posterior(
                np.zeros(9), np.zeros(9), "client", np.zeros(3), sample_eq, cfg
            )

    def test_log_density_matches_potential(self):
        # log N(mu_n, covariance) == -(psi + xi) + const, checked through the
        # raw M.G residual path
        rng = np.random.default_rng(2)
        for seed in range(5):
            eq = make_random_equations(40 + seed)
            cfg = AgentConfig(
                alpha=float(rng.uniform(0.5, 2.0)),
                beta_a=float(rng.uniform(0.2, 1.0)),
                beta_c=float(rng.uniform(0.2, 1.0)),
            )
            f = rng.uniform(-2, 2, 9)
            tau = rng.uniform(-2, 2, 9)
            post = fundamentals_posterior(f, tau, "client", None, eq, cfg)
            consts = []
            for _ in range(40):
                x = post.mean + rng.normal(0, 1.0, 9)
                pot = dyn.psi(x, tau, "client", eq, alpha=cfg.alpha) + dyn.xi(
                    x, f, None, "client", cfg.beta_a, cfg.beta_c
                )
                consts.append(post.log_density(x) + pot)
            assert np.max(consts) - np.min(consts) < 1e-9

    def test_agent_turn_pinning_bit_exact(self, sample_eq):
        rng = np.random.default_rng(3)
        b_a = np.array([0.4, -1.2, 0.3])
        cfg = AgentConfig()
        post = fundamentals_posterior(
            rng.uniform(-1, 1, 9), rng.uniform(-1, 1, 9), "agent", b_a, sample_eq, cfg
        )
        draws = post.sample(np.random.default_rng(4), 500)
        assert np.all(draws[:, BEHAVIOUR] == b_a)
        assert np.array_equal(post.mean[BEHAVIOUR], b_a)
        assert np.all(post.covariance[BEHAVIOUR, :] == 0.0)

    def test_behaviour_marginal_matches_quadrature(self, sample_eq):
        # identities pinned by a tight prior; brute-force moments of
        # exp(-psi) over the behaviour block
        rng = np.random.default_rng(5)
        f = rng.uniform(-1.5, 1.5, 9)
        tau = rng.uniform(-1.5, 1.5, 9)
        cfg = AgentConfig(beta_a=1e-3, beta_c=1e-3)
        post = fundamentals_posterior(f, tau, "client", None, sample_eq, cfg)
        mean_b, cov_b = post.behaviour_marginal()

        base, design = behaviour_residual_parts(f, tau, "client", sample_eq)
        # centre the integration window with an independent coarse scan so
        # no Gaussian mass is truncated
        from gridtools import grid_argmin

        centre = grid_argmin(base, design, span=6.0, step=0.2)
        axis = np.arange(-7.0, 7.0 + 0.025, 0.05)
        tail1, tail2 = np.meshgrid(axis, axis, indexing="ij")
        tail = np.column_stack([tail1.ravel(), tail2.ravel()])
        total = 0.0
        moment1 = np.zeros(3)
        moment2 = np.zeros((3, 3))
        for b0 in axis:
            points = np.column_stack([np.full(len(tail), b0), tail]) + centre
            log_w = -np.sum((base[None, :] + points @ design.T) ** 2, axis=1)
            w = np.exp(log_w)
            total += w.sum()
            moment1 += w @ points
            moment2 += (points * w[:, None]).T @ points
        q_mean = moment1 / total
        q_cov = moment2 / total - np.outer(q_mean, q_mean)
        assert np.allclose(mean_b, q_mean, atol=1e-3)
        assert np.allclose(cov_b, q_cov, atol=1e-3)

    def test_ordering_follows_potential(self, sample_eq):
        # lower psi + xi exactly when higher posterior density
        rng = np.random.default_rng(6)
        cfg = AgentConfig(beta_a=0.5, beta_c=0.5)
        f = rng.uniform(-1, 1, 9)
        tau = rng.uniform(-1, 1, 9)
        post = fundamentals_posterior(f, tau, "client", None, sample_eq, cfg)
        for _ in range(50):
            x1 = post.mean + rng.normal(0, 1.2, 9)
            x2 = post.mean + rng.normal(0, 1.2, 9)
            pot1 = dyn.psi(x1, tau, "client", sample_eq) + dyn.xi(
                x1, f, None, "client", cfg.beta_a, cfg.beta_c
            )
            pot2 = dyn.psi(x2, tau, "client", sample_eq) + dyn.xi(
                x2, f, None, "client", cfg.beta_a, cfg.beta_c
            )
            assert (post.log_density(x1) > post.log_density(x2)) == (pot1 < pot2)


class TestSampling:
    def test_zero_covariance_returns_mean(self):
        post = FundamentalsPosterior(
            mean=np.arange(9.0), covariance=np.zeros((9, 9)), sigma_n=np.zeros((9, 9))
        )
        assert np.array_equal(sample_fundamentals(post, np.random.default_rng(0)), np.arange(9.0))

    def test_empirical_moments(self, sample_eq):
        rng = np.random.default_rng(7)
        cfg = AgentConfig(beta_a=0.5, beta_c=0.5)
        post = fundamentals_posterior(
            rng.uniform(-1, 1, 9), rng.uniform(-1, 1, 9), "client", None, sample_eq, cfg
        )
        n = 100_000
        draws = post.sample(np.random.default_rng(8), n)
        sd = np.sqrt(np.diag(post.covariance))
        assert np.all(np.abs(draws.mean(axis=0) - post.mean) < 3 * sd / np.sqrt(n) + 1e-12)
        emp_cov = np.cov(draws.T)
        rel = np.linalg.norm(emp_cov - post.covariance) / np.linalg.norm(post.covariance)
        assert rel < 0.05

    def test_sampled_frequency_ranks_with_potential(self, sample_eq):
        # five candidate points along a ray from the mean: sampled
        # nearest-candidate counts must rank inversely with psi + xi
        rng = np.random.default_rng(9)
        cfg = AgentConfig(beta_a=0.6, beta_c=0.6)
        f = rng.uniform(-1, 1, 9)
        tau = rng.uniform(-1, 1, 9)
        post = fundamentals_posterior(f, tau, "client", None, sample_eq, cfg)
        direction = rng.normal(size=9)
        direction /= np.linalg.norm(direction)
        candidates = np.array([post.mean + t * direction for t in (0.0, 0.7, 1.4, 2.1, 2.8)])
        draws = post.sample(np.random.default_rng(10), 100_000)
        d2 = ((draws[:, None, :] - candidates[None, :, :]) ** 2).sum(axis=2)
        counts = np.bincount(np.argmin(d2, axis=1), minlength=5)
        pots = [
            dyn.psi(c, tau, "client", sample_eq)
            + dyn.xi(c, f, None, "client", cfg.beta_a, cfg.beta_c)
            for c in candidates
        ]
        # Spearman rank correlation between counts and potentials
        def ranks(v):
            return np.argsort(np.argsort(v)).astype(float)

        rc, rp = ranks(counts), ranks(pots)
        rho = np.corrcoef(rc, rp)[0, 1]
        assert rho < 0


class TestPropagateReweight:
    def test_single_particle_near_deterministic(self, sample_eq):
        cfg = AgentConfig(
            alpha=1e-10, beta_a=1e-6, beta_c=1e-6, n_particles=1, sigma_r=0.0
        )
        rng = np.random.default_rng(11)
        f = rng.uniform(-1, 1, 9)
        tau = rng.uniform(-1, 1, 9)
        belief = mk_belief(f, tau, config=cfg)
        b_a = np.array([0.2, 0.1, -0.5])
        post = fundamentals_posterior(f, tau, "agent", b_a, sample_eq, cfg)
        out = propagate(
            belief, AgentAction(a=None, b_a=b_a), sample_eq, cfg, TurnApp(), rng
        )
        assert np.allclose(out.f[0], post.mean, atol=1e-3)
        assert np.allclose(
            out.tau[0], dyn.transient_update(tau, out.f[0], "agent", sample_eq), atol=1e-12
        )

    def test_sigma_r_zero_is_reproducible(self, sample_eq):
        cfg = AgentConfig(n_particles=40, sigma_r=0.0, roughen_object=True)
        rng = np.random.default_rng(12)
        f = np.tile(rng.uniform(-1, 1, 9), (40, 1))
        tau = np.tile(rng.uniform(-1, 1, 9), (40, 1))
        belief = mk_belief(f, tau, config=cfg)
        out1 = propagate(belief, None, sample_eq, cfg, TurnApp(), np.random.default_rng(99))
        out2 = propagate(belief, None, sample_eq, cfg, TurnApp(), np.random.default_rng(99))
        assert np.array_equal(out1.f, out2.f)
        assert np.array_equal(out1.tau, out2.tau)

    def test_roughening_keeps_diversity(self, sample_eq):
        n = 300
        cfg = AgentConfig(n_particles=n, beta_c=0.1, roughen_object=True)
        sigma_r = cfg.roughening()
        rng = np.random.default_rng(13)
        f = np.tile(rng.uniform(-1, 1, 9), (n, 1))
        tau = np.tile(rng.uniform(-1, 1, 9), (n, 1))
        belief = mk_belief(f, tau, config=cfg)
        out = propagate(belief, None, sample_eq, cfg, TurnApp(), np.random.default_rng(14))
        variances = out.f[:, OBJECT].var(axis=0)
        assert np.all(variances >= sigma_r**2 / 3)

    def test_reweight_peaks_at_observation(self, sample_eq):
        rng = np.random.default_rng(15)
        n = 20
        f = rng.uniform(-2, 2, (n, 9))
        belief = mk_belief(f, f.copy(), config=AgentConfig(n_particles=n))
        target = 7
        obs = f[target, BEHAVIOUR]
        out = reweight(belief, obs, None, AgentConfig(), TurnApp())
        assert int(np.argmax(out.weights)) == target

    def test_reweight_without_observations_is_identity(self, sample_eq):
        rng = np.random.default_rng(16)
        f = rng.uniform(-1, 1, (5, 9))
        w = np.array([0.1, 0.2, 0.3, 0.25, 0.15])
        belief = mk_belief(f, f, weights=w)
        out = reweight(belief, None, None, AgentConfig(), TurnApp())
        assert np.array_equal(out.weights, w)

    def test_zero_weight_fallback(self):
        rng = np.random.default_rng(17)
        f = rng.uniform(-1, 1, (10, 9))
        belief = mk_belief(f, f)
        obs = np.array([500.0, -500.0, 500.0])
        cfg = AgentConfig(gamma=0.05)
        out = reweight(belief, obs, None, cfg, TurnApp())
        assert np.all(out.f[:, BEHAVIOUR] == obs)
        assert np.all(out.weights > 0)

    def test_some_weight_always_survives(self, sample_eq):
        rng = np.random.default_rng(18)
        f = rng.uniform(-1, 1, (30, 9))
        belief = mk_belief(f, f)
        for scale in (0.1, 10.0, 1000.0):
            out = reweight(
                belief, np.full(3, scale), None, AgentConfig(gamma=0.3), TurnApp()
            )
            assert np.any(out.weights > 0)


class TestExpectations:
    def test_single_particle(self):
        f = np.arange(9.0)
        tau = f + 1.0
        belief = mk_belief(f, tau)
        s = expected_state(belief)
        assert np.array_equal(s.f, f)
        assert np.array_equal(s.tau, tau)
        assert expected_deflection(belief) == pytest.approx(9.0)

    def test_two_equal_weight_particles(self):
        f = np.stack([np.zeros(9), np.ones(9)])
        belief = mk_belief(f, f.copy())
        s = expected_state(belief)
        assert np.allclose(s.f, 0.5)

    def test_three_particle_hand_sum(self):
        f = np.stack([np.zeros(9), np.ones(9), np.full(9, 2.0)])
        tau = np.zeros((3, 9))
        w = np.array([0.5, 0.3, 0.2])
        belief = mk_belief(f, tau, weights=w)
        s = expected_state(belief)
        assert np.allclose(s.f, np.full(9, 0.3 + 0.4))
        # deflections: 0, 9, 36 -> 0.5*0 + 0.3*9 + 0.2*36
        assert expected_deflection(belief) == pytest.approx(0.3 * 9 + 0.2 * 36)

    def test_discrete_mode(self):
        f = np.zeros((3, 9))
        belief = BeliefState(
            f=f,
            tau=f.copy(),
            x=[TurnState("agent"), TurnState("client"), TurnState("client")],
            weights=np.array([0.5, 0.26, 0.24]),
        )
        assert expected_state(belief).x == TurnState("agent")


def test_systematic_resample_uniform_keeps_everyone():
    w = np.full(10, 0.1)
    idx = systematic_resample(w, 10, np.random.default_rng(0))
    assert sorted(idx.tolist()) == list(range(10))


def test_belief_serialization_round_trip(sample_eq):
    rng = np.random.default_rng(19)
    n = 8
    f = rng.uniform(-1, 1, (n, 9))
    tau = rng.uniform(-1, 1, (n, 9))
    app = TurnApp()
    belief = BeliefState(
        f=f,
        tau=tau,
        x=[TurnState("agent")] * n,
        weights=rng.uniform(0.1, 1.0, n),
        step=4,
        config=AgentConfig(n_particles=n, gamma=0.7),
    )
    text = belief_to_json(belief, app)
    again = belief_from_json(text, app)
    assert np.allclose(again.f, belief.f)
    assert np.allclose(again.tau, belief.tau)
    assert again.step == 4
    assert again.x == belief.x
    assert again.config is not None
    assert again.config.gamma == 0.7
    assert again.config.n_particles == n
