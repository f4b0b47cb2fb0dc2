"""Sequential Monte Carlo belief tracking over sentiment state.

The state of one interactant is (fundamentals f, transients tau, application
state x).  The next-fundamentals distribution is the product of two Gaussian
potentials: the deflection potential psi tying f' to its predicted
transients, and the inertia potential xi tying identities to their previous
values (and, on the agent's own turn, pinning the behaviour block to the
chosen action).  Both potentials use the convention density ~ exp(-quad), so
the true sampling covariance is half the inverse quadratic coefficient; the
posterior object exposes both matrices.

Belief updates follow the bootstrap filter: resample, roughen unknown
identities with uniform noise, draw (f', tau', x'), then reweight by the
observation likelihoods with a zero-weight fallback.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .dynamics import AGENT, CLIENT, NumericalError, _check_turn, build_k_batch, hc_factors_batch
from .epa import ACTOR, BEHAVIOUR, OBJECT, as_sentiment, as_triple
from .equations import EquationSet

_FREE = np.array([0, 1, 2, 6, 7, 8])
_PINNED = np.array([3, 4, 5])

WEIGHT_FLOOR = 1e-300


@dataclass
class AgentConfig:
    """Tunable parameters of one agent.

    alpha is the (uniform diagonal) variance of the deflection potential;
    beta_a / beta_c are identity inertia standard deviations, beta0_a /
    beta0_c their initial counterparts (beta0_c may be a per-dimension
    array); gamma is the behaviour-observation standard deviation; gamma_d
    the discount; sigma_r the roughening half-width (None means N^(-1/3)).
    """

    alpha: float = 1.0
    beta_a: float = 0.01
    beta_c: float = 0.01
    beta0_a: float = 0.01
    beta0_c: Any = 0.01
    gamma: float = 1.0
    gamma_d: float = 0.9
    n_particles: int = 300
    sigma_r: float | None = None
    roughen_actor: bool = False
    roughen_object: bool = False
    resampling: str = "systematic"
    candidate_count: int = 100
    integrand_samples: int = 10
    reward_weight_x: float = 1.0
    reward_weight_s: float = 1.0
    pi_samples: int = 100
    rng_seed: int | None = None

    def __post_init__(self):
        for name in ("alpha", "beta_a", "beta_c", "beta0_a", "gamma"):
            if np.any(np.asarray(getattr(self, name)) <= 0):
                raise ValueError(f"{name} must be positive")
        if np.any(np.asarray(self.beta0_c) <= 0):
            raise ValueError("beta0_c must be positive")
        if self.sigma_r is not None and self.sigma_r < 0:
            raise ValueError("sigma_r must be non-negative")
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.resampling not in ("systematic", "multinomial"):
            raise ValueError(f"unknown resampling scheme {self.resampling!r}")

    def roughening(self) -> float:
        if self.sigma_r is not None:
            return self.sigma_r
        return roughening_sigma(self.n_particles)

    def beta0_c_vector(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.beta0_c, dtype=float), (3,)).copy()


def roughening_sigma(n: int, d: int = 3, k: float = 1.0) -> float:
    """Roughening half-width K * N^(-1/d) for N particles in d dimensions."""
    if n < 1:
        raise ValueError("n must be positive")
    return k * n ** (-1.0 / d)


@dataclass
class AgentAction:
    """Propositional payload plus the affective delivery."""

    a: Any = None
    b_a: np.ndarray | None = None

    def __post_init__(self):
        if self.b_a is not None:
            self.b_a = as_triple(self.b_a)


@dataclass
class FundamentalsPosterior:
    """Gaussian over the next fundamentals.

    ``sigma_n`` is the inverse quadratic coefficient of the potential
    (density ~ exp(-(x-mu)' sigma_n^{-1} (x-mu))); ``covariance`` is the true
    sampling covariance, sigma_n / 2.  When the behaviour block is pinned the
    corresponding rows and columns are zero and ``pinned_behaviour`` holds
    the exact value every sample carries.
    """

    mean: np.ndarray
    covariance: np.ndarray
    sigma_n: np.ndarray
    pinned_behaviour: np.ndarray | None = None
    _chol: np.ndarray | None = field(default=None, repr=False)

    def _active(self) -> np.ndarray:
        return _FREE if self.pinned_behaviour is not None else np.arange(9)

    def _chol_active(self) -> np.ndarray:
        if self._chol is None:
            idx = self._active()
            cov = self.covariance[np.ix_(idx, idx)]
            if np.allclose(cov, 0.0):
                self._chol = np.zeros((len(idx), len(idx)))
            else:
                try:
                    self._chol = np.linalg.cholesky(cov)
                except np.linalg.LinAlgError as exc:
                    raise NumericalError("posterior covariance is not positive-definite") from exc
        return self._chol

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        n = 1 if size is None else size
        idx = self._active()
        chol = self._chol_active()
        z = rng.standard_normal((n, len(idx)))
        draws = np.tile(self.mean, (n, 1))
        draws[:, idx] = self.mean[idx] + z @ chol.T
        if self.pinned_behaviour is not None:
            draws[:, _PINNED] = self.pinned_behaviour
        return draws[0] if size is None else draws

    def behaviour_marginal(self) -> tuple[np.ndarray, np.ndarray]:
        return self.mean[BEHAVIOUR].copy(), self.covariance[3:6, 3:6].copy()

    def log_density(self, x) -> float:
        """Log of the normalized Gaussian density (over the active block when
        the behaviour is pinned)."""
        point = as_sentiment(x)
        if self.pinned_behaviour is not None and not np.allclose(
            point[_PINNED], self.pinned_behaviour, atol=1e-12
        ):
            return -np.inf
        idx = self._active()
        diff = point[idx] - self.mean[idx]
        cov = self.covariance[np.ix_(idx, idx)]
        solve = np.linalg.solve(cov, diff)
        sign, logdet = np.linalg.slogdet(cov)
        if sign <= 0:
            raise NumericalError("posterior covariance is not positive-definite")
        return float(-0.5 * (diff @ solve) - 0.5 * logdet - 0.5 * len(idx) * np.log(2 * np.pi))


class _BatchPosterior:
    """Vectorized per-particle posterior used by the filter inner loop."""

    def __init__(self, mean, cov, pinned, h, c):
        self.mean = mean  # (n, 9)
        self.cov = cov  # (n, k, k) over active dims
        self.pinned = pinned  # (3,) or None
        self.h = h
        self.c = c
        try:
            self.chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("posterior covariance is not positive-definite") from exc

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        n = self.mean.shape[0]
        idx = _FREE if self.pinned is not None else np.arange(9)
        z = rng.standard_normal((n, len(idx)))
        draws = self.mean.copy()
        draws[:, idx] += np.einsum("nij,nj->ni", self.chol, z)
        if self.pinned is not None:
            draws[:, _PINNED] = self.pinned
        return draws


def _quad_lin(
    f: np.ndarray, tau: np.ndarray, turn: str, eq: EquationSet, cfg: AgentConfig
):
    """Quadratic coefficient and linear term of the combined potential
    (deflection plus identity inertia), per particle."""
    h, c = hc_factors_batch(tau, turn, eq)
    k = build_k_batch(h)
    inv_alpha = 1.0 / cfg.alpha
    quad = inv_alpha * np.einsum("nji,njk->nik", k, k)
    lin = inv_alpha * np.einsum("nji,nj->ni", k, c)

    prec = np.zeros(9)
    prec[ACTOR] = 1.0 / cfg.beta_a**2
    prec[OBJECT] = 1.0 / cfg.beta_c**2
    anchor = f.copy()
    anchor[:, BEHAVIOUR] = 0.0
    quad[:, np.arange(9), np.arange(9)] += prec
    lin += prec * anchor
    return quad, lin, h, c


def _posterior_core(
    f: np.ndarray,
    tau: np.ndarray,
    turn: str,
    b_a: np.ndarray | None,
    eq: EquationSet,
    cfg: AgentConfig,
    behaviour_free: bool = False,
) -> _BatchPosterior:
    """Shared Gaussian algebra.

    turn selects the dynamics orientation.  b_a pins the behaviour block via
    exact conditioning; behaviour_free leaves it unconstrained even on the
    agent turn (used by the action proposal).
    """
    _check_turn(turn)
    f = np.atleast_2d(np.asarray(f, dtype=float))
    tau = np.atleast_2d(np.asarray(tau, dtype=float))
    n = f.shape[0]
    quad, lin, h, c = _quad_lin(f, tau, turn, eq, cfg)

    if b_a is not None and not behaviour_free:
        v = as_triple(b_a)
        quad_uu = quad[:, _FREE][:, :, _FREE]
        quad_ub = quad[:, _FREE][:, :, _PINNED]
        rhs = lin[:, _FREE] - quad_ub @ v
        mean_u = np.linalg.solve(quad_uu, rhs[..., None])[..., 0]
        cov_u = np.linalg.inv(quad_uu) / 2.0
        mean = np.zeros((n, 9))
        mean[:, _FREE] = mean_u
        mean[:, _PINNED] = v
        return _BatchPosterior(mean, cov_u, v, h, c)

    if turn == AGENT and not behaviour_free:
        raise ValueError("the agent turn requires the chosen behaviour b_a")
    mean = np.linalg.solve(quad, lin[..., None])[..., 0]
    cov = np.linalg.inv(quad) / 2.0
    return _BatchPosterior(mean, cov, None, h, c)


class ConditionedFamily:
    """Next-fundamentals posteriors for one state, indexed by the pinned
    behaviour value.

    The quadratic is assembled once; conditioning on different behaviours
    only moves the mean, so candidate evaluation stays cheap.
    """

    def __init__(self, f, tau, turn: str, eq: EquationSet, cfg: AgentConfig):
        _check_turn(turn)
        quad, lin, h, c = _quad_lin(
            as_sentiment(f)[None, :], as_sentiment(tau)[None, :], turn, eq, cfg
        )
        self.h = h[0]
        self.c = c[0]
        self._quad_uu = quad[0][np.ix_(_FREE, _FREE)]
        self._quad_ub = quad[0][np.ix_(_FREE, _PINNED)]
        self._lin_u = lin[0][_FREE]
        cov_u = np.linalg.inv(self._quad_uu) / 2.0
        try:
            self._chol_u = np.linalg.cholesky(cov_u)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("posterior covariance is not positive-definite") from exc

    def mean(self, b_a) -> np.ndarray:
        v = as_triple(b_a)
        out = np.zeros(9)
        out[_FREE] = np.linalg.solve(self._quad_uu, self._lin_u - self._quad_ub @ v)
        out[_PINNED] = v
        return out

    def tau_prime(self, b_a) -> np.ndarray:
        return self.h @ as_triple(b_a) + self.c

    def sample(self, b_a, rng: np.random.Generator, size: int) -> np.ndarray:
        mean = self.mean(b_a)
        z = rng.standard_normal((size, 6))
        draws = np.tile(mean, (size, 1))
        draws[:, _FREE] += z @ self._chol_u.T
        return draws


def fundamentals_posterior(
    f,
    tau,
    turn: str,
    b_a,
    eq: EquationSet,
    cfg: AgentConfig,
) -> FundamentalsPosterior:
    """Posterior Gaussian over the next fundamentals for a single state."""
    if turn == AGENT and b_a is None:
        raise ValueError("the agent turn requires the chosen behaviour b_a")
    if turn == CLIENT and b_a is not None:
        raise ValueError("the client's behaviour is unconstrained; do not pass b_a")
    batch = _posterior_core(
        as_sentiment(f)[None, :], as_sentiment(tau)[None, :], turn, b_a, eq, cfg
    )
    mean = batch.mean[0]
    if batch.pinned is not None:
        cov = np.zeros((9, 9))
        cov[np.ix_(_FREE, _FREE)] = batch.cov[0]
        sigma_n = 2.0 * cov
    else:
        cov = batch.cov[0]
        sigma_n = 2.0 * cov
    return FundamentalsPosterior(
        mean=mean, covariance=cov, sigma_n=sigma_n, pinned_behaviour=batch.pinned
    )


def sample_fundamentals(
    posterior: FundamentalsPosterior, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    return posterior.sample(rng, size)


@dataclass
class BeliefState:
    """Weighted particle set {f, tau, x}."""

    f: np.ndarray  # (N, 9)
    tau: np.ndarray  # (N, 9)
    x: list
    weights: np.ndarray  # (N,)
    step: int = 0
    config: AgentConfig | None = None

    def __post_init__(self):
        self.f = np.atleast_2d(np.asarray(self.f, dtype=float))
        self.tau = np.atleast_2d(np.asarray(self.tau, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        n = self.f.shape[0]
        if self.tau.shape != (n, 9) or self.f.shape != (n, 9):
            raise ValueError("particle arrays must have shape (N, 9)")
        if len(self.x) != n or self.weights.shape != (n,):
            raise ValueError("particle components disagree on N")
        if n == 0:
            raise ValueError("belief must hold at least one particle")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise ValueError("weights must be finite and non-negative")

    @property
    def n(self) -> int:
        return self.f.shape[0]

    def normalized_weights(self) -> np.ndarray:
        total = float(np.sum(self.weights))
        if total <= WEIGHT_FLOOR:
            return np.full(self.n, 1.0 / self.n)
        return self.weights / total


@dataclass
class ExpectedState:
    f: np.ndarray
    tau: np.ndarray
    x: Any


def expected_state(belief: BeliefState) -> ExpectedState:
    """Weighted mean of the continuous components, weighted mode of the
    discrete application state."""
    w = belief.normalized_weights()
    f_star = w @ belief.f
    tau_star = w @ belief.tau
    tally: dict[Any, float] = {}
    for xi, wi in zip(belief.x, w):
        tally[xi] = tally.get(xi, 0.0) + float(wi)
    x_star = max(tally.items(), key=lambda kv: kv[1])[0]
    return ExpectedState(f=f_star, tau=tau_star, x=x_star)


def expected_deflection(belief: BeliefState) -> float:
    w = belief.normalized_weights()
    sq = np.sum((belief.f - belief.tau) ** 2, axis=1)
    return float(w @ sq)


def systematic_resample(weights: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Low-variance resampling: one uniform offset, n evenly spaced probes."""
    positions = (np.arange(n) + rng.uniform()) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return np.searchsorted(cumulative, positions)


def multinomial_resample(weights: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(len(weights), size=n, p=weights)


def propagate(
    belief: BeliefState,
    action: AgentAction | None,
    eq: EquationSet,
    cfg: AgentConfig,
    app,
    rng: np.random.Generator,
) -> BeliefState:
    """Predictive update: resample, roughen unknown identities, then draw
    (f', tau', x') per particle.

    ``action`` present means it is this agent's turn (the behaviour block is
    pinned to action.b_a); ``None`` means the other party acts.
    """
    n = cfg.n_particles
    w = belief.normalized_weights()
    if cfg.resampling == "multinomial":
        idx = multinomial_resample(w, n, rng)
    else:
        idx = systematic_resample(w, n, rng)
    f = belief.f[idx].copy()
    tau = belief.tau[idx].copy()
    xs = [belief.x[i] for i in idx]

    sigma_r = cfg.roughening()
    if sigma_r > 0:
        if cfg.roughen_actor:
            f[:, ACTOR] += rng.uniform(-sigma_r, sigma_r, size=(n, 3))
        if cfg.roughen_object:
            f[:, OBJECT] += rng.uniform(-sigma_r, sigma_r, size=(n, 3))

    if action is not None:
        turn = AGENT
        if action.b_a is None:
            raise ValueError("acting requires an affective behaviour b_a")
        post = _posterior_core(f, tau, turn, action.b_a, eq, cfg)
    else:
        turn = CLIENT
        post = _posterior_core(f, tau, turn, None, eq, cfg)

    f_new = post.sample(rng)
    tau_new = np.einsum("nij,nj->ni", post.h, f_new[:, BEHAVIOUR]) + post.c
    a = action.a if action is not None else None
    x_new = [
        app.sample_x(xs[i], f_new[i], tau_new[i], a, rng) for i in range(n)
    ]
    return BeliefState(
        f=f_new,
        tau=tau_new,
        x=x_new,
        weights=np.full(n, 1.0 / n),
        step=belief.step + 1,
        config=belief.config,
    )


def reweight(
    belief: BeliefState,
    omega_f,
    omega_x,
    cfg: AgentConfig,
    app,
) -> BeliefState:
    """Multiply weights by the observation likelihoods.

    If every weight underflows to zero the behaviour blocks are overwritten
    with the observation and the weights reset to uniform, so the belief
    never collapses entirely.
    """
    if omega_f is None and omega_x is None:
        return belief
    weights = belief.weights.astype(float).copy()
    if omega_f is not None:
        obs = as_triple(omega_f)
        sq = np.sum((belief.f[:, BEHAVIOUR] - obs) ** 2, axis=1)
        weights = weights * np.exp(-0.5 * sq / cfg.gamma**2)
    if omega_x is not None:
        lik = np.array([app.observe_x(xi, omega_x) for xi in belief.x])
        weights = weights * lik

    if float(np.sum(weights)) <= WEIGHT_FLOOR:
        f = belief.f.copy()
        if omega_f is not None:
            f[:, BEHAVIOUR] = as_triple(omega_f)
        return replace(belief, f=f, weights=np.full(belief.n, 1.0 / belief.n))
    return replace(belief, weights=weights)


def belief_to_dict(belief: BeliefState, app) -> dict:
    out = {
        "step": belief.step,
        "f": belief.f.tolist(),
        "tau": belief.tau.tolist(),
        "x": [app.x_to_json(xi) for xi in belief.x],
        "weights": belief.weights.tolist(),
    }
    if belief.config is not None:
        cfg = dict(vars(belief.config))
        cfg["beta0_c"] = np.asarray(cfg["beta0_c"]).tolist()
        out["config"] = cfg
    return out


def belief_from_dict(payload: dict, app, config: AgentConfig | None = None) -> BeliefState:
    if config is None and "config" in payload:
        config = AgentConfig(**payload["config"])
    return BeliefState(
        f=np.asarray(payload["f"], dtype=float),
        tau=np.asarray(payload["tau"], dtype=float),
        x=[app.x_from_json(item) for item in payload["x"]],
        weights=np.asarray(payload["weights"], dtype=float),
        step=int(payload["step"]),
        config=config,
    )


def belief_to_json(belief: BeliefState, app) -> str:
    return json.dumps(belief_to_dict(belief, app))


def belief_from_json(text: str, app, config: AgentConfig | None = None) -> BeliefState:
    return belief_from_dict(json.loads(text), app, config)
