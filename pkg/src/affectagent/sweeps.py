"""Batch simulation sweeps.

Static sweeps measure how well two interacting agents recover each other's
identities across particle counts and environment noise levels; dynamic
sweeps track a scripted, continuously shifting identity.  Cells are
embarrassingly parallel; every episode's seed derives from (root seed, cell,
trial, rep), so results are identical at any worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import IdentityPrior
from .equations import EquationSet, Lexicon
from .filter import AgentConfig
from .harness import AgentSpec, EpisodeTrace, IdentityShift, run_episode, run_many

MODES = ("both-known", "agent-id-known", "agent-id-hidden")
DEFAULT_THRESHOLDS = (1.0, 2.0, 3.0, 5.0)

KNOWN_PRIOR_STD = 1e-3
KNOWN_BETA = 1e-3


def gamma_rule(sigma_e: float) -> float:
    """Observation-model standard deviation used by the sweeps: the model
    variance is the true noise variance floored at 0.5."""
    return float(np.sqrt(max(0.5, sigma_e**2)))


@dataclass
class IdentitySampler:
    """Per-dimension Gaussian fit to the identity dictionary."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def from_lexicon(cls, lexicon: Lexicon) -> "IdentitySampler":
        return cls(mean=lexicon.mean("identity"), std=np.sqrt(lexicon.variance("identity")))

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        return rng.normal(self.mean, self.std)


def _episode_seed(root: int, *key: int) -> int:
    return int(np.random.SeedSequence(root, spawn_key=key).generate_state(1, dtype=np.uint64)[0])


def _spec(identity, n, gamma, other_known: bool, other_identity, sampler) -> AgentSpec:
    if other_known:
        prior = IdentityPrior(mean=other_identity, std=KNOWN_PRIOR_STD)
        roughen = False
    else:
        prior = IdentityPrior(mean=sampler.mean, std=sampler.std)
        roughen = True
    cfg = AgentConfig(
        n_particles=n,
        beta_a=KNOWN_BETA,
        beta_c=KNOWN_BETA,
        beta0_a=KNOWN_BETA,
        gamma=gamma,
        roughen_object=roughen,
        sigma_r=None if roughen else 0.0,
    )
    return AgentSpec(identity=identity, config=cfg, other_prior=prior)


def _mode_specs(mode: str, ids, n, gamma, sampler):
    id_a, id_b = ids
    if mode == "both-known":
        return (
            _spec(id_a, n, gamma, True, id_b, sampler),
            _spec(id_b, n, gamma, True, id_a, sampler),
        )
    if mode == "agent-id-known":
        # the client knows the agent; the agent must learn the client
        return (
            _spec(id_a, n, gamma, False, id_b, sampler),
            _spec(id_b, n, gamma, True, id_a, sampler),
        )
    if mode == "agent-id-hidden":
        return (
            _spec(id_a, n, gamma, False, id_b, sampler),
            _spec(id_b, n, gamma, False, id_a, sampler),
        )
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


@dataclass
class StaticCell:
    mode: str
    sigma_e: float
    n_particles: int
    id_deflection_mean: list[float]
    id_deflection_sd: list[float]
    deflection_mean: list[float]
    deflection_sd: list[float]
    max_deflection: list[float]
    final_id_deflections: list[list[float]] = field(repr=False, default_factory=list)

    HEADER = (
        "mode,sigma_e,n_particles,"
        "id_defl_agent_mean,id_defl_agent_sd,id_defl_client_mean,id_defl_client_sd,"
        "defl_agent_mean,defl_agent_sd,defl_client_mean,defl_client_sd,"
        "max_defl_agent,max_defl_client"
    )

    def row(self) -> list:
        return [
            self.mode,
            self.sigma_e,
            self.n_particles,
            self.id_deflection_mean[0],
            self.id_deflection_sd[0],
            self.id_deflection_mean[1],
            self.id_deflection_sd[1],
            self.deflection_mean[0],
            self.deflection_sd[0],
            self.deflection_mean[1],
            self.deflection_sd[1],
            self.max_deflection[0],
            self.max_deflection[1],
        ]


def run_static_sweep(
    eq: EquationSet,
    lexicon: Lexicon,
    mode: str,
    n_list: list[int],
    sigma_e_list: list[float],
    trials: int = 20,
    reps: int = 10,
    steps: int = 50,
    seed: int = 0,
    workers: int = 1,
) -> list[StaticCell]:
    """Identity-learning protocol: fresh identity pair per trial, several
    reps per trial, summary statistics per (noise, particle-count) cell."""
    sampler = IdentitySampler.from_lexicon(lexicon)
    cells = []
    for cell_idx, (sigma_e, n) in enumerate(
        [(s, n) for s in sigma_e_list for n in n_list]
    ):
        gamma = gamma_rule(sigma_e)
        tasks = []
        for trial in range(trials):
            id_rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(cell_idx, trial, 909)))
            )
            ids = (sampler.draw(id_rng), sampler.draw(id_rng))
            specs = _mode_specs(mode, ids, n, gamma, sampler)
            for rep in range(reps):
                ep_seed = _episode_seed(seed, cell_idx, trial, rep)
                tasks.append(
                    lambda specs=specs, ep_seed=ep_seed: run_episode(
                        specs, eq, steps, sigma_e, ep_seed
                    )
                )
        traces: list[EpisodeTrace] = run_many(tasks, workers)
        finals = np.array(
            [[t.final_id_deflection(0), t.final_id_deflection(1)] for t in traces]
        )
        means = np.array([[t.mean_deflection(0), t.mean_deflection(1)] for t in traces])
        maxes = np.array([[t.max_deflection(0), t.max_deflection(1)] for t in traces])
        cells.append(
            StaticCell(
                mode=mode,
                sigma_e=sigma_e,
                n_particles=n,
                id_deflection_mean=finals.mean(axis=0).tolist(),
                id_deflection_sd=finals.std(axis=0).tolist(),
                deflection_mean=means.mean(axis=0).tolist(),
                deflection_sd=means.std(axis=0).tolist(),
                max_deflection=maxes.max(axis=0).tolist(),
                final_id_deflections=finals.tolist(),
            )
        )
    return cells


@dataclass
class DynamicCell:
    sigma_e: float
    speed: float
    n_particles: int
    id_deflection_mean: list[float]
    deflection_mean: list[float]
    deflected_frames: dict[float, tuple[float, float]]
    frames_per_episode: list[list[int]] = field(repr=False, default_factory=list)

    HEADER = (
        "sigma_e,speed,n_particles,id_defl_agent_mean,id_defl_client_mean,"
        "defl_agent_mean,defl_client_mean,"
        "frames_dm1_mean,frames_dm1_sd,frames_dm2_mean,frames_dm2_sd,"
        "frames_dm3_mean,frames_dm3_sd,frames_dm5_mean,frames_dm5_sd"
    )

    def row(self) -> list:
        out = [
            self.sigma_e,
            self.speed,
            self.n_particles,
            self.id_deflection_mean[0],
            self.id_deflection_mean[1],
            self.deflection_mean[0],
            self.deflection_mean[1],
        ]
        for d_m in DEFAULT_THRESHOLDS:
            mean, sd = self.deflected_frames[d_m]
            out.extend([mean, sd])
        return out


def run_dynamic_sweep(
    eq: EquationSet,
    lexicon: Lexicon,
    speeds: list[float],
    sigma_e_list: list[float],
    n_particles: int = 250,
    dwell: int = 20,
    steps: int = 200,
    episodes: int = 10,
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS,
    seed: int = 0,
    workers: int = 1,
    single_shift: bool = False,
    roughening_k: float = 1.6,
) -> list[DynamicCell]:
    """Shifting-identity protocol: the client walks between two anchor
    identities while the agent tracks it; reports how many frames the
    agent's estimate strays beyond each threshold.

    Tracking a moving identity needs more particle diversity than learning a
    fixed one, so the roughening constant defaults above one here.
    """
    sampler = IdentitySampler.from_lexicon(lexicon)
    sigma_r = roughening_k * n_particles ** (-1.0 / 3.0)
    cells = []
    for cell_idx, (sigma_e, speed) in enumerate(
        [(s, v) for s in sigma_e_list for v in speeds]
    ):
        gamma = gamma_rule(sigma_e)

        def one_episode(ep: int, sigma_e=sigma_e, speed=speed, gamma=gamma, cell_idx=cell_idx):
            id_rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(cell_idx, ep, 909)))
            )
            agent_id = sampler.draw(id_rng)
            first = sampler.draw(id_rng)
            second = sampler.draw(id_rng)
            tracker = _spec(agent_id, n_particles, gamma, False, None, sampler)
            tracker.config.sigma_r = sigma_r
            specs = (
                tracker,
                _spec(first, n_particles, gamma, True, agent_id, sampler),
            )
            schedule = IdentityShift(
                first=first, second=second, speed=speed, dwell=dwell, repeat=not single_shift
            )
            return run_episode(
                specs,
                eq,
                steps,
                sigma_e,
                _episode_seed(seed, cell_idx, ep),
                schedule=schedule,
                scheduled_agent=1,
            )

        traces = run_many(
            [lambda ep=ep: one_episode(ep) for ep in range(episodes)], workers
        )
        series = [t.id_deflection_series(0) for t in traces]
        frames = {
            d_m: np.array([int(np.sum(s > d_m)) for s in series]) for d_m in thresholds
        }
        cells.append(
            DynamicCell(
                sigma_e=sigma_e,
                speed=speed,
                n_particles=n_particles,
                id_deflection_mean=[
                    float(np.mean([s.mean() for s in series])),
                    float(np.mean([t.id_deflection_series(1).mean() for t in traces])),
                ],
                deflection_mean=[
                    float(np.mean([t.mean_deflection(0) for t in traces])),
                    float(np.mean([t.mean_deflection(1) for t in traces])),
                ],
                deflected_frames={
                    d_m: (float(v.mean()), float(v.std())) for d_m, v in frames.items()
                },
                frames_per_episode=[v.tolist() for v in frames.values()],
            )
        )
    return cells
