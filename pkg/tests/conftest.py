import numpy as np
import pytest

from affectagent.equations import DEFAULT_TERMS, EquationSet, load_sample_equations, load_sample_lexicon


def make_random_equations(seed: int) -> EquationSet:
    """Random coefficient matrix on the standard term structure, shaped like
    the shipped sample: damped linear blocks, small sparse interactions."""
    rng = np.random.default_rng(seed)
    n_terms = len(DEFAULT_TERMS)
    m = np.zeros((9, n_terms))
    m[:, 0] = rng.uniform(-0.1, 0.1, size=9)
    m[0:3, 1:4] = rng.uniform(0.3, 0.5) * np.eye(3) + rng.uniform(-0.08, 0.08, (3, 3))
    m[6:9, 7:10] = rng.uniform(0.3, 0.5) * np.eye(3) + rng.uniform(-0.08, 0.08, (3, 3))
    m[3:6, 4:7] = rng.uniform(0.4, 0.6) * np.eye(3) + rng.uniform(-0.05, 0.05, (3, 3))
    m[0:3, 4:7] = rng.uniform(-0.15, 0.15, (3, 3))
    m[6:9, 4:7] = rng.uniform(-0.15, 0.15, (3, 3))
    inter = rng.uniform(-0.05, 0.05, size=(9, n_terms - 10))
    inter[rng.random(inter.shape) < 0.5] = 0.0
    m[:, 10:] = inter
    return EquationSet(m=np.clip(m, -0.5, 0.5), culture=f"random-{seed}")


@pytest.fixture(scope="session")
def sample_eq() -> EquationSet:
    return load_sample_equations()


@pytest.fixture(scope="session")
def sample_lexicon():
    return load_sample_lexicon()
