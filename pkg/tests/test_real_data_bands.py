"""Quantitative sweep bands that only hold with a real, fitted equation set
and identity dictionary.  Supply them via AFFECTAGENT_DATA (equations.txt +
identities.csv); with only the synthetic sample data these tests skip and
the trend/ordering properties in the acceptance gate apply instead.
"""

import os
from pathlib import Path

import pytest

from affectagent.equations import DATA_ENV_VAR, load_equations, load_lexicon
from affectagent.sweeps import run_static_sweep

def _real_data_root():
    root = os.environ.get(DATA_ENV_VAR)
    if not root:
        return None
    path = Path(root)
    if (path / "equations.txt").exists() and (path / "identities.csv").exists():
        return path
    return None


pytestmark = pytest.mark.skipif(
    _real_data_root() is None,
    reason=f"set {DATA_ENV_VAR} to a directory with equations.txt and identities.csv",
)


@pytest.fixture(scope="module")
def real_data():
    root = _real_data_root()
    return load_equations(root / "equations.txt"), load_lexicon(root / "identities.csv")


def test_hidden_identity_band_low_noise(real_data):
    # noise-free learning at N=50: final agent id-deflection settles well
    # below 1 on average
    eq, lex = real_data
    cells = run_static_sweep(
        eq, lex, "agent-id-hidden", n_list=[50], sigma_e_list=[0.0],
        trials=20, reps=10, steps=50, seed=0, workers=8,
    )
    assert cells[0].id_deflection_mean[0] < 1.0


def test_hidden_identity_band_noisy_small_filter(real_data):
    # N=5 under unit noise: client deflection lands in the reported 6-7 range
    eq, lex = real_data
    cells = run_static_sweep(
        eq, lex, "agent-id-hidden", n_list=[5], sigma_e_list=[1.0],
        trials=20, reps=10, steps=50, seed=0, workers=8,
    )
    assert 4.0 < cells[0].deflection_mean[1] < 10.0
