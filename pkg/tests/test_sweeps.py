from pathlib import Path

import numpy as np
import pytest

from affectagent.report import (
    emit_coach_outputs,
    emit_dynamic_outputs,
    emit_static_outputs,
    write_csv,
)
from affectagent.sweeps import (
    IdentitySampler,
    gamma_rule,
    run_dynamic_sweep,
    run_static_sweep,
)

GOLDEN_STATIC_CSV = (
    "mode,sigma_e,n_particles,id_defl_agent_mean,id_defl_agent_sd,"
    "id_defl_client_mean,id_defl_client_sd,defl_agent_mean,defl_agent_sd,"
    "defl_client_mean,defl_client_sd,max_defl_agent,max_defl_client\n"
    "agent-id-hidden,0.5,8,7.44658,5.68775,5.97668,0.0925549,6.18513,2.00382,"
    "2.94328,0.408354,11.3449,8.00901\n"
)


def test_gamma_rule_floors_variance():
    assert gamma_rule(0.0) == pytest.approx(np.sqrt(0.5))
    assert gamma_rule(0.5) == pytest.approx(np.sqrt(0.5))
    assert gamma_rule(2.0) == pytest.approx(2.0)


def test_identity_sampler_matches_lexicon(sample_lexicon):
    sampler = IdentitySampler.from_lexicon(sample_lexicon)
    draws = np.array([sampler.draw(np.random.default_rng(i)) for i in range(2000)])
    assert np.allclose(draws.mean(axis=0), sampler.mean, atol=0.1)
    assert np.allclose(draws.std(axis=0), sampler.std, atol=0.1)


def test_unknown_mode_rejected(sample_eq, sample_lexicon):
    with pytest.raises(ValueError):
        run_static_sweep(sample_eq, sample_lexicon, "bogus", [5], [0.0], trials=1, reps=1, steps=1)


class TestStaticSweep:
    def test_golden_small_run(self, sample_eq, sample_lexicon, tmp_path):
        cells = run_static_sweep(
            sample_eq,
            sample_lexicon,
            "agent-id-hidden",
            n_list=[8],
            sigma_e_list=[0.5],
            trials=2,
            reps=1,
            steps=5,
            seed=7,
        )
        emit_static_outputs(cells, tmp_path)
        assert (tmp_path / "static.csv").read_text() == GOLDEN_STATIC_CSV
        assert (tmp_path / "static_id_deflection.png").stat().st_size > 0

    def test_worker_count_does_not_change_results(self, sample_eq, sample_lexicon):
        kwargs = dict(
            n_list=[10],
            sigma_e_list=[0.5],
            trials=2,
            reps=2,
            steps=6,
            seed=3,
        )
        a = run_static_sweep(sample_eq, sample_lexicon, "agent-id-hidden", workers=1, **kwargs)
        b = run_static_sweep(sample_eq, sample_lexicon, "agent-id-hidden", workers=8, **kwargs)
        for ca, cb in zip(a, b):
            assert ca.row() == cb.row()

    def test_both_known_id_deflection_tiny(self, sample_eq, sample_lexicon):
        cells = run_static_sweep(
            sample_eq,
            sample_lexicon,
            "both-known",
            n_list=[30],
            sigma_e_list=[0.5],
            trials=2,
            reps=2,
            steps=10,
            seed=5,
        )
        assert max(cells[0].id_deflection_mean) < 1e-3


class TestDynamicSweep:
    def test_cells_and_outputs(self, sample_eq, sample_lexicon, tmp_path):
        cells = run_dynamic_sweep(
            sample_eq,
            sample_lexicon,
            speeds=[0.2],
            sigma_e_list=[0.5],
            n_particles=40,
            episodes=2,
            steps=30,
            seed=2,
        )
        assert len(cells) == 1
        cell = cells[0]
        for d_m, (mean, sd) in cell.deflected_frames.items():
            assert 0 <= mean <= 30
        # thresholds are nested: more frames exceed 1.0 than 5.0
        assert cell.deflected_frames[1.0][0] >= cell.deflected_frames[5.0][0]
        paths = emit_dynamic_outputs(cells, tmp_path)
        assert (tmp_path / "dynamic.csv").exists()
        assert (tmp_path / "dynamic_deflected_frames.png").stat().st_size > 0


class TestReport:
    def test_empty_results_give_header_only(self, tmp_path):
        paths = emit_static_outputs([], tmp_path)
        text = (tmp_path / "static.csv").read_text()
        assert text.count("\n") == 1
        assert text.startswith("mode,sigma_e")
        paths = emit_dynamic_outputs([], tmp_path)
        assert (tmp_path / "dynamic.csv").read_text().count("\n") == 1
        emit_coach_outputs([], tmp_path)
        assert (tmp_path / "coach_compare.csv").read_text().count("\n") == 1

    def test_write_csv_round_trip(self, tmp_path):
        path = write_csv(tmp_path / "x.csv", "a,b", [[1, 2], [3, 4]])
        assert Path(path).read_text() == "a,b\n1,2\n3,4\n"
