import numpy as np
import pytest

from biwave.config import config_from_mapping
from biwave.runner import (
    invariants_suite,
    run,
    study_convergence,
    study_perturbation,
    study_scaling,
)


def wave_cfg(**over):
    base = {
        "dim": 1,
        "grid_size": 32,
        "manifold": "sphere:2",
        "scheme": "strang",
        "dt": 1e-3,
        "t_end": 0.3,
        "output_every": 0.1,
        "initial": "traveling_wave",
        "wave_k": 1,
        "wave_omega": 1.0,
    }
    base.update(over)
    return config_from_mapping(base)


class TestRun:
    def test_row_count_matches_cadence(self):
        res = run(wave_cfg(t_end=1.0))
        assert res.exit_code == 0
        assert len(res.records) == 11
        assert res.records[-1].time == pytest.approx(1.0)

    def test_zero_duration_single_record(self):
        res = run(wave_cfg(t_end=0.0))
        assert res.exit_code == 0
        assert len(res.records) == 1

    def test_u0_distance_tracked(self):
        res = run(wave_cfg(t_end=0.5, wave_omega=0.5))
        assert res.u0_l2_dist[0] == 0.0
        assert res.u0_l2_dist[-1] > 0.0


class TestStudyConvergence:
    def test_zero_duration_empty(self):
        report = study_convergence(wave_cfg(t_end=0.0))
        assert report.temporal == [] and report.spatial == []

    def test_order_window(self):
        report = study_convergence(wave_cfg(t_end=0.5, wave_omega=0.5))
        assert 1.9 <= report.fitted_order <= 2.1
        # band-limited data: spatial error independent of M down to the
        # temporal floor
        floor = 2.0 * min(e for _, e in report.temporal)
        assert all(e <= floor for _, e in report.spatial)

    def test_requires_wave_family(self):
        from biwave.errors import ValidationError

        cfg = config_from_mapping(
            {
                "dim": 1,
                "grid_size": 32,
                "manifold": "sphere:3",
                "dt": 1e-3,
                "t_end": 0.1,
                "initial": "bump",
            }
        )
        with pytest.raises(ValidationError):
            study_convergence(cfg)


class TestStudyScaling:
    def test_identity_is_exact(self):
        report = study_scaling(wave_cfg(t_end=0.2), 1)
        assert report.max_error == 0.0
        assert report.energy_check.measured_ratio == 1.0

    def test_wave_rescales_to_k2_wave(self):
        report = study_scaling(wave_cfg(t_end=0.4), 2)
        assert report.max_error <= 1e-4
        assert report.energy_check.measured_ratio == pytest.approx(16.0, rel=1e-12)


class TestStudyPerturbation:
    def test_zero_delta_identical_trajectories(self):
        report = study_perturbation(wave_cfg(t_end=0.2), (0.0,))
        row = report.rows[0]
        assert row.error is None
        assert row.ew0 == 0.0
        assert row.growth == 0.0

    def test_growth_rows(self):
        report = study_perturbation(wave_cfg(t_end=0.2), (1e-2, 1e-3))
        assert all(r.error is None for r in report.rows)
        assert report.growth_spread <= 2.0

    def test_threads_env_gives_same_result(self, monkeypatch):
        deltas = (1e-2, 1e-3)
        a = study_perturbation(wave_cfg(t_end=0.2), deltas)
        monkeypatch.setenv("BWM_THREADS", "2")
        b = study_perturbation(wave_cfg(t_end=0.2), deltas)
        for ra, rb in zip(a.rows, b.rows):
            assert ra.ew0 == rb.ew0 and ra.growth == rb.growth


class TestInvariantsSuite:
    def test_all_pass(self):
        checks = invariants_suite()
        assert len(checks) >= 15
        failed = [name for name, ok, _ in checks if not ok]
        assert failed == []
