import pytest

from biwave.cli import main

WAVE_CFG = """
dim = 1
grid_size = 32
manifold = sphere:2
scheme = strang
dt = 1e-3
t_end = 1.0
output_every = 0.1
initial = traveling_wave
wave_k = 1
wave_omega = 1.0
"""


@pytest.fixture
def wave_config(tmp_path):
    path = tmp_path / "wave.cfg"
    path.write_text(WAVE_CFG)
    return path


def _strip_comments(text):
    return "\n".join(l for l in text.splitlines() if not l.startswith("#"))


class TestRunCommand:
    def test_wave_run(self, wave_config, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["run", "--config", str(wave_config), "--out", str(out), "--quiet"])
        assert code == 0
        lines = (out / "diagnostics.csv").read_text().splitlines()
        assert lines[1].split(",")[0] == "time"
        # floor(T / output_every) + 1 rows
        assert len(lines) - 2 == 11
        drift_col = lines[1].split(",").index("energy_rel_drift")
        drifts = [float(l.split(",")[drift_col]) for l in lines[2:]]
        assert max(drifts) <= 1e-6

    def test_zero_duration_single_row(self, tmp_path):
        cfg = tmp_path / "z.cfg"
        cfg.write_text(WAVE_CFG.replace("t_end = 1.0", "t_end = 0.0"))
        out = tmp_path / "out0"
        assert main(["run", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
        lines = (out / "diagnostics.csv").read_text().splitlines()
        assert len(lines) - 2 == 1

    def test_deterministic_csv(self, tmp_path):
        cfg = tmp_path / "r.cfg"
        cfg.write_text(
            """
dim = 1
grid_size = 32
manifold = sphere:3
dt = 1e-3
t_end = 0.2
output_every = 0.1
initial = random_bandlimited
rb_kmax = 3
rb_amplitude = 0.6
seed = 42
"""
        )
        texts = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            assert main(["run", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
            texts.append(_strip_comments((out / "diagnostics.csv").read_text()))
        assert texts[0] == texts[1]

    def test_seed_override_changes_data(self, tmp_path):
        cfg = tmp_path / "r.cfg"
        cfg.write_text(
            """
dim = 1
grid_size = 32
manifold = sphere:3
dt = 1e-3
t_end = 0.0
initial = random_bandlimited
seed = 1
"""
        )
        outs = []
        for seed in ("1", "2"):
            out = tmp_path / f"s{seed}"
            assert main(["run", "--config", str(cfg), "--out", str(out), "--seed", seed, "--quiet"]) == 0
            outs.append(_strip_comments((out / "diagnostics.csv").read_text()))
        assert outs[0] != outs[1]

    def test_snapshot_roundtrip_via_cli(self, tmp_path):
        cfg = tmp_path / "w.cfg"
        cfg.write_text(WAVE_CFG + "snapshot_path = final.bwm\n")
        out = tmp_path / "snap"
        assert main(["run", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
        from biwave.snapshot import read_snapshot, write_snapshot

        state = read_snapshot(out / "final.bwm")
        assert state.time == pytest.approx(1.0)
        again = tmp_path / "again.bwm"
        write_snapshot(again, state)
        assert again.read_bytes() == (out / "final.bwm").read_bytes()

    def test_blowup_exit_2_with_partial_csv(self, tmp_path):
        cfg = tmp_path / "blow.cfg"
        cfg.write_text(
            """
dim = 1
grid_size = 32
manifold = sphere:2
scheme = rk4proj
dt = 0.015
t_end = 2.0
output_every = 0.1
initial = random_bandlimited
rb_kmax = 4
rb_amplitude = 1.5
seed = 7
"""
        )
        out = tmp_path / "outb"
        code = main(["run", "--config", str(cfg), "--out", str(out), "--quiet"])
        assert code == 2
        lines = (out / "diagnostics.csv").read_text().splitlines()
        assert len(lines) >= 3  # header + initial + failure-time row
        t_last = float(lines[-1].split(",")[0])
        t_prev = float(lines[-2].split(",")[0])
        assert t_last > t_prev  # last row is stamped with the failure time

    def test_missing_config_exit_1(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "nope.cfg"), "--quiet"]) == 1

    def test_parse_error_exit_1(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("dim = 1\nfoo = 2\n")
        assert main(["run", "--config", str(cfg), "--quiet"]) == 1

    def test_validation_error_exit_1(self, tmp_path):
        cfg = tmp_path / "bad2.cfg"
        cfg.write_text(WAVE_CFG.replace("dt = 1e-3", "dt = -1"))
        assert main(["run", "--config", str(cfg), "--quiet"]) == 1


class TestStudies:
    def test_convergence(self, wave_config, capsys):
        # k=1, omega=1 is integrated to roundoff: errors sit at the floor
        assert main(["convergence", "--config", str(wave_config)]) == 0
        text = capsys.readouterr().out
        assert "fitted temporal order" in text

    def test_convergence_nontrivial_wave(self, tmp_path, capsys):
        cfg = tmp_path / "w5.cfg"
        cfg.write_text(WAVE_CFG.replace("wave_omega = 1.0", "wave_omega = 0.5").replace("t_end = 1.0", "t_end = 0.5"))
        assert main(["convergence", "--config", str(cfg)]) == 0
        text = capsys.readouterr().out
        order = float(text.split("fitted temporal order:")[1].split()[0])
        assert 1.9 <= order <= 2.1

    def test_convergence_zero_duration(self, tmp_path):
        cfg = tmp_path / "z.cfg"
        cfg.write_text(WAVE_CFG.replace("t_end = 1.0", "t_end = 0.0"))
        assert main(["convergence", "--config", str(cfg), "--quiet"]) == 0

    def test_scaling(self, tmp_path, capsys):
        cfg = tmp_path / "s.cfg"
        cfg.write_text(WAVE_CFG.replace("t_end = 1.0", "t_end = 0.5"))
        assert main(["scaling", "--config", str(cfg), "--lam", "2"]) == 0
        assert "measured ratio=16" in capsys.readouterr().out

    def test_scaling_identity(self, tmp_path):
        cfg = tmp_path / "s1.cfg"
        cfg.write_text(WAVE_CFG.replace("t_end = 1.0", "t_end = 0.2"))
        assert main(["scaling", "--config", str(cfg), "--lam", "1", "--quiet"]) == 0

    def test_perturb(self, tmp_path, capsys):
        cfg = tmp_path / "p.cfg"
        cfg.write_text(WAVE_CFG.replace("t_end = 1.0", "t_end = 0.3"))
        assert main(["perturb", "--config", str(cfg), "--deltas", "1e-2,1e-3,1e-4"]) == 0
        assert "growth spread" in capsys.readouterr().out

    def test_perturb_tube_exceeded_reported_per_delta(self, tmp_path, capsys):
        cfg = tmp_path / "p2.cfg"
        cfg.write_text(WAVE_CFG.replace("t_end = 1.0", "t_end = 0.1"))
        main(["perturb", "--config", str(cfg), "--deltas", "4.0,1e-3,1e-4"])
        out = capsys.readouterr().out
        assert "tube" in out  # big delta leaves the tube, others still reported
        assert out.count("Ew0=") == 2

    def test_invariants(self, capsys):
        assert main(["invariants"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out

    def test_violated_study_tolerance_exits_3(self, tmp_path):
        cfg = tmp_path / "s.cfg"
        cfg.write_text(WAVE_CFG.replace("t_end = 1.0", "t_end = 0.2"))
        # impossible correspondence tolerance: acceptance violation
        assert main(["scaling", "--config", str(cfg), "--lam", "2", "--tol", "1e-30", "--quiet"]) == 3
