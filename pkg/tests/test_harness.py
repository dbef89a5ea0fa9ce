import os
import subprocess
import sys

import numpy as np
import pytest

from ecavdg.csvio import read_csv
from ecavdg.harness import (
    ExperimentConfig,
    check_lemmas,
    compare_runs,
    convergence_study,
    load_config,
    preset_path,
    run_experiment,
    schlieren,
)
from ecavdg.problems import PROBLEMS

PRESETS = ["burgers2d", "vortex", "contact", "contact-smooth", "shock-vortex",
           "density-wave", "shu-osher"]


def test_all_presets_load_and_roundtrip():
    for name in PRESETS:
        cfg = load_config(name)
        assert cfg.problem in PROBLEMS
        text = cfg.to_ini()
        cfg2 = ExperimentConfig.from_ini(text)
        assert cfg2 == cfg
        assert cfg2.to_ini() == text  # canonical form is a fixed point


def test_config_roundtrip_preserves_floats_bit_exactly():
    cfg = ExperimentConfig(
        problem="vortex", N=3, K=16, abstol=1.2345678901234567e-10,
        reltol=0.1 + 0.2, t_final=np.pi, dt_fixed=5e-4,
    )
    cfg2 = ExperimentConfig.from_ini(cfg.to_ini())
    assert cfg2.abstol == cfg.abstol
    assert cfg2.reltol == cfg.reltol
    assert cfg2.t_final == cfg.t_final
    assert cfg2.dt_fixed == cfg.dt_fixed


def test_unknown_preset_raises():
    with pytest.raises(FileNotFoundError):
        load_config("no-such-preset")


def test_run_writes_artifacts_and_is_deterministic(tmp_path):
    cfg = ExperimentConfig.from_problem("contact", N=2, K=12, t_final=0.01)
    out1, out2 = str(tmp_path / "r1"), str(tmp_path / "r2")
    run_experiment(cfg, out_dir=out1)
    run_experiment(cfg, out_dir=out2)
    for fname in ("timeseries.csv", "profile.csv", "summary.csv", "config.ini"):
        b1 = open(os.path.join(out1, fname), "rb").read()
        b2 = open(os.path.join(out2, fname), "rb").read()
        assert b1 == b2, fname
    schema_line, header, rows = read_csv(os.path.join(out1, "timeseries.csv"))
    assert schema_line.startswith("# schema: ecavdg-timeseries")
    assert header[:4] == ["step", "t", "dt", "max_eps"]
    assert len(rows) >= 2


def test_record_every_stride_still_records_final(tmp_path):
    cfg = ExperimentConfig.from_problem("contact", N=2, K=12, t_final=0.01,
                                        record_every=1000)
    rec = run_experiment(cfg)
    assert np.isclose(rec.t[-1], 0.01)


def test_compare_runs_identical_configs(tmp_path):
    cfg = ExperimentConfig.from_problem("density-wave", N=2, K=8, t_final=0.05)
    out = compare_runs(cfg, cfg, out_dir=str(tmp_path))
    assert out["diff_norm"] == 0.0
    assert np.array_equal(out["eps_a"], out["eps_b"])
    assert os.path.exists(tmp_path / "compare.csv")


def test_compare_runs_mismatched_configs_rejected():
    a = ExperimentConfig.from_problem("density-wave", N=2, K=8, t_final=0.1)
    b = ExperimentConfig.from_problem("density-wave", N=3, K=8, t_final=0.1)
    with pytest.raises(ValueError):
        compare_runs(a, b)


def test_convergence_study_density_wave_errors_decrease(tmp_path):
    out = str(tmp_path / "conv.csv")
    res = convergence_study("density-wave", [2], [6, 12], out_path=out,
                            t_final=0.05)
    errs = res["errors"][2]
    assert errs[1] < errs[0]
    assert os.path.exists(out)


def test_schlieren_constant_density_is_one():
    cfg = ExperimentConfig.from_problem("shock-vortex", N=1, K=(4, 2), t_final=0.0)
    from ecavdg.harness import build_evaluator

    ev, c0, _ = build_evaluator(cfg)
    state = ev.disc.law.conservative(1.0, [0.3, 0.0], 2.0)
    cc = ev.disc.project_pointwise(
        np.broadcast_to(state, (ev.disc.mesh.K, len(ev.disc.ref.wq), 4)).copy()
    )
    x, y, s = schlieren(ev.disc, cc)
    assert np.allclose(s, 1.0)


def test_schlieren_endpoints():
    cfg = ExperimentConfig.from_problem("shock-vortex", N=2, K=(6, 3), t_final=0.0)
    from ecavdg.harness import build_evaluator

    ev, c0, _ = build_evaluator(cfg)
    x, y, s = schlieren(ev.disc, c0)
    assert np.isclose(np.max(s), 1.0)           # at g = g_min
    assert np.isclose(np.min(s), np.exp(-10.0))  # at g = g_max
    assert np.all((s > 0) & (s <= 1.0))


def test_check_lemmas_passes():
    ok, lines = check_lemmas(seed=1, n_fields=24, verbose=False)
    assert ok, lines
    assert len(lines) == 3


def _run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "ecavdg.cli", *args],
        capture_output=True, text=True,
        cwd=os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    )


def test_cli_run_and_mesh_summary(tmp_path):
    out = str(tmp_path / "cli-run")
    proc = _run_cli(
        "run", "contact", "--N", "2", "--K", "10", "--t-final", "0.005",
        "--out", out, "--mesh-summary",
    )
    assert proc.returncode == 0, proc.stderr
    assert "mesh:" in proc.stdout and "beta" in proc.stdout
    assert os.path.exists(os.path.join(out, "timeseries.csv"))


def test_cli_check_lemmas():
    proc = _run_cli("check-lemmas", "--seed", "3", "--fields", "12")
    assert proc.returncode == 0, proc.stderr
    assert "[lemma1] PASS" in proc.stdout
    assert "[lemma3] PASS" in proc.stdout
    assert "[lemma4] PASS" in proc.stdout


def test_farfield_shu_osher_short_run():
    cfg = ExperimentConfig.from_problem("shu-osher", K=50, N=2, t_final=0.01)
    rec = run_experiment(cfg)
    assert rec.violations == []
    assert np.all(np.isfinite(rec.final_coeffs))
    assert np.max(rec.entropy_rate) <= 1e-10


def test_wall_bc_shock_vortex_short_run():
    cfg = ExperimentConfig.from_problem("shock-vortex", N=1, K=(8, 4), t_final=0.01)
    rec = run_experiment(cfg)
    assert rec.violations == []
    assert np.all(np.isfinite(rec.final_coeffs))
