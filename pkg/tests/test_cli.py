import json

import numpy as np
import pytest

from se_cnot import cli
from se_cnot.cli import ExperimentConfig, Physical, Sweep, main, read_output, run, validate

REFERENCE_RATIOS = {
    0: [0.3439, 0.1520, 0.0795, 0.0465],
}


def config(experiment, tmp_path, **kw):
    fmt = kw.get("format") or cli.DEFAULT_FORMAT.get(experiment, "csv")
    return ExperimentConfig(experiment=experiment, output=str(tmp_path / f"{experiment}.{fmt}"), **kw)


def test_validate_defaults_clean():
    assert validate(ExperimentConfig()) == []


def test_validate_examples():
    bad = ExperimentConfig(physical=Physical(omega=0.0))
    assert "physical.omega must be > 0" in validate(bad)
    msgs = validate(ExperimentConfig(experiment="nonsense"))
    assert len(msgs) == 1 and "'nonsense'" in msgs[0]
    msgs = validate(ExperimentConfig(experiment="detuning_sweep", sweep=Sweep(max_detuning=0.6)))
    assert len(msgs) == 1 and "regime bound" in msgs[0]


def test_validate_collects_several():
    c = ExperimentConfig(physical=Physical(kappa1=-1.0, ratio_kappa2=-0.1), initial="20", format="xml")
    assert len(validate(c)) == 4


def test_from_dict_rejects_unknown_fields():
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"experimnt": "gate_report"})


def test_run_rejects_invalid_config(tmp_path, capsys):
    c = config("gate_report", tmp_path, physical=Physical(omega=0.0))
    assert run(c) == 1
    assert "physical.omega" in capsys.readouterr().err
    assert not (tmp_path / "gate_report.json").exists()


def test_numerical_failure_exit_code(tmp_path, capsys):
    c = config("spectrum", tmp_path, ez_v_per_cm=[0.0], grid_points=2000)
    assert run(c) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_gate_report_json(tmp_path):
    c = config("gate_report", tmp_path)
    assert run(c) == 0
    meta, cols, report = read_output(c.output)
    assert cols is None
    assert report["gate_fidelity"] == pytest.approx(0.9989, abs=5e-4)
    assert [r["fidelity"] for r in report["table1"]] == pytest.approx(
        [1.0, 0.9987, 0.9987, 0.9987, 0.9990, 0.9980], abs=5e-4)
    assert ExperimentConfig.from_dict(meta["config"]) == c


def test_gate_report_csv(tmp_path):
    c = config("gate_report", tmp_path, format="csv")
    assert run(c) == 0
    meta, cols, rows = read_output(c.output)
    assert cols == ["input", "target", "fidelity"]
    assert len(rows) == 6
    assert meta["summary"]["gate_fidelity"] == pytest.approx(0.9989, abs=5e-4)


def test_decay_table_matches_reference(tmp_path):
    c = config("decay_table", tmp_path, ez_v_per_cm=[0.0, 100.0])
    assert run(c) == 0
    meta, cols, rows = read_output(c.output)
    assert cols == ["E_z_V_per_cm", "ratio_3_2", "ratio_4_2", "ratio_5_2", "ratio_6_2"]
    zero = [float(x) for x in rows[0][1:]]
    assert zero == pytest.approx(REFERENCE_RATIOS[0], abs=1e-3)
    loaded = [float(x) for x in rows[1][1:]]
    assert loaded == pytest.approx([0.9807, 1.0050, 1.0442, 1.0890], rel=0.02)


def test_lossless_trajectories_conserve_population(tmp_path):
    c = config("trajectories", tmp_path, physical=Physical(kappa1=0.0), points=41, coherences=True)
    assert run(c) == 0
    _, cols, rows = read_output(c.output)
    assert cols[:5] == ["omega_t", "p00", "p01", "p10", "p11"]
    assert "re_10_11" in cols and "im_10_11" in cols
    data = np.array(rows, dtype=float)
    assert np.abs(data[:, 2:5].sum(axis=1) - 1).max() < 1e-11
    assert data[-1, 4] == pytest.approx(1.0, abs=1e-11)


def test_scheme_compare(tmp_path):
    c = config("scheme_compare", tmp_path, points=31)
    assert run(c) == 0
    meta, cols, _ = read_output(c.output)
    assert cols == ["omega_t", "fidelity_coherent", "fidelity_two_step"]
    s = meta["summary"]
    assert s["coherent"]["t_peak"] == pytest.approx(2 * np.pi, rel=0.01)
    assert s["two_step"]["t_peak"] == pytest.approx(2 * np.sqrt(2) * np.pi, rel=0.01)


def test_detuning_sweep(tmp_path):
    c = config("detuning_sweep", tmp_path, points=5, sweep=Sweep(max_detuning=0.2))
    assert run(c) == 0
    _, cols, rows = read_output(c.output)
    assert cols == ["detuning_over_omega", "fidelity_delta_1", "fidelity_delta_2"]
    data = np.array(rows, dtype=float)
    assert np.argmax(data[:, 1]) == 2 and np.argmax(data[:, 2]) == 2


def test_dissipation_sweep_json(tmp_path):
    c = config("dissipation_sweep", tmp_path, points=11, format="json")
    assert run(c) == 0
    meta, cols, rows = read_output(c.output)
    assert cols == ["kappa1_over_omega", "fidelity_analytic", "fidelity_simulated"]
    assert rows[0][1] == 1.0
    assert meta["config"]["sweep"]["kappa_max"] == 0.01


def test_spectrum(tmp_path):
    c = config("spectrum", tmp_path, ez_v_per_cm=[0.0], n_levels=3)
    assert run(c) == 0
    _, cols, rows = read_output(c.output)
    assert cols == ["E_z_V_per_cm", "n", "energy_meV", "expected_z_nm", "dvdz_N"]
    e = [float(r[2]) for r in rows]
    assert e[1] / e[0] == pytest.approx(0.25, rel=2e-3)


def test_deterministic_output(tmp_path):
    a = config("trajectories", tmp_path, points=21)
    assert run(a) == 0
    first = (tmp_path / "trajectories.csv").read_bytes()
    assert run(a) == 0
    assert (tmp_path / "trajectories.csv").read_bytes() == first
    b = config("trajectories", tmp_path, points=21)
    b.output = str(tmp_path / "again.csv")
    assert run(b) == 0
    # only the echoed output path in the header differs
    data = (tmp_path / "again.csv").read_bytes().split(b"\n", 1)[1]
    assert data == first.split(b"\n", 1)[1]


def test_main_flags_override_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"physical": {"kappa1": 5e6}, "points": 3}))
    out = tmp_path / "diss.csv"
    assert main(["sweep-dissipation", "--config", str(cfg), "--kappa1", "2e6",
                 "--points", "5", "--out", str(out)]) == 0
    meta, _, rows = read_output(out)
    assert meta["config"]["physical"]["kappa1"] == 2e6
    assert meta["config"]["experiment"] == "dissipation_sweep"
    assert len(rows) == 5


def test_main_exit_codes(tmp_path):
    assert main(["gate", "--omega", "0", "--out", str(tmp_path / "g.json")]) == 1
    assert main(["spectrum", "--config", str(tmp_path / "missing.json")]) == 1
    with pytest.raises(SystemExit):
        main(["bogus"])
