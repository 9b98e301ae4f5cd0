import numpy as np
import pytest

from se_cnot import quantum
from se_cnot.driving import DriveParams, build_h_rotating, embed4
from se_cnot.gate import (
    CNOT,
    GATE_TIME,
    STANDARD_INPUTS,
    analytic_ur,
    fidelity_vs_dissipation,
    gate_channel,
    phase_correction,
    simulate_cnot,
    simulated_gate_matrix,
)

REFERENCE_FIDELITIES = [1.0, 0.9987, 0.9987, 0.9987, 0.9990, 0.9980]
REFERENCE_DRIVE = DriveParams.resonant(kappa_1=1e-3)


@pytest.fixture(scope="module")
def reference_run():
    return simulate_cnot(REFERENCE_DRIVE)


def test_phase_correction():
    p = phase_correction()
    assert np.array_equal(p @ p, np.eye(4))
    e00 = quantum.basis_ket(0, 4)
    assert np.array_equal(p @ e00, e00)


def test_phase_correction_fixes_lossless_sign():
    u = quantum.matrix_exponential(embed4(build_h_rotating(DriveParams.resonant())), -1j * GATE_TIME)
    out = u @ quantum.basis_ket(2, 4)
    assert np.allclose(out, -quantum.basis_ket(3, 4), atol=1e-12)
    assert np.allclose(phase_correction() @ out, quantum.basis_ket(3, 4), atol=1e-12)


def test_analytic_ur_lossless_is_cnot():
    g = analytic_ur(0.0, 0.0)
    assert (g.a, g.b, g.c) == (1.0, 0.0, 1.0)
    assert np.array_equal(g.matrix, CNOT)


def test_analytic_ur_reference_values():
    g = analytic_ur(1e-3, 0.3439e-3)
    # hand evaluation of the exponentials
    a = np.exp(-(2e-3 + 0.3439e-3) * np.pi / 4)
    d = np.exp(-0.3439e-3 * np.pi / 2)
    assert g.a == pytest.approx(0.998161, abs=5e-7)
    assert g.c == pytest.approx(0.998810, abs=5e-7)
    assert g.b == pytest.approx((a - d) / 2, abs=1e-15)
    assert g.b == pytest.approx(-0.000650, abs=5e-7)
    assert g.fidelity() == pytest.approx(0.9989, abs=5e-5)


def test_analytic_ur_rejects_bad_arguments():
    with pytest.raises(ValueError):
        analytic_ur(1e-3, 1e-3, omega=0.0)
    with pytest.raises(ValueError):
        analytic_ur(-1e-3, 0.0)


@pytest.mark.parametrize("k1,k2", [(1e-3, 0.3439e-3), (0.05, 0.01), (0.0, 0.08), (0.1, 0.1)])
def test_bc_identity(k1, k2):
    g = analytic_ur(k1, k2)
    a = np.exp(-(2 * k1 + k2) * np.pi / 4)
    d = np.exp(-k2 * np.pi / 2)
    assert abs((g.c**2 - g.b**2) - a * d) <= 1e-15
    assert g.c + g.b == pytest.approx(a, abs=1e-15)
    assert g.c - g.b == pytest.approx(d, abs=1e-15)


def test_fidelity_formula_matches_trace_overlap():
    rng = np.random.default_rng(21)
    for _ in range(20):
        g = analytic_ur(*rng.uniform(0, 0.1, 2))
        # the real matrix makes transpose and conjugate transpose coincide
        via_transpose = abs(np.trace(g.matrix.T @ CNOT)) / 4
        assert via_transpose == pytest.approx(quantum.gate_fidelity(g.matrix, CNOT), abs=1e-15)
        assert g.fidelity() == pytest.approx(via_transpose, abs=1e-15)


def test_simulated_gate_fidelity(reference_run):
    _, report = reference_run
    assert report.gate_fidelity == pytest.approx(0.9989, abs=5e-4)
    assert report.simulated_gate_fidelity == pytest.approx(0.9989, abs=5e-4)
    without_k3 = quantum.gate_fidelity(simulated_gate_matrix(REFERENCE_DRIVE, include_kappa3=False), CNOT)
    assert without_k3 == pytest.approx(report.gate_fidelity, abs=1e-6)


def test_standard_input_fidelities(reference_run):
    _, report = reference_run
    got = [row["fidelity"] for row in report.table1]
    assert got == pytest.approx(REFERENCE_FIDELITIES, abs=5e-4)
    assert all(0 <= f <= 1 for f in got)
    assert [row["target"] for row in report.table1][4] == "(|00>+|11>)/sqrt2"


def test_channel_outputs_are_states(reference_run):
    _, report = reference_run
    for rho in report.output_states.values():
        quantum.check_density(rho)


def test_control_zero_is_identity_lossless():
    channel = gate_channel(DriveParams.resonant())
    rng = np.random.default_rng(22)
    for _ in range(5):
        k = np.zeros(4, dtype=complex)
        k[:2] = rng.normal(size=2) + 1j * rng.normal(size=2)
        k /= np.linalg.norm(k)
        out = channel(quantum.ket_to_density(k))
        assert np.real(out[2, 2] + out[3, 3]) < 1e-6
        assert quantum.state_fidelity(quantum.ket_to_density(k), out) == pytest.approx(1, abs=1e-9)


def test_bell_output_patterns(reference_run):
    _, report = reference_run
    for label, (i, j) in (("(|0>+|1>)|0>/sqrt2", (0, 3)), ("(|0>+|1>)|1>/sqrt2", (1, 2))):
        rho = report.output_states[label]
        for r, c in ((i, i), (j, j), (i, j), (j, i)):
            assert rho[r, c].real == pytest.approx(0.5, abs=2e-3)
        mask = np.ones((4, 4), bool)
        mask[np.ix_([i, j], [i, j])] = False
        assert np.abs(rho[mask]).max() < 2e-3


def test_report_serialisation(reference_run):
    _, report = reference_run
    d = report.to_dict()
    assert set(d) >= {"params", "table1", "gate_fidelity"}
    assert d["params"]["kappa_1"] == pytest.approx(1e-3)
    assert len(d["table1"]) == len(STANDARD_INPUTS)


def test_fidelity_vs_dissipation():
    ks = np.linspace(0, 0.1, 41)
    f = [v for _, v in fidelity_vs_dissipation(ks)]
    assert f[0] == 1.0
    assert np.all(np.diff(f) < 0)
    assert dict(fidelity_vs_dissipation([1e-3]))[1e-3] == pytest.approx(0.9989, abs=5e-5)
    small = fidelity_vs_dissipation(np.linspace(0, 5e-3, 11))
    assert min(v for _, v in small) > 0.99
    with pytest.raises(ValueError):
        fidelity_vs_dissipation([0.2])


def test_fidelity_vs_dissipation_simulated_column():
    rows = fidelity_vs_dissipation([0.0, 1e-3, 5e-3], simulated=True)
    assert rows[0][2] == pytest.approx(1.0, abs=1e-12)
    for _, fa, fs in rows:
        assert fs <= fa + 1e-12
        assert fs == pytest.approx(fa, abs=5e-3)
