"""CNOT assembly on the four levels ``(|00>, |01>, |10>, |11>)``.

The drive never touches ``|00>``; after one full period ``Omega t = 2 pi``
the other three levels pick up a sign that a fixed phase step removes.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from . import quantum
from .driving import RATIO_KAPPA2, RATIO_KAPPA3, DriveParams, build_h_nonhermitian, embed4
from .dynamics import coherent_schedule, evolve_master

GATE_TIME = 2 * np.pi

CNOT = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]],
    dtype=complex,
)


def phase_correction():
    """``diag(1, -1, -1, -1)``: a pi phase on the three driven levels."""
    return np.diag([1.0, -1.0, -1.0, -1.0]).astype(complex)


def _ket(*labels):
    e = np.eye(4, dtype=complex)
    idx = {"00": 0, "01": 1, "10": 2, "11": 3}
    k = sum(e[idx[lab]] for lab in labels)
    return k / np.linalg.norm(k)


# (input label, input ket, target label) for the standard gate inputs
STANDARD_INPUTS = (
    ("|00>", _ket("00"), "|00>"),
    ("|01>", _ket("01"), "|01>"),
    ("|10>", _ket("10"), "|11>"),
    ("|11>", _ket("11"), "|10>"),
    ("(|0>+|1>)|0>/sqrt2", _ket("00", "10"), "(|00>+|11>)/sqrt2"),
    ("(|0>+|1>)|1>/sqrt2", _ket("01", "11"), "(|01>+|10>)/sqrt2"),
)


@dataclass(frozen=True, eq=False)
class AnalyticGate:
    a: float
    b: float
    c: float

    @property
    def matrix(self):
        a, b, c = self.a, self.b, self.c
        return np.array(
            [[1, 0, 0, 0],
             [0, a, 0, 0],
             [0, 0, b, c],
             [0, 0, c, b]],
            dtype=complex,
        )

    def fidelity(self):
        """Closed form ``(1 + a)/4 + c/2`` of the phase-optimised overlap."""
        return (1.0 + self.a) / 4.0 + self.c / 2.0


def analytic_ur(kappa_1, kappa_2, omega=1.0):
    """Gate matrix after one period with decay on ``|01>`` and ``|10>``.

    ``a = exp(-(2k1 + k2) pi / 4 Omega)``, ``b, c = (a -+ exp(-k2 pi / 2 Omega)) / 2``.
    """
    if omega <= 0:
        raise ValueError("omega must be positive")
    if kappa_1 < 0 or kappa_2 < 0:
        raise ValueError("decay rates must be non-negative")
    a = np.exp(-(2.0 * kappa_1 + kappa_2) * np.pi / (4.0 * omega))
    d = np.exp(-kappa_2 * np.pi / (2.0 * omega))
    return AnalyticGate(a=float(a), b=float(0.5 * a - 0.5 * d), c=float(0.5 * a + 0.5 * d))


def simulated_gate_matrix(p, include_kappa3=True):
    """Phase-corrected no-jump propagator on all four levels at ``Omega t = 2 pi``."""
    h = embed4(build_h_nonhermitian(p, include_kappa3))
    u = quantum.matrix_exponential(h, -1j * GATE_TIME / p.omega)
    return phase_correction() @ u


@dataclass
class GateReport:
    params: dict
    table1: list = field(default_factory=list)
    gate_fidelity: float = float("nan")
    simulated_gate_fidelity: float = float("nan")
    output_states: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        out = {
            "params": self.params,
            "table1": self.table1,
            "gate_fidelity": self.gate_fidelity,
            "simulated_gate_fidelity": self.simulated_gate_fidelity,
        }
        out["output_density_matrices"] = {
            label: {"re": np.real(rho).tolist(), "im": np.imag(rho).tolist()}
            for label, rho in self.output_states.items()
        }
        return out


def gate_channel(p):
    """Return the map ``rho_in -> P rho_out P`` of the master-equation gate."""
    schedule = coherent_schedule(p, GATE_TIME / p.omega)
    ph = phase_correction()

    def channel(rho):
        traj = evolve_master(rho, schedule, [schedule.duration])
        return ph @ traj.states[-1] @ ph.conj().T

    return channel


def simulate_cnot(p=None):
    """Run the gate on the standard inputs and report fidelities.

    Parameters
    ----------
    p : DriveParams, optional
        defaults to the resonant drive with ``kappa_1/Omega = 1e-3`` and the
        zero-field decay ratios

    Returns
    -------
    (callable, GateReport)
        the channel on four-level density matrices, and the report with
        the per-input state fidelities, the closed-form gate fidelity and
        the gate fidelity of the simulated no-jump propagator
    """
    if p is None:
        p = DriveParams.resonant(kappa_1=1e-3)
    channel = gate_channel(p)
    rows = []
    outputs = {}
    for label, ket, target_label in STANDARD_INPUTS:
        rho_out = channel(quantum.ket_to_density(ket))
        target = quantum.ket_to_density(CNOT @ ket)
        rows.append({
            "input": label,
            "target": target_label,
            "fidelity": quantum.state_fidelity(target, rho_out),
        })
        outputs[label] = rho_out
    gate = analytic_ur(p.kappa_1, p.kappa_2, p.omega)
    report = GateReport(
        params=asdict(p),
        table1=rows,
        gate_fidelity=quantum.gate_fidelity(gate.matrix, CNOT),
        simulated_gate_fidelity=quantum.gate_fidelity(simulated_gate_matrix(p), CNOT),
        output_states=outputs,
    )
    return channel, report


def fidelity_vs_dissipation(kappa1_over_omega, ratio_kappa2=RATIO_KAPPA2,
                            ratio_kappa3=RATIO_KAPPA3, simulated=False):
    """Gate fidelity against ``kappa_1/Omega``.

    The closed form ignores ``kappa_3``; with ``simulated=True`` a third
    column from the full no-jump propagator (all three rates) is added.
    """
    out = []
    for k in kappa1_over_omega:
        if not 0 <= k <= 0.1:
            raise ValueError("kappa_1/Omega must lie in [0, 0.1]")
        f = analytic_ur(k, ratio_kappa2 * k).fidelity()
        if simulated:
            p = DriveParams.resonant(kappa_1=k, ratio_2=ratio_kappa2, ratio_3=ratio_kappa3)
            fs = quantum.gate_fidelity(simulated_gate_matrix(p), CNOT)
            out.append((float(k), float(f), fs))
        else:
            out.append((float(k), float(f)))
    return out
