"""Driven three-level Hamiltonians in the rotating frame.

Level order is fixed everywhere: ``(|01>, |10>, |11>)`` for three-level
objects and ``(|00>, |01>, |10>, |11>)`` for four-level ones. Rates and
detunings share one frequency unit (the total Rabi frequency of the
coherent scheme is 1 in the presets), and times are in its inverse.
"""

import itertools
from dataclasses import dataclass, replace

import numpy as np

LEVELS3 = ("01", "10", "11")
LEVELS4 = ("00", "01", "10", "11")

# kappa2/kappa1 and kappa3/kappa1 from the zero-field decay ratios
RATIO_KAPPA2 = 0.3439
RATIO_KAPPA3 = 0.1520

PERTURBATIVE_LIMIT = 0.1


@dataclass(frozen=True)
class DriveParams:
    """Rabi frequencies, detunings and level decay rates.

    ``rabi_1`` couples ``|01> <-> |11>``, ``rabi_2`` couples ``|01> <-> |10>``.
    ``kappa_1..3`` belong to ``|01>``, ``|10>``, ``|11>``.
    """

    rabi_1: float
    rabi_2: float
    detuning_1: float = 0.0
    detuning_2: float = 0.0
    kappa_1: float = 0.0
    kappa_2: float = 0.0
    kappa_3: float = 0.0

    def __post_init__(self):
        if self.rabi_1 < 0 or self.rabi_2 < 0 or self.omega == 0:
            raise ValueError("Rabi frequencies must be >= 0 and not both zero")
        if min(self.kappa_1, self.kappa_2, self.kappa_3) < 0:
            raise ValueError("decay rates must be >= 0")

    @classmethod
    def resonant(cls, kappa_1=0.0, ratio_2=RATIO_KAPPA2, ratio_3=RATIO_KAPPA3, omega=1.0, **kw):
        """Equal Rabi frequencies ``omega/sqrt(2)`` with rates scaled from ``kappa_1``."""
        r = omega / np.sqrt(2.0)
        return cls(r, r, kappa_1=kappa_1, kappa_2=ratio_2 * kappa_1,
                   kappa_3=ratio_3 * kappa_1, **kw)

    @property
    def omega(self):
        return float(np.hypot(self.rabi_1, self.rabi_2))

    @property
    def delta_1(self):
        return self.detuning_1 - 0.5j * self.kappa_1

    @property
    def delta_2(self):
        return self.detuning_2 - 0.5j * self.kappa_2

    @property
    def rates(self):
        return (self.kappa_1, self.kappa_2, self.kappa_3)

    def with_(self, **changes):
        return replace(self, **changes)


def _h_matrix(d1, d2, r1, r2):
    return -0.5 * np.array(
        [[-2.0 * d1, r2, r1],
         [r2, -2.0 * d2, 0.0],
         [r1, 0.0, 0.0]],
        dtype=complex,
    )


def build_h_rotating(p):
    """Hermitian rotating-frame Hamiltonian (zero of energy at ``|11>``)."""
    return _h_matrix(p.detuning_1, p.detuning_2, p.rabi_1, p.rabi_2)


def build_h_nonhermitian(p, include_kappa3=False):
    """No-jump Hamiltonian with ``-i kappa/2`` on ``|01>`` and ``|10>``.

    ``include_kappa3`` also damps ``|11>``; the closed-form treatment leaves
    it out.
    """
    h = _h_matrix(p.delta_1, p.delta_2, p.rabi_1, p.rabi_2)
    if include_kappa3:
        h[2, 2] -= 0.5j * p.kappa_3
    return h


def embed4(h3):
    """Lift a three-level operator into the four-level space; ``|00>`` is decoupled."""
    h = np.zeros((4, 4), dtype=complex)
    h[1:, 1:] = h3
    return h


@dataclass(frozen=True)
class DressedBasis:
    theta: float
    phi: complex
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray

    def matrix(self):
        """Columns are ``a1, a2, a3`` in the bare basis."""
        return np.column_stack([self.a1, self.a2, self.a3])


def dressed_basis(p):
    """Dark and bright dressed states at ``delta_2 = 0``.

    ``tan(theta) = Omega_1/Omega_2`` and ``tan(2 phi) = Omega/delta_1``. The
    angle ``2 phi`` is evaluated as ``pi/2 - arctan(delta_1/Omega)``, which
    agrees with the principal ``arctan(Omega/delta_1)`` for ``Re delta_1 > 0``
    and stays continuous through ``delta_1 = 0`` where ``phi = pi/4``.
    """
    theta = float(np.arctan2(p.rabi_1, p.rabi_2))
    phi = 0.5 * (np.pi / 2 - np.arctan(p.delta_1 / p.omega))
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    a1 = np.array([0.0, -st, ct], dtype=complex)
    a2 = np.array([cp, ct * sp, st * sp], dtype=complex)
    a3 = np.array([-sp, ct * cp, st * cp], dtype=complex)
    return DressedBasis(theta=theta, phi=complex(phi), a1=a1, a2=a2, a3=a3)


def perturbative_eigenvalues(p):
    """First-order eigenvalues treating ``delta_2`` as the perturbation.

    Returns
    -------
    ndarray, shape (3,)
        ``(E1, E2, E3)``: the dark-state shift and the two bright branches
        near ``+Omega/2`` and ``-Omega/2``.
    """
    om = p.omega
    d1, d2 = p.delta_1, p.delta_2
    if abs(d1) > PERTURBATIVE_LIMIT * om or abs(d2) > PERTURBATIVE_LIMIT * om:
        raise ValueError(
            f"perturbative regime requires |delta_i| <= {PERTURBATIVE_LIMIT} Omega"
        )
    s1 = p.rabi_1**2 / om**2
    s2 = p.rabi_2**2 / om**2
    e1 = s1 * d2
    shift = 0.5 * d1 + 0.5 * s2 * d2
    return np.array([e1, 0.5 * om + shift, -0.5 * om + shift], dtype=complex)


def secular_residual(p, energy):
    """Residual of the cubic ``x[x^2 + 2(d1+d2)x + 4 d1 d2 - Omega^2] - 2 Omega_1^2 d2``
    at ``x = -2 E``."""
    x = -2.0 * np.asarray(energy)
    d1, d2 = p.delta_1, p.delta_2
    return x * (x * x + 2.0 * (d1 + d2) * x + 4.0 * d1 * d2 - p.omega**2) - 2.0 * p.rabi_1**2 * d2


def exact_eigenvalues(p):
    return np.linalg.eigvals(build_h_nonhermitian(p))


def pair_eigenvalues(reference, values):
    """Reorder ``values`` to minimise the total distance to ``reference``."""
    values = np.asarray(values)
    best = min(
        itertools.permutations(range(len(values))),
        key=lambda perm: np.abs(values[list(perm)] - reference).sum(),
    )
    return values[list(best)]


def perturbative_error(p):
    """Largest deviation between first-order and exact eigenvalues."""
    approx = perturbative_eigenvalues(p)
    exact = pair_eigenvalues(approx, exact_eigenvalues(p))
    return float(np.abs(exact - approx).max())
