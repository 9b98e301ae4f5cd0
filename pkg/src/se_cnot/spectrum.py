"""Vertical bound states of an electron above liquid helium.

Without a holding field the image potential ``-Lambda e^2 / z`` gives a
hydrogen-like ladder with closed-form wavefunctions. A holding field adds
``e E_z z`` and the levels are found with a finite-difference eigensolver.
Two-ripplon decay rates follow from the diagonal elements of ``dV/dz`` and
the gaps to all lower levels; only ratios are computed since the overall
prefactor cancels.

All quantities are SI. Fields are in V/m; use ``V_PER_CM`` to convert.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import constants as const
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal
from scipy.special import ai_zeros

from .errors import NumericalError

V_PER_CM = 100.0
DEFAULT_POINTS = 60_000
DEFAULT_KAPPA2 = 1e6  # s^-1, lifetime of the n=2 level taken as 1 us
BOX_FACTOR = 40.0
ENERGY_RTOL = 1e-3
TAIL_TOL = 1e-6
NORM_TOL = 1e-8


@dataclass(frozen=True)
class PhysicalConstants:
    """Material and fundamental constants for the image-potential problem."""

    electron_mass: float = const.m_e
    elementary_charge: float = const.e
    dielectric_constant: float = 1.057
    hbar: float = const.hbar
    epsilon_0: float = const.epsilon_0

    @property
    def image_factor(self):
        eps = self.dielectric_constant
        return (eps - 1.0) / (4.0 * (eps + 1.0))

    @property
    def coupling(self):
        """Strength ``Lambda e^2 / (4 pi eps0)`` of the image potential, J m."""
        return self.image_factor * self.elementary_charge**2 / (4.0 * np.pi * self.epsilon_0)

    @property
    def bohr_radius(self):
        return self.hbar**2 / (self.electron_mass * self.coupling)

    @property
    def rydberg_energy(self):
        return self.electron_mass * self.coupling**2 / (2.0 * self.hbar**2)


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True, eq=False)
class SEState:
    """Bound state ``psi_n`` with its energy.

    Analytic states (no holding field) carry no grid. Numeric states store
    wavefunction samples on the interior grid points ``z_k = k h``; the
    boundary values ``psi(0) = psi(z_max) = 0`` are implied.
    """

    n: int
    energy: float
    z: np.ndarray = field(default=None, repr=False)
    psi: np.ndarray = field(default=None, repr=False)
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    @property
    def is_analytic(self):
        return self.z is None

    @property
    def step(self):
        return None if self.is_analytic else float(self.z[1] - self.z[0])

    def norm(self):
        if self.is_analytic:
            return _quad_dimless(lambda x: _reduced(self.n, x) ** 2 * x * x, self.n)
        return float(self.step * np.sum(self.psi**2))


def rydberg_energy(n, constants=DEFAULT_CONSTANTS):
    """Zero-field level energy ``-R / n^2`` in joules."""
    if n < 1:
        raise ValueError(f"principal quantum number must be >= 1, got {n}")
    return -constants.rydberg_energy / n**2


def laguerre(n, alpha, x):
    """Generalised Laguerre polynomial ``L_n^(alpha)(x)`` by upward recurrence.

    ``(k+1) L_{k+1} = (2k + 1 + alpha - x) L_k - (k + alpha) L_{k-1}``
    """
    if n < 0 or alpha < 0:
        raise ValueError("laguerre requires n >= 0 and alpha >= 0")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def _reduced(n, x):
    # psi_n / z in units of r_B, finite at x = 0
    return 2.0 * n**-2.5 * np.exp(-x / n) * laguerre(n - 1, 1, 2.0 * x / n)


def _quad_dimless(f, n):
    val, _ = quad(f, 0.0, BOX_FACTOR * n * n, epsabs=1e-12, epsrel=1e-12, limit=400)
    return val


def analytic_wavefunction(n, z, constants=DEFAULT_CONSTANTS):
    """Zero-field wavefunction ``psi_n(z)`` in m^-1/2."""
    if n < 1:
        raise ValueError(f"principal quantum number must be >= 1, got {n}")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("wavefunction is defined for z >= 0 only")
    rb = constants.bohr_radius
    x = z / rb
    out = _reduced(n, x) * x * rb**-0.5
    return out if out.ndim else float(out)


def analytic_state(n, constants=DEFAULT_CONSTANTS):
    return SEState(n=n, energy=rydberg_energy(n, constants), constants=constants)


def _require_normalized(state):
    if state.is_analytic:
        return
    norm = state.norm()
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state n={state.n} is not normalized (norm {norm:.3e})")


def expected_z(state):
    """Mean height ``<psi|z|psi>`` in metres."""
    _require_normalized(state)
    if state.is_analytic:
        n = state.n
        rb = state.constants.bohr_radius
        return rb * _quad_dimless(lambda x: _reduced(n, x) ** 2 * x**3, n)
    return float(state.step * np.sum(state.z * state.psi**2))


def dvdz_element(state, ez=0.0):
    """Diagonal force element ``<psi| Lambda e^2/z^2 + e E_z |psi>`` in newtons."""
    _require_normalized(state)
    c = state.constants
    if state.is_analytic:
        n = state.n
        rb = c.bohr_radius
        inv_z2 = _quad_dimless(lambda x: _reduced(n, x) ** 2, n) / rb**2
    else:
        h = state.step
        f = (state.psi / state.z) ** 2
        # trapezoid on [0, z_max]; f(0) from linear extrapolation since psi ~ z
        f0 = 2.0 * f[0] - f[1]
        inv_z2 = h * (0.5 * f0 + np.sum(f))
        if not np.isfinite(inv_z2) or inv_z2 <= 0:
            raise NumericalError(f"<1/z^2> did not converge for state n={state.n}")
    return c.coupling * inv_z2 + c.elementary_charge * ez


def default_box(ez, n_levels, constants=DEFAULT_CONSTANTS):
    """Box length covering the tail of the ``n_levels``-th state.

    Zero field: ``40 n^2 r_B``. With a field the triangular well caps the
    extent near the Airy turning point plus a dozen decay lengths.
    """
    z_max = BOX_FACTOR * n_levels**2 * constants.bohr_radius
    if ez > 0:
        force = constants.elementary_charge * ez
        length = (constants.hbar**2 / (2.0 * constants.electron_mass * force)) ** (1.0 / 3.0)
        a_n = -ai_zeros(n_levels)[0][-1]
        z_max = min(z_max, length * (a_n + 12.0))
    return z_max


def _fd_solve(ez, n_levels, z_max, points, constants):
    h = z_max / (points + 1)
    z = h * np.arange(1, points + 1)
    kin = constants.hbar**2 / (2.0 * constants.electron_mass * h * h)
    pot = -constants.coupling / z + constants.elementary_charge * ez * z
    w, v = eigh_tridiagonal(
        2.0 * kin + pot,
        np.full(points - 1, -kin),
        select="i",
        select_range=(0, n_levels - 1),
    )
    return z, w, v / np.sqrt(h)


def solve_stark_spectrum(ez, n_levels, z_max=None, points=DEFAULT_POINTS,
                         constants=DEFAULT_CONSTANTS, check=True):
    """Lowest ``n_levels`` bound states in the image potential plus holding field.

    Second-order central differences on ``z_k = k h`` with Dirichlet walls at
    0 and ``z_max``.

    Parameters
    ----------
    ez : float
        holding field in V/m (>= 0)
    n_levels : int
        number of states to return
    z_max : float, optional
        box length in m; defaults to :func:`default_box`
    points : int
        interior grid points, at least 2000
    check : bool
        verify grid convergence against a half-resolution solve and the
        wavefunction tail at ``z_max``

    Returns
    -------
    list of SEState
        ordered by energy, each normalized with ``h sum psi^2 = 1`` and sign
        fixed so the first lobe is positive

    Raises
    ------
    NumericalError
        if an energy moves by more than 0.1% under grid refinement or the
        tail at ``z_max`` exceeds 1e-6 of the peak
    """
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    if points < 2000:
        raise ValueError("at least 2000 grid points are required")
    if ez < 0:
        raise ValueError("holding field must be non-negative")
    if z_max is None:
        z_max = default_box(ez, n_levels, constants)
    z, w, v = _fd_solve(ez, n_levels, z_max, points, constants)

    if check:
        _, w_coarse, _ = _fd_solve(ez, n_levels, z_max, points // 2, constants)
        drift = np.abs(w_coarse - w) / np.abs(w)
        if drift.max() > ENERGY_RTOL:
            raise NumericalError(
                f"grid too coarse: energies move by {drift.max():.2e} under 2x refinement"
            )
        tail = max(1, points // 1000)
        for j in range(n_levels):
            peak = np.abs(v[:, j]).max()
            if np.abs(v[-tail:, j]).max() > TAIL_TOL * peak:
                raise NumericalError(f"z_max too small: state {j + 1} has not decayed at the wall")
    if np.any(np.diff(w) <= 0):
        raise NumericalError("eigenvalues are not strictly increasing")

    states = []
    for j in range(n_levels):
        psi = v[:, j]
        first = np.flatnonzero(np.abs(psi) > 1e-3 * np.abs(psi).max())[0]
        if psi[first] < 0:
            psi = -psi
        states.append(SEState(n=j + 1, energy=float(w[j]), z=z, psi=psi, constants=constants))
    return states


@dataclass
class DecayModel:
    """Two-ripplon decay rates ``kappa^(n)`` relative to ``kappa^(2)``.

    ``ratios[n]`` holds ``kappa^(n) / kappa^(2)`` for ``n = 2..n_max``.
    Absolute rates use the external calibration ``kappa2``.
    """

    holding_field: float
    n_max: int
    ratios: dict
    kappa2: float = DEFAULT_KAPPA2
    method: str = "analytic"

    def rate(self, n):
        return self.ratios[n] * self.kappa2

    def table_row(self):
        return [self.ratios[n] for n in range(3, self.n_max + 1)]


def decay_rate_ratios(ez, n_max=6, method=None, points=DEFAULT_POINTS,
                      constants=DEFAULT_CONSTANTS, kappa2=DEFAULT_KAPPA2):
    """Decay-rate ratios ``kappa^(n)/kappa^(2)`` under a holding field.

    ``kappa^(n)`` is proportional to ``sum_{l<n} F_ll F_nn Delta_nl^(2/3)``
    with ``F`` the diagonal ``dV/dz`` elements and ``Delta_nl`` the gap to
    each lower level; upward leakage is ignored.

    ``method`` defaults to ``"analytic"`` at zero field and ``"numeric"``
    otherwise. The analytic route is only valid at zero field.
    """
    if not 2 <= n_max <= 6:
        raise ValueError("n_max must lie in 2..6")
    if method is None:
        method = "analytic" if ez == 0 else "numeric"
    if method == "analytic":
        if ez != 0:
            raise ValueError("the analytic route requires zero holding field")
        states = [analytic_state(n, constants) for n in range(1, n_max + 1)]
    elif method == "numeric":
        states = solve_stark_spectrum(ez, n_max, points=points, constants=constants)
    else:
        raise ValueError(f"unknown method {method!r}")

    forces = np.array([dvdz_element(s, ez) for s in states])
    energies = np.array([s.energy for s in states])
    kappa = {}
    for n in range(2, n_max + 1):
        gaps = energies[n - 1] - energies[: n - 1]
        kappa[n] = forces[n - 1] * np.sum(forces[: n - 1] * gaps ** (2.0 / 3.0))
    ratios = {n: float(kappa[n] / kappa[2]) for n in kappa}
    return DecayModel(holding_field=ez, n_max=n_max, ratios=ratios, kappa2=kappa2, method=method)
