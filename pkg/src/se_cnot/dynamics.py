"""Time evolution of the driven levels.

Three routes are provided and cross-checked in the tests:

* the Lindblad master equation with level-projector jump operators
  (exact Liouvillian exponential per constant segment, or adaptive RK),
* no-jump Schrodinger evolution under the non-Hermitian Hamiltonian,
* closed-form amplitudes valid at ``Omega_1 = Omega_2`` and small detuning.

Time is dimensionless: ``t`` is measured in units of ``1/Omega`` of the
reference drive, so ``Omega t = 2 pi`` is one full transfer.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from . import quantum
from .driving import DriveParams, build_h_nonhermitian, build_h_rotating, embed4
from .errors import NumericalError

COHERENT = "coherent"
TWO_STEP = "two_step"

TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-9

# bare-basis labels -> index in the 3- and 4-level spaces
INDEX3 = {"01": 0, "10": 1, "11": 2}
INDEX4 = {"00": 0, "01": 1, "10": 2, "11": 3}


@dataclass(frozen=True)
class PulseSchedule:
    """Piecewise-constant drive: ``segments`` is a tuple of ``(duration, DriveParams)``."""

    segments: tuple
    scheme: str = COHERENT

    def __post_init__(self):
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        if any(d <= 0 for d, _ in self.segments):
            raise ValueError("segment durations must be positive")
        if self.scheme == COHERENT and len(self.segments) != 1:
            raise ValueError("coherent scheme has exactly one segment")
        if self.scheme == TWO_STEP:
            if len(self.segments) != 2:
                raise ValueError("two-step scheme has exactly two segments")
            (_, a), (_, b) = self.segments
            if not ((a.rabi_1 == 0 and b.rabi_2 == 0) or (a.rabi_2 == 0 and b.rabi_1 == 0)):
                raise ValueError("two-step segments must each switch one drive off")

    @property
    def duration(self):
        return sum(d for d, _ in self.segments)


def coherent_schedule(p, duration=2 * np.pi):
    return PulseSchedule(((duration, p),), COHERENT)


def two_step_schedule(p, extend=0.0):
    """Sequential pi-pulses ``|10> -> |01>`` then ``|01> -> |11>``.

    Each pulse has Rabi frequency ``Omega/sqrt(2)`` and lasts
    ``sqrt(2) pi / Omega``, so the transfer completes at ``2 sqrt(2) pi``.
    ``extend`` lengthens the second pulse past its nominal end.
    """
    r = p.omega / np.sqrt(2.0)
    t_pi = np.pi / r
    first = p.with_(rabi_1=0.0, rabi_2=r)
    second = p.with_(rabi_1=r, rabi_2=0.0)
    return PulseSchedule(((t_pi, first), (t_pi + extend, second)), TWO_STEP)


def scheme_period(scheme, p):
    if scheme == COHERENT:
        return 2 * np.pi / p.omega
    if scheme == TWO_STEP:
        return 2 * np.sqrt(2.0) * np.pi / p.omega
    raise ValueError(f"unknown scheme {scheme!r}")


def make_schedule(scheme, p, t_end):
    if scheme == COHERENT:
        return coherent_schedule(p, t_end)
    if scheme == TWO_STEP:
        return two_step_schedule(p, extend=max(t_end - scheme_period(TWO_STEP, p), 0.0))
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, d, d)

    @property
    def populations(self):
        return np.real(np.diagonal(self.states, axis1=1, axis2=2))

    @property
    def dim(self):
        return self.states.shape[1]


def _hamiltonian(p, dim):
    h = build_h_rotating(p)
    return embed4(h) if dim == 4 else h


def _projectors(dim):
    offset = dim - 3
    return [offset + i for i in range(3)]


def lindblad_rhs(rho, h, rates):
    """``-i[H, rho]`` minus the projector dissipator.

    The dissipator for level ``k`` with rate ``g`` is
    ``g (P rho P - {P, rho}/2)`` with ``P = |k><k|``; it is subtracted with
    the sign that damps coherences (``d rho_jk/dt = -(g_j + g_k)/2 rho_jk``).
    In dimension 4 the ``|00>`` row and column are untouched.
    """
    rho = np.asarray(rho, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if rho.shape != h.shape or rho.shape[0] not in (3, 4):
        raise ValueError(f"dimension mismatch: rho {rho.shape}, H {h.shape}")
    out = -1j * (h @ rho - rho @ h)
    g = np.zeros(rho.shape[0])
    g[_projectors(rho.shape[0])] = rates
    # P rho P keeps the diagonal; the anticommutator removes (g_j + g_k)/2
    diss = -0.5 * (g[:, None] + g[None, :]) * rho
    diss[np.diag_indices_from(diss)] += g * np.diag(rho)
    return out + diss


def liouvillian(h, rates):
    """Superoperator acting on row-major ``rho.ravel()``."""
    d = h.shape[0]
    cols = []
    for k in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[k] = 1.0
        cols.append(lindblad_rhs(e.reshape(d, d), h, rates).ravel())
    return np.column_stack(cols)


def _check_states(states, times):
    tr = np.real(np.trace(states, axis1=1, axis2=2))
    bad = np.abs(tr - 1.0) > TRACE_TOL
    if np.any(bad):
        raise NumericalError(f"trace drifted to {tr[bad][0]!r} at t={times[bad][0]:.4g}")
    herm = 0.5 * (states + np.conj(np.swapaxes(states, 1, 2)))
    if np.abs(states - herm).max() > 1e-10:
        raise NumericalError("density matrix lost Hermiticity")
    if np.linalg.eigvalsh(herm).min() < -POSITIVITY_TOL:
        raise NumericalError("density matrix lost positivity")


def _segment_bounds(schedule):
    t0 = 0.0
    for dur, p in schedule.segments:
        yield t0, t0 + dur, p
        t0 += dur


def evolve_master(rho0, schedule, t_grid, method="expm"):
    """Integrate the master equation across the schedule.

    Parameters
    ----------
    rho0 : ndarray
        initial density matrix, dimension 3 or 4
    schedule : PulseSchedule
    t_grid : array_like
        non-decreasing sample times within ``[0, schedule.duration]``
    method : {"expm", "rk"}
        exact Liouvillian exponential per constant piece, or adaptive
        DOP853 with rtol 1e-10, atol 1e-12

    Returns
    -------
    Trajectory
    """
    rho0 = quantum.check_density(rho0)
    dim = rho0.shape[0]
    if dim not in (3, 4):
        raise ValueError("only 3- and 4-level systems are supported")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be a non-decreasing 1-D sequence")
    if t_grid[0] < 0 or t_grid[-1] > schedule.duration * (1 + 1e-12):
        raise ValueError("t_grid must lie within the schedule duration")

    segments = []
    for start, stop, p in _segment_bounds(schedule):
        h = _hamiltonian(p, dim)
        segments.append((start, stop, liouvillian(h, p.rates), {}))

    out = np.empty((len(t_grid), dim, dim), dtype=complex)
    vec = rho0.ravel().astype(complex)
    t_now = 0.0
    for i, t in enumerate(t_grid):
        for start, stop, gen, cache in segments:
            a, b = max(t_now, start), min(t, stop)
            if b > a:
                vec = _advance(vec, gen, b - a, method, cache)
        t_now = t
        out[i] = vec.reshape(dim, dim)
    _check_states(out, t_grid)
    return Trajectory(times=t_grid, states=out)


def _advance(vec, gen, dt, method, cache):
    if method == "expm":
        key = round(dt, 13)
        if key not in cache:
            cache[key] = quantum.matrix_exponential(gen, dt)
        return cache[key] @ vec
    if method == "rk":
        sol = solve_ivp(lambda _t, y: gen @ y, (0.0, dt), vec, method="DOP853",
                        rtol=1e-10, atol=1e-12)
        if not sol.success:
            raise NumericalError(f"integrator failed: {sol.message}")
        return sol.y[:, -1]
    raise ValueError(f"unknown method {method!r}")


def evolve_nonhermitian(psi0, p, t, include_kappa3=False):
    """No-jump evolution ``exp(-i H_d t) psi0``; the norm decays with time."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (3,):
        raise ValueError("no-jump evolution acts on the three driven levels")
    u = quantum.matrix_exponential(build_h_nonhermitian(p, include_kappa3), -1j * t)
    return u @ psi0


def analytic_evolution(initial, p, t):
    """Closed-form amplitudes for ``Omega_1 = Omega_2`` and small detunings.

    The ``|01>`` amplitude carries ``-i sin(Omega t / 2)``, which is the
    convention of a drive coupling with the opposite sign to
    :func:`~se_cnot.driving.build_h_rotating`. The two differ by the gauge
    ``diag(-1, 1, 1)``, so all populations agree.

    Parameters
    ----------
    initial : {"10", "01", "11"}
    p : DriveParams
    t : float or array_like

    Returns
    -------
    ndarray
        amplitudes in the order ``(|01>, |10>, |11>)``; shape ``(3,)`` or
        ``(len(t), 3)``
    """
    if initial not in INDEX3:
        raise ValueError(f"closed forms exist for |10>, |01>, |11> only, got {initial!r}")
    if not np.isclose(p.rabi_1, p.rabi_2, rtol=1e-9, atol=0):
        raise ValueError("closed forms require Omega_1 = Omega_2")
    om = p.omega
    d1, d2 = p.delta_1, p.delta_2
    if max(abs(d1), abs(d2)) > 0.1 * om:
        raise ValueError("closed forms require |delta| <= 0.1 Omega")
    t = np.asarray(t, dtype=float)
    slow = np.exp(-1j * (2 * d1 + d2) * t / 4)
    dark = np.exp(-1j * d2 * t / 2)
    c = np.cos(om * t / 2)
    s = np.sin(om * t / 2)
    r2 = np.sqrt(2.0)
    if initial == "10":
        amps = (-1j / r2 * s * slow, 0.5 * c * slow + 0.5 * dark, 0.5 * c * slow - 0.5 * dark)
    elif initial == "01":
        amps = (c * slow, -1j / r2 * s * slow, -1j / r2 * s * slow)
    else:
        amps = (-1j / r2 * s * slow, 0.5 * c * slow - 0.5 * dark, 0.5 * c * slow + 0.5 * dark)
    return np.stack(np.broadcast_arrays(*amps), axis=-1)


def _fidelity_at(rho0, schedule, target, t):
    traj = evolve_master(rho0, schedule, [t])
    return quantum.state_fidelity(target, traj.states[0])


def peak_transfer_search(scheme, p, target=None, initial=None, margin=0.2, coarse=241):
    """First fidelity maximum of a state transfer.

    A coarse scan over ``(0, (1 + margin) * period]`` locates the first
    interior local maximum, then a golden-section search refines it.

    Parameters
    ----------
    scheme : {"coherent", "two_step"}
    p : DriveParams
        drive for the coherent scheme; the two-step scheme reuses its
        detunings, rates and total Rabi frequency
    target, initial : ndarray, optional
        three-level density matrices; default ``|11><11|`` and ``|10><10|``

    Returns
    -------
    (float, float)
        peak time (units of ``1/Omega``) and peak fidelity
    """
    if target is None:
        target = quantum.ket_to_density(quantum.basis_ket(INDEX3["11"], 3))
    if initial is None:
        initial = quantum.ket_to_density(quantum.basis_ket(INDEX3["10"], 3))
    t_end = (1.0 + margin) * scheme_period(scheme, p)
    schedule = make_schedule(scheme, p, t_end)
    times = np.linspace(0.0, t_end, coarse)
    traj = evolve_master(initial, schedule, times)
    f = np.array([quantum.state_fidelity(target, rho) for rho in traj.states])
    peaks = np.flatnonzero((f[1:-1] >= f[:-2]) & (f[1:-1] > f[2:])) + 1
    if peaks.size == 0:
        raise NumericalError("no interior fidelity maximum in the search window")
    k = peaks[0]
    res = minimize_scalar(
        lambda t: -_fidelity_at(initial, schedule, target, t),
        bracket=(times[k - 1], times[k], times[k + 1]),
        method="golden",
        tol=1e-10,
    )
    if -res.fun < f[k]:
        return float(times[k]), float(f[k])
    return float(res.x), float(-res.fun)


def detuning_sweep(axis, values, p):
    """Peak ``|10> -> |11>`` fidelity of the coherent scheme against one detuning.

    ``axis`` is ``"delta_1"`` or ``"delta_2"``; the other detuning keeps the
    value in ``p``.
    """
    attr = {"delta_1": "detuning_1", "delta_2": "detuning_2"}.get(axis)
    if attr is None:
        raise ValueError(f"axis must be 'delta_1' or 'delta_2', got {axis!r}")
    out = []
    for d in values:
        if abs(d) > 0.5 * p.omega:
            raise ValueError("detuning sweeps are limited to |Delta| <= 0.5 Omega")
        _, f = peak_transfer_search(COHERENT, p.with_(**{attr: float(d)}))
        out.append((float(d), f))
    return out


def default_drive(kappa_1=1e-3):
    """Resonant drive with the zero-field decay ratios."""
    return DriveParams.resonant(kappa_1=kappa_1)
