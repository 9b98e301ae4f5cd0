"""Small dense quantum objects: kets, density matrices, fidelities.

Kets, density matrices and operators are plain complex numpy arrays. The
helpers here validate them on demand rather than wrapping them in classes.
"""

import numpy as np
from scipy.linalg import expm

from .errors import NumericalError

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-10
# eigenvalues this far below the largest are round-off; sqrt would amplify them
ROUNDOFF = 1e-14


def basis_ket(index, dim):
    """Return the computational basis vector ``|index>`` of dimension ``dim``."""
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for dimension {dim}")
    k = np.zeros(dim, dtype=complex)
    k[index] = 1.0
    return k


def is_normalized(ket, tol=NORM_TOL):
    return abs(np.vdot(ket, ket).real - 1.0) <= tol


def is_hermitian(op, tol=HERMITIAN_TOL):
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and np.allclose(op, op.conj().T, rtol=0, atol=tol)


def check_density(rho, *, unit_trace=True, tol=POSITIVITY_TOL):
    """Validate a density matrix and return it as a Hermitian complex array.

    Raises
    ------
    ValueError
        if ``rho`` is not square, not Hermitian, has an eigenvalue below
        ``-tol`` or (when ``unit_trace``) a trace off by more than 1e-9.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density matrix has non-finite entries")
    scale = max(1.0, np.abs(rho).max())
    if not is_hermitian(rho, HERMITIAN_TOL * scale):
        raise ValueError("density matrix is not Hermitian")
    if unit_trace and abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix trace {np.trace(rho).real!r} differs from 1")
    rho = 0.5 * (rho + rho.conj().T)
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def ket_to_density(ket):
    """Outer product ``|k><k|``; the trace equals the squared norm of ``k``."""
    ket = np.asarray(ket, dtype=complex).ravel()
    if not np.all(np.isfinite(ket)):
        raise ValueError("ket has non-finite amplitudes")
    return np.outer(ket, ket.conj())


def _psd_sqrt(rho):
    w, v = np.linalg.eigh(rho)
    if w.min() < -POSITIVITY_TOL:
        raise ValueError(f"matrix has eigenvalue {w.min():.3e} below -{POSITIVITY_TOL}")
    w = _drop_roundoff(w)
    return (v * np.sqrt(w)) @ v.conj().T


def _drop_roundoff(w):
    return np.where(w > ROUNDOFF * max(abs(w).max(), 1e-300), w, 0.0)


def state_fidelity(target, actual):
    """Uhlmann fidelity ``(Tr sqrt(sqrt(t) a sqrt(t)))**2``.

    Parameters
    ----------
    target : ndarray
        unit-trace density matrix of the ideal state
    actual : ndarray
        density matrix of the realised state, same dimension

    Returns
    -------
    float
        fidelity clipped into [0, 1]
    """
    target = check_density(target)
    actual = check_density(actual, unit_trace=False)
    if target.shape != actual.shape:
        raise ValueError(f"dimension mismatch: {target.shape} vs {actual.shape}")
    s = _psd_sqrt(target)
    m = s @ actual @ s
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if w.min() < -POSITIVITY_TOL:
        raise ValueError("product sqrt(target) actual sqrt(target) is not positive")
    f = np.sqrt(_drop_roundoff(w)).sum() ** 2
    return float(min(max(f, 0.0), 1.0))


def gate_fidelity(real_gate, ideal_gate):
    """Phase-optimised trace overlap ``|Tr(U_r^dag U_i)| / N``.

    The modulus already realises the best global phase, so no scan over the
    phase is needed.
    """
    real_gate = np.asarray(real_gate, dtype=complex)
    ideal_gate = np.asarray(ideal_gate, dtype=complex)
    if real_gate.ndim != 2 or real_gate.shape[0] != real_gate.shape[1]:
        raise ValueError("gates must be square matrices")
    if real_gate.shape != ideal_gate.shape:
        raise ValueError(f"dimension mismatch: {real_gate.shape} vs {ideal_gate.shape}")
    n = real_gate.shape[0]
    overlap = np.trace(real_gate.conj().T @ ideal_gate)
    return float(min(abs(overlap) / n, 1.0))


def matrix_exponential(a, scale=1.0):
    """Return ``exp(scale * a)`` (Pade scaling and squaring)."""
    a = np.asarray(a)
    if not np.all(np.isfinite(a)) or not np.isfinite(scale):
        raise ValueError("matrix exponential of non-finite input")
    with np.errstate(over="ignore", invalid="ignore"):
        out = expm(scale * a)
    if not np.all(np.isfinite(out)):
        raise NumericalError("matrix exponential overflowed")
    return out
