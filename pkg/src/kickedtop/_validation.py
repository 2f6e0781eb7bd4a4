"""Exceptions and input validation helpers shared by every module."""

import numpy as np

UNITARY_TOL = 1e-12
HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12


class ContractError(ValueError):
    """An input violates a documented precondition."""


class AlignmentError(ContractError):
    """A k grid does not line up with the requested shift."""


class NumericalError(ArithmeticError):
    """A numerical guarantee (unitarity, norm, reality) was lost."""


class InvariantViolation(RuntimeError):
    """A result that must hold by construction did not."""


def check_square(a, name="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(f"{name} must be a square matrix, got shape {a.shape}")
    return a


def check_hermitian(a, name="operator", tol=HERMITIAN_TOL):
    a = check_square(a, name)
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > tol:
        raise ContractError(f"{name} must be Hermitian (max |H - H^dag| = {dev:.3e} > {tol:g})")
    return a


def unitarity_defect(u):
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def check_unitary(u, name="U", tol=UNITARY_TOL):
    u = check_square(u, name)
    dev = unitarity_defect(u)
    if dev > tol:
        raise ContractError(f"{name} must be unitary (max |U^dag U - I| = {dev:.3e} > {tol:g})")
    return u


def check_state(psi, dim=None, name="state", tol=NORM_TOL):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ContractError(f"{name} must be a 1-d amplitude vector, got shape {psi.shape}")
    if dim is not None and psi.shape[0] != dim:
        raise ContractError(f"{name} has dimension {psi.shape[0]}, expected {dim}")
    dev = abs(np.vdot(psi, psi).real - 1.0)
    if dev > tol:
        raise ContractError(f"{name} must be normalized (|<psi|psi> - 1| = {dev:.3e})")
    return psi


def check_nonneg_int(value, name):
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise ContractError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)


def check_finite(value, name):
    value = float(value)
    if not np.isfinite(value):
        raise ContractError(f"{name} must be finite, got {value!r}")
    return value


def check_grid(axis, name="axis"):
    """Return ``axis`` as a 1-d float array, requiring strictly increasing finite values."""
    axis = np.asarray(axis, dtype=float).ravel()
    if not np.all(np.isfinite(axis)):
        raise ContractError(f"{name} must be finite")
    if axis.size > 1 and np.any(np.diff(axis) <= 0):
        raise ContractError(f"{name} must be strictly increasing")
    return axis
