"""Kicked-top Floquet operator ``U(k) = exp(-i k J_z^2 / 2j) exp(-i alpha J_y)`` and friends."""

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from ._validation import (
    ContractError,
    NumericalError,
    check_finite,
    check_nonneg_int,
    check_square,
    check_unitary,
    unitarity_defect,
)
from .spinops import Spin, angular_momentum, expm_unitary

POWER_CHECK_EVERY = 100
POWER_DRIFT_TOL = 1e-9
SCALAR_TOL = 1e-12


@dataclass(frozen=True)
class FloquetParams:
    spin: Spin
    k: float
    alpha: float

    def __post_init__(self):
        if not isinstance(self.spin, Spin):
            object.__setattr__(self, "spin", Spin.from_j(self.spin))
        object.__setattr__(self, "k", check_finite(self.k, "k"))
        object.__setattr__(self, "alpha", check_finite(self.alpha, "alpha"))

    def with_k(self, k):
        return replace(self, k=k)


@lru_cache(maxsize=64)
def _rotation(twice_j, alpha):
    _, jy, _ = angular_momentum(Spin(twice_j))
    r = expm_unitary(jy, alpha)
    r.setflags(write=False)
    return r


def torsion_diagonal(spin, k):
    """Diagonal of ``exp(-i k J_z^2 / 2j)`` in basis order."""
    m = spin.m_values()
    return np.exp(-1j * k * m**2 / spin.twice_j)


def build_floquet(p):
    """One-period Floquet unitary: y-precession by ``alpha`` then the ``J_z^2`` torsion."""
    return torsion_diagonal(p.spin, p.k)[:, None] * _rotation(p.spin.twice_j, p.alpha)


def floquet_power(u, m):
    """``U^m`` by repeated multiplication, re-checking unitarity every 100 steps."""
    u = check_square(u, "U")
    m = check_nonneg_int(m, "m")
    out = np.eye(u.shape[0], dtype=complex)
    for step in range(1, m + 1):
        out = u @ out
        if step % POWER_CHECK_EVERY == 0 or step == m:
            drift = unitarity_defect(out)
            if drift > POWER_DRIFT_TOL:
                raise NumericalError(f"U^{step} lost unitarity (drift {drift:.3e} > {POWER_DRIFT_TOL:g})")
    return out


def kappa_period(spin, p=1):
    """Fundamental k-period: ``4 pi j p`` for integer ``j``, ``2 pi j p`` for half-integer ``j``."""
    if not isinstance(spin, Spin):
        spin = Spin.from_j(spin)
    p = check_nonneg_int(p, "p")
    if p < 1:
        raise ContractError("period multiple p must be >= 1")
    factor = 4 if spin.is_integer else 2
    return factor * np.pi * spin.j * p


def prefactor_scalar(spin, kappa, tol=SCALAR_TOL):
    """Common value ``z`` of ``exp(-i kappa m^2 / 2j)`` over all ``m``, or ``None`` if they differ.

    ``U(k + kappa) = diag(exp(-i kappa m^2 / 2j)) U(k)``; a scalar prefactor means every
    conjugation by ``U^m`` is unchanged by the shift.
    """
    if not isinstance(spin, Spin):
        spin = Spin.from_j(spin)
    kappa = check_finite(kappa, "kappa")
    if kappa < 0:
        raise ContractError(f"kappa must be >= 0, got {kappa}")
    diag = torsion_diagonal(spin, kappa)
    if np.max(np.abs(diag - diag[0])) > tol:
        return None
    return complex(diag.mean())


def quasienergies(u, branch="principal"):
    """Sorted eigenphases of a unitary.

    ``branch="principal"`` maps phases into (-pi, pi]. ``branch="half"`` folds them into
    (-pi/2, pi/2], i.e. ``arctan(Im/Re)`` of each eigenvalue, which identifies ``U`` with ``-U``.
    """
    u = check_unitary(u, "U", tol=1e-10)
    try:
        lam = np.linalg.eigvals(u)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    phases = np.angle(lam)
    if branch == "principal":
        phases = np.where(phases <= -np.pi, phases + 2 * np.pi, phases)
    elif branch == "half":
        phases = phases - np.pi * np.round(phases / np.pi)
        phases = np.where(phases <= -np.pi / 2, phases + np.pi, phases)
    else:
        raise ContractError(f"unknown quasienergy branch {branch!r}")
    return np.sort(phases)
