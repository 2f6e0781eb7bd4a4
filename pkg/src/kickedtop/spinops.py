"""Angular momentum matrices, spin-coherent states, Hermitian exponentials and GOE draws.

All matrices use the J_z eigenbasis ordered m = j, j-1, ..., -j.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from ._validation import ContractError, check_hermitian

#: Name of the bit generator behind :func:`goe_sample` and every other seeded draw.
#: numpy guarantees the legacy ``RandomState`` stream is frozen across releases.
PRNG_NAME = "numpy.RandomState/MT19937-legacy-gauss"


@dataclass(frozen=True)
class Spin:
    """Spin quantum number stored exactly as ``twice_j = 2j``."""

    twice_j: int

    def __post_init__(self):
        if isinstance(self.twice_j, bool) or int(self.twice_j) != self.twice_j:
            raise ContractError(f"twice_j must be an integer, got {self.twice_j!r}")
        if self.twice_j < 1:
            raise ContractError(f"twice_j must be >= 1, got {self.twice_j}")
        object.__setattr__(self, "twice_j", int(self.twice_j))

    @classmethod
    def from_j(cls, j):
        """Build from ``j`` given as int, float, Fraction or a string like ``"3/2"``."""
        try:
            twice = 2 * Fraction(j)
        except (TypeError, ValueError) as exc:
            raise ContractError(f"cannot parse spin {j!r}") from exc
        if twice.denominator != 1:
            raise ContractError(f"j must be an integer or half-integer, got {j!r}")
        return cls(int(twice))

    @property
    def j(self):
        return self.twice_j / 2

    @property
    def dim(self):
        return self.twice_j + 1

    @property
    def is_integer(self):
        return self.twice_j % 2 == 0

    def m_values(self):
        """Magnetic quantum numbers in basis order (descending)."""
        return self.j - np.arange(self.dim, dtype=float)

    def __str__(self):
        return str(self.twice_j // 2) if self.is_integer else f"{self.twice_j}/2"


@dataclass(frozen=True)
class CoherentAngles:
    theta: float
    phi: float

    def __post_init__(self):
        theta, phi = float(self.theta), float(self.phi)
        if not (np.isfinite(theta) and np.isfinite(phi)):
            raise ContractError("coherent-state angles must be finite")
        if not 0.0 <= theta <= np.pi:
            raise ContractError(f"theta must lie in [0, pi], got {theta!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", float(np.mod(phi, 2 * np.pi)))


def _as_spin(spin):
    return spin if isinstance(spin, Spin) else Spin.from_j(spin)


def jz_matrix(spin):
    spin = _as_spin(spin)
    return np.diag(spin.m_values()).astype(complex)


def jpm_matrices(spin):
    """Return the ladder operators ``(J_+, J_-)``."""
    spin = _as_spin(spin)
    j = spin.j
    m = spin.m_values()
    # <j, m+1| J_+ |j, m> sits one column right of the diagonal in descending order
    elems = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = np.diag(elems, k=1).astype(complex)
    return jp, jp.T.copy()


def angular_momentum(spin):
    """Return ``(J_x, J_y, J_z)``."""
    jp, jm = jpm_matrices(spin)
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    return jx, jy, jz_matrix(spin)


def coherent_state(spin, angles):
    """Spin-coherent state pointing along ``(theta, phi)``.

    Amplitudes on ``|j, j-n>`` are ``sqrt(C(2j, n)) sin^n(theta/2) cos^(2j-n)(theta/2) e^{i n phi}``,
    the closed form of ``exp(beta J_-) |j, j> / (1 + |beta|^2)^j`` with
    ``beta = e^{i phi} tan(theta/2)``. Evaluated in log space so large spins do not overflow.
    """
    spin = _as_spin(spin)
    if not isinstance(angles, CoherentAngles):
        angles = CoherentAngles(*angles)
    n2j = spin.twice_j
    n = np.arange(spin.dim)
    s, c = np.sin(angles.theta / 2), np.cos(angles.theta / 2)
    log_binom = 0.5 * (gammaln(n2j + 1) - gammaln(n + 1) - gammaln(n2j - n + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        log_s = np.log(s) if s > 0 else -np.inf
        log_c = np.log(c) if c > 0 else -np.inf
        # 0 * log(0) terms are the exact zero powers at the poles
        log_mag = log_binom + np.where(n > 0, n * log_s, 0.0) + np.where(n2j - n > 0, (n2j - n) * log_c, 0.0)
    psi = np.exp(log_mag) * np.exp(1j * n * angles.phi)
    return psi / np.linalg.norm(psi)


def basis_state(spin, m):
    """The J_z eigenstate ``|j, m>``."""
    spin = _as_spin(spin)
    idx = spin.j - m
    if idx != int(idx) or not 0 <= idx < spin.dim:
        raise ContractError(f"m={m} is not a valid magnetic quantum number for j={spin}")
    psi = np.zeros(spin.dim, dtype=complex)
    psi[int(idx)] = 1.0
    return psi


def expm_unitary(h, t):
    """``exp(-i t H)`` for Hermitian ``H`` via eigendecomposition."""
    h = check_hermitian(h, "H")
    # symmetrize away sub-tolerance asymmetry so eigh sees an exactly Hermitian matrix
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def goe_sample(dim, seed):
    """Real symmetric ``(G + G^T)/2`` with standard-normal ``G``; off-diagonal variance 1/2."""
    if isinstance(dim, bool) or int(dim) != dim or dim < 2:
        raise ContractError(f"GOE dimension must be an integer >= 2, got {dim!r}")
    rng = np.random.RandomState(int(seed))
    g = rng.standard_normal((int(dim), int(dim)))
    return (g + g.T) / 2
