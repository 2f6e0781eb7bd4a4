"""Closed-form oracles for special kicked-top cases.

These never call into :mod:`kickedtop.floquet`; tests compare the two routes.
"""

from dataclasses import dataclass
from math import gcd

import numpy as np

from ._validation import ContractError, check_nonneg_int

SQRT3_2 = np.sqrt(3.0) / 2


def chebyshev_T(m, x):
    """Chebyshev polynomial of the first kind by the three-term recurrence."""
    m = check_nonneg_int(m, "m")
    prev, cur = 1.0, x
    if m == 0:
        return prev
    for _ in range(m - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def chebyshev_U(m, x):
    """Chebyshev polynomial of the second kind, with ``U_{-1} = 0``."""
    if isinstance(m, bool) or int(m) != m or m < -1:
        raise ContractError(f"m must be an integer >= -1, got {m!r}")
    prev, cur = 0.0, 1.0
    for _ in range(int(m) + 1):
        prev, cur = cur, 2 * x * cur - prev
    return prev


def _alpha_beta(k, m, denom):
    chi = np.sin(k / denom) / 2
    u = chebyshev_U(m - 1, chi)
    alpha = chebyshev_T(m, chi) + 0.5j * u * np.cos(k / denom)
    beta = SQRT3_2 * u * np.exp(1j * k / denom)
    return alpha, beta


def alpha_beta_j32(k, m):
    """``(alpha_m, beta_m)`` of the j=3/2, alpha=pi/2 top with ``chi = sin(k/3)/2``."""
    return _alpha_beta(k, m, 3.0)


def alpha_beta_j2(k, m):
    """Same construction with ``k/2`` in place of ``k/3``."""
    return _alpha_beta(k, m, 2.0)


def _overlap(ab, ab_t):
    (a, b), (at, bt) = ab, ab_t
    return a * np.conj(at) + b * np.conj(bt) + np.conj(b) * bt + np.conj(a) * at


def le_analytic_j32(k, k_prime, m):
    """``|a a~* + b b~* + b* b~ + a* a~|^2`` for j=3/2 at alpha=pi/2.

    This equals ``|Tr(U(k')^-m U(k)^m)|^2 / 4``; the state-averaged echo is
    ``(4 + 4 * value) / 20``, see :func:`echo_from_j32`.
    """
    m = check_nonneg_int(m, "m")
    g = _overlap(alpha_beta_j32(k, m), alpha_beta_j32(k_prime, m))
    return float(abs(g) ** 2)


def echo_from_j32(value, scale=4.0):
    """Map the j=3/2 closed form onto the ``(d + |Tr|^2) / (d (d+1))`` echo with d = 4."""
    return (4.0 + scale * value) / 20.0


def trace_j2(k, dk, m):
    """``Tr(U(k+dk)^-m U(k)^m)`` for j=2, alpha=pi/2, assembled sector by sector.

    The J_y-parity-even sector contributes a one-dimensional phase plus the two-level
    Chebyshev block; the parity-odd pair contributes ``2 cos(3 dk/8)`` at odd ``m``.
    """
    m = check_nonneg_int(m, "m")
    g = _overlap(alpha_beta_j2(k, m), alpha_beta_j2(k + dk, m))
    c2, s2 = np.cos(m * np.pi / 2) ** 2, np.sin(m * np.pi / 2) ** 2
    odd = 2 * np.exp(5j * m * dk / 8) * (c2 + s2 * np.cos(3 * dk / 8))
    return np.exp(1j * m * dk / 4) + np.exp(1j * m * dk / 2) * g + odd


def le_analytic_j2(k, dk, m):
    """State-averaged echo for j=2, alpha=pi/2, ``k' = k + dk``."""
    return float((5 + abs(trace_j2(k, dk, m)) ** 2) / 30)


def special_unitary_power(k, m):
    """``U(k)^m`` for j=1, alpha=pi, written out from its corner structure."""
    m = check_nonneg_int(m, "m")
    e = np.exp(-0.5j * k)
    a = 0.5 * (e**m + (-e) ** m)
    b = 0.5 * (e**m - (-e) ** m)
    return np.array([[a, 0, b], [0, (-1) ** m, 0], [b, 0, a]], dtype=complex)


@dataclass(frozen=True)
class RationalKick:
    """Kick strength ``k = r pi / s`` in lowest terms."""

    r: int
    s: int

    def __post_init__(self):
        if self.s < 1:
            raise ContractError(f"s must be positive, got {self.s}")
        if gcd(abs(self.r), self.s) != 1:
            raise ContractError(f"r/s = {self.r}/{self.s} is not in lowest terms")

    @property
    def k(self):
        return self.r * np.pi / self.s


def time_period_alpha_pi(kick):
    """Time period of the j=1, alpha=pi dynamics at ``k = r pi / s``: 4s for odd r, 2s for even r."""
    return 4 * kick.s if kick.r % 2 else 2 * kick.s
