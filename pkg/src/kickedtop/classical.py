"""Classical kicked-top map on the unit sphere."""

import logging
from dataclasses import dataclass

import numpy as np

from ._validation import ContractError, NumericalError, check_nonneg_int

log = logging.getLogger(__name__)

SPHERE_TOL = 1e-12
TRAJECTORY_DRIFT_TOL = 1e-9


@dataclass(frozen=True)
class SpherePoint:
    X: float
    Y: float
    Z: float

    def __post_init__(self):
        if abs(self.X**2 + self.Y**2 + self.Z**2 - 1) > SPHERE_TOL:
            raise ContractError(f"({self.X}, {self.Y}, {self.Z}) is not on the unit sphere")

    @classmethod
    def from_angles(cls, theta, phi):
        return cls(np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))

    def as_array(self):
        return np.array([self.X, self.Y, self.Z])

    def angles(self):
        """``(theta, phi)`` with ``theta`` in [0, pi] and ``phi`` in [0, 2 pi)."""
        theta = float(np.arccos(np.clip(self.Z, -1.0, 1.0)))
        phi = float(np.mod(np.arctan2(self.Y, self.X), 2 * np.pi))
        return theta, phi


def _step(x, y, z, k, alpha):
    ca, sa = np.cos(alpha), np.sin(alpha)
    rx = x * ca + z * sa
    arg = k * (z * ca - x * sa)
    c, s = np.cos(arg), np.sin(arg)
    return rx * c - y * s, rx * s + y * c, -x * sa + z * ca


def classical_step(p, k, alpha):
    """One kick: y-rotation by ``alpha`` then a z-twist by ``k`` times the new Z."""
    x, y, z = _step(p.X, p.Y, p.Z, k, alpha)
    drift = abs(x * x + y * y + z * z - 1)
    if drift > SPHERE_TOL:
        log.warning("classical_step renormalized a drift of %.3e", drift)
        n = np.sqrt(x * x + y * y + z * z)
        x, y, z = x / n, y / n, z / n
    return SpherePoint(float(x), float(y), float(z))


def iterate_map(xyz, k, alpha, n):
    """Vectorized raw iteration of many points; returns shape ``(n, npoints, 3)``. No renormalization."""
    n = check_nonneg_int(n, "n")
    x, y, z = np.asarray(xyz, dtype=float).reshape(-1, 3).T
    out = np.empty((n, x.size, 3))
    for i in range(n):
        x, y, z = _step(x, y, z, k, alpha)
        out[i, :, 0], out[i, :, 1], out[i, :, 2] = x, y, z
    return out


def trajectory(p0, k, alpha, n):
    """``n`` successive images of ``p0``."""
    n = check_nonneg_int(n, "n")
    if n < 1:
        raise ContractError("trajectory length must be >= 1")
    pts = iterate_map(p0.as_array(), k, alpha, n)[:, 0, :]
    drift = np.max(np.abs(np.sum(pts**2, axis=1) - 1))
    if drift > TRAJECTORY_DRIFT_TOL:
        raise NumericalError(f"trajectory left the sphere (drift {drift:.3e})")
    return [SpherePoint(*map(float, row)) for row in pts]


def sample_sphere(n, seed):
    """``n`` points uniform on the sphere (uniform phi, uniform cos theta)."""
    rng = np.random.RandomState(int(seed))
    cos_t = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2 * np.pi, n)
    sin_t = np.sqrt(1 - cos_t**2)
    return np.column_stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t])


def phase_portrait(k, alpha, n_init, n_iter, seed):
    """Concatenated trajectories of ``n_init`` seeded random initial points, ``n_iter`` steps each.

    Returned as an ``(n_init * n_iter, 3)`` array ordered trajectory by trajectory.
    """
    if n_init < 1 or n_iter < 1:
        raise ContractError("n_init and n_iter must be >= 1")
    pts = iterate_map(sample_sphere(n_init, seed), k, alpha, n_iter)
    drift = np.max(np.abs(np.sum(pts**2, axis=2) - 1))
    if drift > TRAJECTORY_DRIFT_TOL:
        raise NumericalError(f"portrait left the sphere (drift {drift:.3e})")
    return pts.transpose(1, 0, 2).reshape(-1, 3)


def to_angles(xyz):
    xyz = np.asarray(xyz, dtype=float).reshape(-1, 3)
    theta = np.arccos(np.clip(xyz[:, 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(xyz[:, 1], xyz[:, 0]), 2 * np.pi)
    return np.column_stack([theta, phi])
