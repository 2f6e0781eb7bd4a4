import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kickedtop import ContractError
from kickedtop.classical import (
    SpherePoint,
    classical_step,
    iterate_map,
    phase_portrait,
    sample_sphere,
    to_angles,
    trajectory,
)
from kickedtop.floquet import FloquetParams
from kickedtop.measures import evolve_states
from kickedtop.spinops import Spin, angular_momentum, coherent_state

unit = st.tuples(st.floats(0, np.pi), st.floats(0, 2 * np.pi, exclude_max=True))


def quarter_turn_map(x, y, z, k):
    """The alpha = pi/2 form of the map, written out separately."""
    return z * np.cos(k * x) + y * np.sin(k * x), -z * np.sin(k * x) + y * np.cos(k * x), -x


@settings(max_examples=50, deadline=None)
@given(unit, st.floats(-10, 10))
def test_general_map_reduces_at_quarter_turn(angles, k):
    p = SpherePoint.from_angles(*angles)
    got = classical_step(p, k, np.pi / 2).as_array()
    np.testing.assert_allclose(got, quarter_turn_map(p.X, p.Y, p.Z, k), atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(unit, st.floats(-10, 10), st.floats(0, 2 * np.pi))
def test_step_stays_on_sphere(angles, k, alpha):
    q = classical_step(SpherePoint.from_angles(*angles), k, alpha)
    assert abs(q.X**2 + q.Y**2 + q.Z**2 - 1) <= 1e-12


def test_zero_kick_is_rotation_about_y():
    p = SpherePoint.from_angles(0.4, 1.9)
    q = classical_step(p, 0.0, 0.3)
    c, s = np.cos(0.3), np.sin(0.3)
    np.testing.assert_allclose(q.as_array(), [c * p.X + s * p.Z, p.Y, -s * p.X + c * p.Z], atol=1e-15)


@pytest.mark.parametrize("twice_j", [100, 400])
def test_large_spin_limit_of_quantum_step(twice_j):
    """Coherent-state expectations after one quantum kick follow the map up to O(1/j)."""
    spin = Spin(twice_j)
    theta, phi, k = 1.0, 0.5, 3.0
    psi = evolve_states(FloquetParams(spin, k, np.pi / 2), coherent_state(spin, (theta, phi)), 1)[1]
    quantum = np.array([np.vdot(psi, op @ psi).real for op in angular_momentum(spin)]) / spin.j
    classical = classical_step(SpherePoint.from_angles(theta, phi), k, np.pi / 2).as_array()
    assert np.max(np.abs(quantum - classical)) < 3.0 / spin.j


def test_norm_drift_long_run():
    pts = iterate_map(SpherePoint.from_angles(0.7, 0.3).as_array(), 7.0, np.pi / 2, 100_000)
    assert np.max(np.abs(np.sum(pts**2, axis=2) - 1)) <= 1e-9


def test_trajectory_matches_repeated_steps():
    p = SpherePoint.from_angles(1.2, 2.2)
    traj = trajectory(p, 2.5, 0.9, 20)
    q = p
    for want in traj:
        q = classical_step(q, 2.5, 0.9)
        np.testing.assert_allclose(q.as_array(), want.as_array(), atol=1e-13)
    with pytest.raises(ContractError):
        trajectory(p, 1.0, 1.0, 0)


def test_sphere_point_validation_and_angles():
    with pytest.raises(ContractError):
        SpherePoint(1.0, 1.0, 0.0)
    theta, phi = SpherePoint.from_angles(2.0, 5.5).angles()
    assert theta == pytest.approx(2.0) and phi == pytest.approx(5.5)


def test_step_renormalizes_with_warning(caplog):
    # slightly off-sphere input built by bypassing validation
    p = object.__new__(SpherePoint)
    object.__setattr__(p, "X", 0.0)
    object.__setattr__(p, "Y", 0.0)
    object.__setattr__(p, "Z", 1.0 + 1e-8)
    with caplog.at_level(logging.WARNING, logger="kickedtop.classical"):
        q = classical_step(p, 1.0, 0.5)
    assert "renormalized" in caplog.text
    assert abs(q.X**2 + q.Y**2 + q.Z**2 - 1) <= 1e-12


def test_sample_sphere_is_uniform_and_seeded():
    pts = sample_sphere(20_000, 4)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-14)
    assert np.max(np.abs(pts.mean(axis=0))) < 0.02
    # uniform measure: each coordinate squared averages to 1/3
    np.testing.assert_allclose((pts**2).mean(axis=0), 1 / 3, atol=0.01)
    np.testing.assert_array_equal(pts, sample_sphere(20_000, 4))


def test_phase_portrait_layout():
    pts = phase_portrait(3.0, np.pi / 2, 5, 40, seed=9)
    assert pts.shape == (200, 3)
    first = iterate_map(sample_sphere(5, 9), 3.0, np.pi / 2, 40)[:, 0, :]
    np.testing.assert_array_equal(pts[:40], first)
    ang = to_angles(pts)
    assert np.all((ang[:, 0] >= 0) & (ang[:, 0] <= np.pi))
    assert np.all((ang[:, 1] >= 0) & (ang[:, 1] < 2 * np.pi))
    with pytest.raises(ContractError):
        phase_portrait(1.0, 1.0, 0, 10, seed=0)


def twin_dispersion(k, n=400, steps=50, eps=1e-6):
    """Fraction of orbits whose 1e-6 perturbed twin stays within 1e-2 after ``steps`` kicks."""
    a = sample_sphere(n, 1)
    b = a + eps * sample_sphere(n, 2)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    sep = np.linalg.norm(iterate_map(a, k, np.pi / 2, steps)[-1] - iterate_map(b, k, np.pi / 2, steps)[-1], axis=1)
    return np.mean(sep < 1e-2)


def test_regular_versus_chaotic_portrait():
    assert twin_dispersion(0.5) > 0.9
    assert twin_dispersion(7.0) < 0.1
