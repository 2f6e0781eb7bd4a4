"""Dynamical chaos diagnostics of the kicked top: OTOC, Loschmidt echo, GE and OE."""

from dataclasses import dataclass

import numpy as np

from ._validation import (
    ContractError,
    NumericalError,
    check_hermitian,
    check_nonneg_int,
    check_state,
)
from .floquet import build_floquet, floquet_power
from .series import MeasureSeries
from .spinops import CoherentAngles, Spin, angular_momentum, coherent_state, jz_matrix

OTOC_IMAG_TOL = 1e-10
GE_CLAMP = 1e-12


# ---------------------------------------------------------------- OTOC


def _otoc_from(wm, w, d):
    comm = wm @ w - w @ wm
    tr = np.trace(comm @ comm)
    if abs(tr.imag) > OTOC_IMAG_TOL * max(1.0, abs(tr.real)):
        raise NumericalError(f"OTOC trace has imaginary part {tr.imag:.3e}; W(m) is not Hermitian")
    # + 0.0 turns a -0.0 from a vanishing commutator into 0.0
    return float(-tr.real / (2 * d)) + 0.0


def otoc(p, w, m):
    """Infinite-temperature OTOC ``-(1/2d) Tr([W(m), W]^2)`` with ``W(m) = U^m W U^-m``."""
    w = check_hermitian(w, "W")
    d = p.spin.dim
    if w.shape[0] != d:
        raise ContractError(f"W has dimension {w.shape[0]}, system has {d}")
    um = floquet_power(build_floquet(p), m)
    return _otoc_from(um @ w @ um.conj().T, w, d)


def otoc_jz(p, m):
    return otoc(p, jz_matrix(p.spin), m)


def otoc_series(p, w, m_max):
    """OTOC at every step ``m = 0 .. m_max``."""
    w = check_hermitian(w, "W")
    m_max = check_nonneg_int(m_max, "m_max")
    u = build_floquet(p)
    d = p.spin.dim
    out = np.empty(m_max + 1)
    wm = w
    for step in range(m_max + 1):
        if step:
            wm = u @ wm @ u.conj().T
        out[step] = _otoc_from(wm, w, d)
    return out


# ---------------------------------------------------------------- Loschmidt echo


def echo_from_trace(tr, d):
    return (d + abs(tr) ** 2) / (d * (d + 1))


def loschmidt_echo(p, k_prime, m):
    """State-averaged echo ``[d + |Tr(U(k')^-m U(k)^m)|^2] / (d (d+1))``."""
    d = p.spin.dim
    m = check_nonneg_int(m, "m")
    if k_prime == p.k:
        # identical kicks: the two evolutions cancel exactly
        return 1.0
    fwd = floquet_power(build_floquet(p), m)
    back = floquet_power(build_floquet(p.with_k(k_prime)).conj().T, m)
    return float(echo_from_trace(np.trace(back @ fwd), d))


def echo_series(p, k_prime, m_max):
    m_max = check_nonneg_int(m_max, "m_max")
    if k_prime == p.k:
        return np.ones(m_max + 1)
    d = p.spin.dim
    u = build_floquet(p)
    ub = build_floquet(p.with_k(k_prime)).conj().T
    fwd = np.eye(d, dtype=complex)
    back = np.eye(d, dtype=complex)
    out = np.empty(m_max + 1)
    for step in range(m_max + 1):
        if step:
            fwd = u @ fwd
            back = ub @ back
        # Tr(B F) without forming the product
        out[step] = echo_from_trace(np.einsum("ij,ji->", back, fwd), d)
    return out


# ---------------------------------------------------------------- generalized entanglement


def generalized_entanglement(state, spin, observables=None, norm=None):
    """``1 - K sum_l <A_l>^2`` for a pure state.

    Defaults to the su(2) triple ``(J_x, J_y, J_z)`` with ``K = 1/j^2``. Any other Hermitian
    set may be passed with its own normalization ``norm``.
    """
    if not isinstance(spin, Spin):
        spin = Spin.from_j(spin)
    psi = check_state(state, spin.dim)
    if observables is None:
        observables = angular_momentum(spin)
        norm = 1.0 / spin.j**2 if norm is None else norm
    elif norm is None:
        raise ContractError("a custom observable set needs an explicit purity normalization")
    purity = norm * sum(abs(np.vdot(psi, a @ psi)) ** 2 for a in observables)
    ge = 1.0 - purity
    if ge < 0:
        if ge < -GE_CLAMP:
            raise NumericalError(f"purity exceeds one by {-ge:.3e}")
        ge = 0.0
    return float(ge)


def evolve_states(p, psi0, m_max):
    """Stroboscopic states ``U^m psi0`` for ``m = 0 .. m_max`` as rows."""
    m_max = check_nonneg_int(m_max, "m_max")
    u = build_floquet(p)
    out = np.empty((m_max + 1, psi0.size), dtype=complex)
    out[0] = psi0
    for step in range(1, m_max + 1):
        out[step] = u @ out[step - 1]
    return out


def _fixed(p, **extra):
    params = {"j": str(p.spin), "k": p.k, "alpha": p.alpha}
    params.update(extra)
    return params


def ge_series(p, angles, m_max, observables=None, norm=None):
    angles = angles if isinstance(angles, CoherentAngles) else CoherentAngles(*angles)
    states = evolve_states(p, coherent_state(p.spin, angles), m_max)
    values = [generalized_entanglement(s, p.spin, observables, norm) for s in states]
    return MeasureSeries(
        "GE", "m", np.arange(m_max + 1), values,
        fixed_params=_fixed(p), extra={"theta": angles.theta, "phi": angles.phi},
    )


# ---------------------------------------------------------------- observational entropy


@dataclass(frozen=True)
class CoarseGraining:
    """Partition of the J_z basis indices into macrostates."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if any(len(b) == 0 for b in blocks):
            raise ContractError("coarse-graining blocks must be nonempty")
        flat = sorted(i for b in blocks for i in b)
        if flat != list(range(len(flat))):
            raise ContractError("coarse-graining blocks must be disjoint and cover 0..d-1")

    @property
    def dim(self):
        return sum(len(b) for b in self.blocks)

    @property
    def volumes(self):
        return np.array([len(b) for b in self.blocks])

    def label(self):
        return "|".join(",".join(map(str, b)) for b in self.blocks)


def default_coarse_graining(spin, block_len):
    """Consecutive blocks of ``block_len`` J_z eigenstates; the last block holds the remainder."""
    if not isinstance(spin, Spin):
        spin = Spin.from_j(spin)
    d = spin.dim
    if isinstance(block_len, bool) or int(block_len) != block_len or not 1 <= block_len <= d:
        raise ContractError(f"block_len must be an integer in [1, {d}], got {block_len!r}")
    block_len = int(block_len)
    return CoarseGraining(tuple(tuple(range(s, min(s + block_len, d))) for s in range(0, d, block_len)))


def sign_coarse_graining(spin):
    """Macrostates ``m > 0``, ``m = 0`` (integer spin only) and ``m < 0``."""
    if not isinstance(spin, Spin):
        spin = Spin.from_j(spin)
    m = spin.m_values()
    blocks = [np.flatnonzero(m > 0), np.flatnonzero(m == 0), np.flatnonzero(m < 0)]
    return CoarseGraining(tuple(tuple(b) for b in blocks if b.size))


def _macro_probs(state, cg):
    weights = np.abs(state) ** 2
    return np.array([weights[list(b)].sum() for b in cg.blocks])


def observational_entropy(state, cg):
    """``-sum_i p_i ln(p_i / V_i)`` over the macrostates of ``cg``."""
    if not isinstance(cg, CoarseGraining):
        raise ContractError("cg must be a CoarseGraining")
    psi = check_state(state, cg.dim)
    p = _macro_probs(psi, cg)
    vol = cg.volumes
    nz = p > 0
    return float(-np.sum(p[nz] * np.log(p[nz] / vol[nz])))


def oe_series(p, angles, cg, m_max):
    """OE of the un-collapsed evolving state at each step ``0 .. m_max``."""
    angles = angles if isinstance(angles, CoherentAngles) else CoherentAngles(*angles)
    if cg.dim != p.spin.dim:
        raise ContractError(f"coarse-graining covers {cg.dim} states, system has {p.spin.dim}")
    states = evolve_states(p, coherent_state(p.spin, angles), m_max)
    values = [observational_entropy(s, cg) for s in states]
    return MeasureSeries(
        "OE", "m", np.arange(m_max + 1), values,
        fixed_params=_fixed(p),
        extra={"theta": angles.theta, "phi": angles.phi, "blocks": cg.label()},
    )


def otoc_time_series(p, w, m_max, w_seed=None):
    return MeasureSeries(
        "OTOC", "m", np.arange(m_max + 1), otoc_series(p, w, m_max),
        fixed_params=_fixed(p), seed=w_seed,
    )


def echo_time_series(p, k_prime, m_max):
    return MeasureSeries(
        "LE", "m", np.arange(m_max + 1), echo_series(p, k_prime, m_max),
        fixed_params=_fixed(p), extra={"k_prime": k_prime},
    )
