"""k-sweeps of the measures, exact-shift period checks and the k = N pi / 2 time scan."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import lcm

import numpy as np

from ._validation import AlignmentError, ContractError, InvariantViolation, check_nonneg_int
from .floquet import FloquetParams, build_floquet, kappa_period
from .measures import (
    CoarseGraining,
    default_coarse_graining,
    echo_from_trace,
    generalized_entanglement,
    observational_entropy,
    oe_series,
    ge_series,
    otoc_time_series,
    _otoc_from,
)
from .series import MEASURE_IDS, MeasureSeries
from .spinops import CoherentAngles, Spin, coherent_state, goe_sample, jz_matrix

PERIOD_TOL = 1e-9
MINIMALITY_THRESHOLD = 1e-3
DEFAULT_DIVISORS = (2, 3, 4, 6)
ALIGN_TOL = 1e-9
AUTOCORR_THRESHOLD = 0.99


class SpecError(ContractError):
    """A sweep specification is inconsistent with its measure."""


def grid_points(start, stop, step):
    """Half-open ``[start, stop)`` grid ``start + i * step``, free of accumulated rounding."""
    if not step > 0:
        raise SpecError(f"k_step must be > 0, got {step}")
    if not stop > start:
        raise SpecError(f"k_stop must exceed k_start ({start} >= {stop})")
    n = int(np.ceil((stop - start) / step - ALIGN_TOL))
    return start + step * np.arange(n)


def aligned_grid(kappa, approx_step, n_periods=2, divisors=DEFAULT_DIVISORS):
    """``(start, stop, step)`` over ``[0, n_periods * kappa)`` whose step divides ``kappa / n`` for every divisor."""
    unit = lcm(*divisors) if divisors else 1
    n = unit * int(np.ceil(kappa / approx_step / unit))
    return 0.0, n_periods * kappa, kappa / n


def reflection_grid(kappa_ref, dk, approx_step):
    """``(start, stop, step)`` over ``[0, kappa_ref)`` such that ``k`` and ``kappa_ref - dk - k`` are both grid points."""
    span = kappa_ref - dk
    n = int(np.ceil(span / approx_step))
    return 0.0, kappa_ref, span / n


@dataclass
class SweepSpec:
    """What to scan. ``operator`` selects the OTOC observable: ``"goe"`` (seeded by ``w_seed``) or ``"jz"``."""

    measure_id: str
    spin: Spin
    alpha: float
    m: int
    k_start: float
    k_stop: float
    k_step: float
    w_seed: int | None = None
    operator: str | None = None
    dk: float | None = None
    angles: CoherentAngles | None = None
    coarse: CoarseGraining | None = None
    observables: tuple | None = None
    purity_norm: float | None = None

    def __post_init__(self):
        if self.measure_id not in MEASURE_IDS:
            raise SpecError(f"unknown measure {self.measure_id!r}")
        if not isinstance(self.spin, Spin):
            self.spin = Spin.from_j(self.spin)
        self.m = check_nonneg_int(self.m, "m")
        grid_points(self.k_start, self.k_stop, self.k_step)
        mid = self.measure_id
        given = {
            name for name in ("w_seed", "operator", "dk", "angles", "coarse", "observables")
            if getattr(self, name) is not None
        }
        allowed = {
            "OTOC": {"w_seed", "operator"},
            "LE": {"dk"},
            "GE": {"angles", "observables"},
            "OE": {"angles", "coarse"},
        }[mid]
        if given - allowed:
            raise SpecError(f"{mid} sweep does not take {sorted(given - allowed)}")
        if mid == "OTOC":
            self.operator = self.operator or ("goe" if self.w_seed is not None else None)
            if self.operator == "goe" and self.w_seed is None:
                raise SpecError("OTOC with a GOE operator needs w_seed")
            if self.operator not in ("goe", "jz"):
                raise SpecError("OTOC sweep needs w_seed (GOE operator) or operator='jz'")
        if mid == "LE" and self.dk is None:
            raise SpecError("LE sweep needs dk")
        if mid in ("GE", "OE"):
            if self.angles is None:
                raise SpecError(f"{mid} sweep needs coherent-state angles")
            if not isinstance(self.angles, CoherentAngles):
                self.angles = CoherentAngles(*self.angles)
        if mid == "GE" and self.observables is not None and self.purity_norm is None:
            raise SpecError("a custom GE observable set needs purity_norm")
        if mid == "OE":
            if self.coarse is None:
                raise SpecError("OE sweep needs a coarse-graining")
            if isinstance(self.coarse, int):
                self.coarse = default_coarse_graining(self.spin, self.coarse)
            if self.coarse.dim != self.spin.dim:
                raise SpecError("coarse-graining does not match the spin dimension")

    @property
    def k_grid(self):
        return grid_points(self.k_start, self.k_stop, self.k_step)

    def operator_matrix(self):
        if self.operator == "jz":
            return jz_matrix(self.spin)
        return goe_sample(self.spin.dim, self.w_seed)

    def metadata(self):
        meta = {"j": str(self.spin), "alpha": self.alpha, "m": self.m,
                "k_start": self.k_start, "k_stop": self.k_stop, "k_step": self.k_step}
        if self.measure_id == "OTOC":
            meta["operator"] = self.operator
        if self.dk is not None:
            meta["dk"] = self.dk
        if self.angles is not None:
            meta.update(theta=self.angles.theta, phi=self.angles.phi)
        if self.coarse is not None:
            meta["blocks"] = self.coarse.label()
        return meta


def _point(spec, k, ms, context):
    """Measure values at one ``k`` for every time in ``ms`` (evolves once up to ``max(ms)``)."""
    p = FloquetParams(spec.spin, k, spec.alpha)
    u = build_floquet(p)
    d = spec.spin.dim
    wanted = set(ms)
    out = {}
    mid = spec.measure_id
    if mid == "OTOC":
        w = context
        wm = w
        for step in range(max(ms) + 1):
            if step:
                wm = u @ wm @ u.conj().T
            if step in wanted:
                out[step] = _otoc_from(wm, w, d)
    elif mid == "LE" and spec.dk == 0:
        out = {m: 1.0 for m in ms}
    elif mid == "LE":
        ub = build_floquet(p.with_k(k + spec.dk)).conj().T
        fwd = np.eye(d, dtype=complex)
        back = np.eye(d, dtype=complex)
        for step in range(max(ms) + 1):
            if step:
                fwd = u @ fwd
                back = ub @ back
            if step in wanted:
                out[step] = echo_from_trace(np.einsum("ij,ji->", back, fwd), d)
    else:
        psi = context
        for step in range(max(ms) + 1):
            if step:
                psi = u @ psi
            if step in wanted:
                if mid == "GE":
                    out[step] = generalized_entanglement(psi, spec.spin, spec.observables, spec.purity_norm)
                else:
                    out[step] = observational_entropy(psi, spec.coarse)
    return [out[m] for m in ms]


def run_sweeps(spec, ms, n_jobs=1):
    """One k-sweep per time in ``ms``, sharing the evolution. Returns ``{m: MeasureSeries}``."""
    ms = [check_nonneg_int(m, "m") for m in ms]
    grid = spec.k_grid
    if spec.measure_id == "OTOC":
        context = spec.operator_matrix()
    elif spec.measure_id in ("GE", "OE"):
        context = coherent_state(spec.spin, spec.angles)
    else:
        context = None

    def evaluate(k):
        return _point(spec, k, ms, context)

    if n_jobs == 1:
        rows = [evaluate(k) for k in grid]
    else:
        # map() yields in submission order, so assembly is independent of completion order
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(evaluate, grid))
    table = np.array(rows, dtype=float).reshape(grid.size, len(ms))
    result = {}
    for col, m in enumerate(ms):
        meta = spec.metadata()
        meta["m"] = m
        result[m] = MeasureSeries(spec.measure_id, "k", grid, table[:, col],
                                  fixed_params=meta, seed=spec.w_seed)
    return result


def run_sweep(spec, n_jobs=1):
    return run_sweeps(spec, [spec.m], n_jobs=n_jobs)[spec.m]


# ---------------------------------------------------------------- period checks


@dataclass
class PeriodReport:
    kappa: float
    max_abs_deviation: float
    tol: float
    n_pairs: int
    minimal_period: float | None = None

    @property
    def passed(self):
        return self.max_abs_deviation <= self.tol

    @property
    def verdict(self):
        return "pass" if self.passed else "fail"

    def as_rows(self):
        rows = [("kappa", self.kappa), ("max_abs_deviation", self.max_abs_deviation),
                ("tol", self.tol), ("pairs", self.n_pairs), ("verdict", self.verdict)]
        if self.minimal_period is not None:
            rows.append(("minimal_period", self.minimal_period))
        return rows


def _uniform_step(axis):
    if axis.size < 2:
        raise AlignmentError("need at least two grid points")
    steps = np.diff(axis)
    step = steps.mean()
    if np.max(np.abs(steps - step)) > ALIGN_TOL * max(1.0, step):
        raise AlignmentError("grid is not uniform")
    return step


def _shift_index(axis, shift):
    step = _uniform_step(axis)
    ratio = shift / step
    s = int(round(ratio))
    if abs(ratio - s) > ALIGN_TOL * max(1.0, ratio):
        raise AlignmentError(f"shift {shift!r} is not a multiple of the grid step {step!r}")
    return s


def check_period(series, kappa, tol=PERIOD_TOL):
    """Compare ``value(k)`` with ``value(k + kappa)`` at every aligned pair. Never interpolates."""
    axis, vals = series.axis, series.values
    if kappa <= 0:
        raise ContractError("kappa must be positive")
    s = _shift_index(axis, kappa)
    span = axis[-1] - axis[0] + _uniform_step(axis)
    if span < 2 * kappa * (1 - ALIGN_TOL):
        raise AlignmentError(f"grid spans {span:.6g}, needs at least 2 * kappa = {2 * kappa:.6g}")
    dev = np.abs(vals[s:] - vals[:-s])
    return PeriodReport(float(kappa), float(dev.max()), tol, int(dev.size))


def minimal_period(series, kappa_j, divisors=DEFAULT_DIVISORS, tol=PERIOD_TOL):
    """Smallest ``kappa_j / n`` (n in ``divisors``) that passes; ``kappa_j`` itself must pass."""
    base = check_period(series, kappa_j, tol)
    if not base.passed:
        raise InvariantViolation(
            f"kappa_j = {kappa_j:.6g} failed (deviation {base.max_abs_deviation:.3e}); the shift identity is broken"
        )
    best = kappa_j
    for n in sorted(set(divisors), reverse=True):
        cand = kappa_j / n
        if check_period(series, cand, tol).passed:
            best = cand
            break
    return best


def reflection_check(series, spin, tol=PERIOD_TOL, dk=None):
    """Echo mirror symmetry ``F(k, k+dk) = F(kappa_j - k, kappa_j - k - dk)``.

    The echo is symmetric in its two kicks, so the right side is the series value at
    ``kappa_j - dk - k``; both points must lie on the grid.
    """
    if series.measure_id != "LE":
        raise ContractError("reflection_check needs a Loschmidt-echo series")
    if not isinstance(spin, Spin):
        spin = Spin.from_j(spin)
    if dk is None:
        dk = series.fixed_params.get("dk", series.extra.get("dk"))
    if dk is None:
        raise ContractError("reflection_check needs the echo perturbation dk")
    kref = kappa_period(spin)
    axis, vals = series.axis, series.values
    step = _uniform_step(axis)
    # index i pairs with index c - i where axis[0] + (c - i) step = kref - dk - axis[0] - i step
    ratio = (kref - dk - 2 * axis[0]) / step
    c = int(round(ratio))
    if abs(ratio - c) > ALIGN_TOL * max(1.0, abs(ratio)):
        raise AlignmentError("grid is not symmetric about (kappa_j - dk) / 2")
    i = np.arange(axis.size)
    mirror = c - i
    ok = (mirror >= 0) & (mirror < axis.size)
    if not ok.any():
        raise AlignmentError("no mirrored pairs on the grid")
    dev = np.abs(vals[i[ok]] - vals[mirror[ok]])
    return PeriodReport(float(kref), float(dev.max()), tol, int(ok.sum()))


# ---------------------------------------------------------------- time periodicity at k = N pi / 2


def autocorrelation(values, max_lag):
    """Pearson correlation between ``x[:-lag]`` and ``x[lag:]`` for lags ``1 .. max_lag``."""
    x = np.asarray(values, dtype=float)
    max_lag = min(int(max_lag), x.size - 2)
    out = np.zeros(max_lag)
    for lag in range(1, max_lag + 1):
        a, b = x[:-lag], x[lag:]
        sa, sb = a.std(), b.std()
        out[lag - 1] = 0.0 if sa == 0 or sb == 0 else np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb)
    return out


def detect_time_period(values, max_lag, threshold=AUTOCORR_THRESHOLD):
    """Smallest lag whose autocorrelation reaches ``threshold``, else ``None``."""
    r = autocorrelation(values, max_lag)
    hits = np.flatnonzero(r >= threshold)
    return int(hits[0]) + 1 if hits.size else None


def special_kick(spin, offset=0.0):
    """``k_s = N pi / 2`` with ``N = 2j``, plus ``offset``."""
    return spin.twice_j * np.pi / 2 + offset


def special_k_scan(spin, alpha, m_max, offset=0.0, w_seed=0,
                   angles=(np.pi / 4, np.pi / 4), coarse_len=2):
    """OTOC, GE and OE time series at ``k = N pi / 2 + offset``."""
    if not isinstance(spin, Spin):
        spin = Spin.from_j(spin)
    p = FloquetParams(spin, special_kick(spin, offset), alpha)
    angles = angles if isinstance(angles, CoherentAngles) else CoherentAngles(*angles)
    otoc_s = otoc_time_series(p, goe_sample(spin.dim, w_seed), m_max, w_seed=w_seed)
    ge_s = ge_series(p, angles, m_max)
    oe_s = oe_series(p, angles, default_coarse_graining(spin, coarse_len), m_max)
    for s in (otoc_s, ge_s, oe_s):
        s.extra["offset"] = offset
    return otoc_s, ge_s, oe_s
