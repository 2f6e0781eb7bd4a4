"""scikit-learn compatible wrappers.

Each measure is a transformer mapping a column of kick strengths ``k`` to the measure value
at a fixed time ``m``, so it can sit in a ``Pipeline`` or be tuned with ``GridSearchCV``-style
parameter handling. :class:`KickPeriodEstimator` learns the k-period of a sampled measure.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import ContractError
from .floquet import kappa_period
from .series import MeasureSeries
from .spinops import CoherentAngles, Spin, coherent_state
from .sweep import DEFAULT_DIVISORS, PERIOD_TOL, SweepSpec, _point, check_period, minimal_period


def _check_k(X):
    X = check_array(X, ensure_2d=False, dtype=float)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ContractError(f"expected a single column of kick strengths, got {X.shape[1]}")
        X = X[:, 0]
    return X


class _MeasureTransformer(TransformerMixin, BaseEstimator):
    measure_id = None

    def _spec(self):
        raise NotImplementedError

    def fit(self, X=None, y=None):
        spec = self._spec()
        self.spin_ = spec.spin
        self.kappa_ = kappa_period(spec.spin)
        if self.measure_id == "OTOC":
            self.context_ = spec.operator_matrix()
        elif self.measure_id in ("GE", "OE"):
            self.context_ = coherent_state(spec.spin, spec.angles)
        else:
            self.context_ = None
        self.spec_ = spec
        if X is not None:
            self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "spec_")
        ks = _check_k(X)
        vals = [_point(self.spec_, k, [self.spec_.m], self.context_)[0] for k in ks]
        return np.asarray(vals, dtype=float).reshape(-1, 1)

    def to_series(self, X):
        """Transform a strictly increasing k grid and wrap the result as a ``MeasureSeries``."""
        ks = _check_k(X)
        vals = self.fit(ks.reshape(-1, 1)).transform(ks)[:, 0]
        return MeasureSeries(self.measure_id, "k", ks, vals, fixed_params=self.spec_.metadata(),
                             seed=self.spec_.w_seed)

    def _base(self, **extra):
        # placeholder grid; the transformer evaluates whatever k it is handed
        return SweepSpec(self.measure_id, Spin.from_j(self.j), self.alpha, self.m, 0.0, 1.0, 1.0, **extra)


class OTOCTransformer(_MeasureTransformer):
    """OTOC ``C(m; k)`` of a seeded GOE observable (``operator="goe"``) or of ``J_z``."""

    measure_id = "OTOC"

    def __init__(self, j="2", alpha=np.pi / 4, m=10, w_seed=0, operator="goe"):
        self.j = j
        self.alpha = alpha
        self.m = m
        self.w_seed = w_seed
        self.operator = operator

    def _spec(self):
        seed = self.w_seed if self.operator == "goe" else None
        return self._base(w_seed=seed, operator=self.operator)


class EchoTransformer(_MeasureTransformer):
    measure_id = "LE"

    def __init__(self, j="2", alpha=np.pi / 4, m=10, dk=0.1):
        self.j = j
        self.alpha = alpha
        self.m = m
        self.dk = dk

    def _spec(self):
        return self._base(dk=self.dk)


class GETransformer(_MeasureTransformer):
    measure_id = "GE"

    def __init__(self, j="2", alpha=np.pi / 4, m=10, theta=np.pi / 4, phi=np.pi / 4):
        self.j = j
        self.alpha = alpha
        self.m = m
        self.theta = theta
        self.phi = phi

    def _spec(self):
        return self._base(angles=CoherentAngles(self.theta, self.phi))


class OETransformer(_MeasureTransformer):
    measure_id = "OE"

    def __init__(self, j="2", alpha=np.pi / 4, m=10, theta=np.pi / 4, phi=np.pi / 4, block_len=2):
        self.j = j
        self.alpha = alpha
        self.m = m
        self.theta = theta
        self.phi = phi
        self.block_len = block_len

    def _spec(self):
        return self._base(angles=CoherentAngles(self.theta, self.phi), coarse=int(self.block_len))


class KickPeriodEstimator(BaseEstimator):
    """Learn the smallest period ``kappa_j / n`` of a measure sampled on an aligned k grid.

    ``fit(X, y)`` takes the k grid and the measure values. ``transform`` then folds kick
    strengths into ``[0, minimal_period_)``.
    """

    def __init__(self, j="2", measure="OTOC", divisors=DEFAULT_DIVISORS, tol=PERIOD_TOL):
        self.j = j
        self.measure = measure
        self.divisors = divisors
        self.tol = tol

    def fit(self, X, y):
        ks = _check_k(X)
        y = check_array(y, ensure_2d=False, dtype=float).ravel()
        if y.shape != ks.shape:
            raise ContractError("X and y must have the same number of samples")
        series = MeasureSeries(self.measure, "k", ks, y)
        self.kappa_j_ = kappa_period(Spin.from_j(self.j))
        self.report_ = check_period(series, self.kappa_j_, self.tol)
        self.minimal_period_ = minimal_period(series, self.kappa_j_, self.divisors, self.tol)
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "minimal_period_")
        return np.mod(_check_k(X), self.minimal_period_).reshape(-1, 1)

    def score(self, X, y):
        """Negative worst-case mismatch between ``y`` and the value one fundamental period later."""
        ks = _check_k(X)
        rep = check_period(MeasureSeries(self.measure, "k", ks, np.ravel(y)), self.kappa_j_, self.tol)
        return -rep.max_abs_deviation
