"""scikit-learn style wrappers.

``GroundStateTransformer`` maps rows of (delta, g) to the photon-statistics
panel; ``RidgeQuadratic`` is a regressor for delta*(g) on the monomial basis
(g^2, g, 1). Both follow the usual fit / transform / predict contract and
get ``get_params`` / ``set_params`` from ``BaseEstimator``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .spectral import N_CAP, ROOT_TOLERANCE, SERIES_TOLERANCE
from .state import STATE_TAIL_TOLERANCE
from .stats import FIELDS
from .sweep import SPECTRAL, fit_quadratic, solve_point


class GroundStateTransformer(TransformerMixin, BaseEstimator):
    """(delta, g) rows -> one column per statistics field (NaN on solver failure).

    Stateless: ``fit`` only validates the input and records the feature count.
    """

    def __init__(self, method=SPECTRAL, root_tolerance=ROOT_TOLERANCE,
                 series_tolerance=SERIES_TOLERANCE, n_cap=N_CAP,
                 state_tail_tolerance=STATE_TAIL_TOLERANCE):
        self.method = method
        self.root_tolerance = root_tolerance
        self.series_tolerance = series_tolerance
        self.n_cap = n_cap
        self.state_tail_tolerance = state_tail_tolerance

    def _validate(self, X):
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (delta, g), got {X.shape[1]}")
        return X

    def fit(self, X, y=None):
        self._validate(X)
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = self._validate(X)
        options = dict(root_tolerance=self.root_tolerance, series_tolerance=self.series_tolerance,
                       n_cap=self.n_cap, state_tail_tolerance=self.state_tail_tolerance)
        if self.method != SPECTRAL:
            options = {}
        out = np.full((len(X), len(FIELDS)), np.nan)
        for i, (delta, g) in enumerate(X):
            rec = solve_point(delta, g, self.method, options)
            if rec.ok:
                out[i] = [getattr(rec.stats, f) for f in FIELDS]
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(FIELDS, dtype=object)


class RidgeQuadratic(RegressorMixin, BaseEstimator):
    """delta* = c2 g^2 + c1 g + c0 by ordinary least squares."""

    def fit(self, X, y):
        X = check_array(X, dtype=float)
        if X.shape[1] != 1:
            raise ValueError("X must be a single column of g values")
        y = np.asarray(y, dtype=float).ravel()
        if len(y) != len(X):
            raise ValueError("X and y have different lengths")
        fit = fit_quadratic(list(zip(X[:, 0], y)))
        self.coef_ = np.array(fit.coeffs)
        self.rms_residual_ = fit.rms_residual
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        g = check_array(X, dtype=float)[:, 0]
        return self.coef_[0] * g * g + self.coef_[1] * g + self.coef_[2]
