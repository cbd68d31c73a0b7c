"""Scikit-learn style front end for the local-spectrum machinery.

Two estimators cover the common workflows: ``LocalLogSpectrum`` turns a
collection of patterns into a feature matrix of log local spectra (one row
per pattern, one column per location/frequency cell), and
``StationarityAnova`` fits the full test on a single pattern and exposes
the report as fitted attributes.  Both follow the usual conventions:
constructor arguments are stored verbatim, ``get_params``/``set_params``
and ``clone`` work, and fitting never mutates parameters.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .anova import (
    DesignSpec,
    LogPeriodogramTable,
    anova_decompose,
    auto_design,
    build_log_table,
    posthoc_bonferroni,
    quadrant_design,
)
from .geometry import PointPattern, as_point_pattern
from .spectral import (
    DEFAULT_SMOOTHING_NODES,
    FilterSpec,
    SmootherSpec,
    residual_variance,
)


def _resolve_design(design, window, h, rho) -> DesignSpec:
    if isinstance(design, DesignSpec):
        return design
    if design == "auto":
        return auto_design(window, h=h, rho=rho)
    if design == "quadrants":
        return quadrant_design(window, h=h, rho=rho)
    raise ValueError(
        f"design must be 'auto', 'quadrants', or a DesignSpec, got {design!r}"
    )


def _coerce_patterns(X, window) -> list[PointPattern]:
    if isinstance(X, PointPattern) or (
        isinstance(X, np.ndarray) and X.ndim == 2 and X.shape[1] == 2
    ):
        raise ValueError(
            "expected a sequence of patterns; wrap a single pattern in a list"
        )
    return [as_point_pattern(item, window) for item in X]


class LocalLogSpectrum(TransformerMixin, BaseEstimator):
    """Transform point patterns into log local-spectrum feature vectors.

    Parameters
    ----------
    h : float, default 3.0
        Filter half-width.
    rho : float, default 20.0
        Smoothing square side.
    design : 'auto', 'quadrants' or DesignSpec, default 'auto'
        Location/frequency layout; the string presets are resolved against
        the fitted window.
    nodes : int or None
        Midpoint nodes per axis for the smoothing average (package default
        when None).
    window : Window or bounds tuple, optional
        Needed when samples are bare coordinate arrays; patterns carry
        their own window and must all share it.

    Attributes
    ----------
    design_ : DesignSpec
        Resolved design after ``fit``.
    window_ : Window
        Window the design was resolved against.
    sigma2_ : float
        Known log-scale residual variance for the (h, rho) pair.
    """

    def __init__(self, h: float = 3.0, rho: float = 20.0, design="auto",
                 nodes: int | None = None, window=None):
        self.h = h
        self.rho = rho
        self.design = design
        self.nodes = nodes
        self.window = window

    def _specs(self):
        return FilterSpec(self.h), SmootherSpec(self.rho)

    def fit(self, X, y=None):
        patterns = _coerce_patterns(X, self.window)
        if not patterns:
            raise ValueError("need at least one pattern to fit")
        windows = {p.window for p in patterns}
        if len(windows) != 1:
            raise ValueError("all patterns must share one observation window")
        self.window_ = patterns[0].window
        fspec, sspec = self._specs()
        self.design_ = _resolve_design(self.design, self.window_, self.h, self.rho)
        self.sigma2_ = residual_variance(fspec, sspec)
        self.n_features_out_ = self.design_.n_locations * self.design_.n_frequencies
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "design_"):
            raise NotFittedError("fit the transformer before calling transform")
        fspec, sspec = self._specs()
        nodes = DEFAULT_SMOOTHING_NODES if self.nodes is None else int(self.nodes)
        rows = []
        for pattern in _coerce_patterns(X, self.window):
            if pattern.window != self.window_:
                raise ValueError("pattern window differs from the fitted window")
            table = build_log_table(pattern, self.design_, fspec, sspec, nodes)
            rows.append(table.values.ravel())
        return np.vstack(rows)

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        if not hasattr(self, "design_"):
            raise NotFittedError("fit the transformer before requesting feature names")
        names = [
            f"logI_z{i + 1}_w{j + 1}"
            for i in range(self.design_.n_locations)
            for j in range(self.design_.n_frequencies)
        ]
        return np.asarray(names, dtype=object)


class StationarityAnova(BaseEstimator):
    """Fit the local-spectrum stationarity test on one point pattern.

    Parameters mirror :class:`LocalLogSpectrum` plus the test level and an
    optional frequency to exclude (1-based column index, as in the CLI).

    Attributes
    ----------
    table_ : LogPeriodogramTable
        The fitted log spectrum table (after any frequency drop).
    report_ : AnovaReport
        Decomposition, chi-squared statistics, and decisions.
    verdict_ : str
        Shorthand for ``report_.verdict``.
    """

    def __init__(self, h: float = 3.0, rho: float = 20.0, design="auto",
                 alpha: float = 0.05, nodes: int | None = None,
                 drop_frequency: int | None = None, window=None):
        self.h = h
        self.rho = rho
        self.design = design
        self.alpha = alpha
        self.nodes = nodes
        self.drop_frequency = drop_frequency
        self.window = window

    def fit(self, X, y=None):
        pattern = as_point_pattern(X, self.window)
        fspec = FilterSpec(self.h)
        sspec = SmootherSpec(self.rho)
        design = _resolve_design(self.design, pattern.window, self.h, self.rho)
        nodes = DEFAULT_SMOOTHING_NODES if self.nodes is None else int(self.nodes)
        table = build_log_table(pattern, design, fspec, sspec, nodes)
        if self.drop_frequency is not None:
            idx = int(self.drop_frequency)
            if not 1 <= idx <= design.n_frequencies:
                raise ValueError(
                    f"drop_frequency must be a 1-based index in "
                    f"1..{design.n_frequencies}, got {self.drop_frequency}"
                )
            table = table.without_frequency(idx - 1)
        self.window_ = pattern.window
        self.design_ = design
        self.table_ = table
        self.report_ = anova_decompose(table, alpha=self.alpha)
        self.verdict_ = self.report_.verdict
        return self

    def _check_fitted(self) -> LogPeriodogramTable:
        if not hasattr(self, "table_"):
            raise NotFittedError("fit the estimator before using its results")
        return self.table_

    def posthoc(self, alpha: float | None = None):
        """Bonferroni pairwise location comparisons on the fitted table."""
        table = self._check_fitted()
        return posthoc_bonferroni(table, self.alpha if alpha is None else alpha)

    def summary(self) -> str:
        self._check_fitted()
        return self.report_.to_text()
