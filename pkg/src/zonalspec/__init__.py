"""Zonal stationarity analysis of spatial point patterns.

The package estimates location-dependent spectra of a point pattern with a
moving box filter, smooths them over a square of nearby centres, and feeds
the log values on a location x frequency design into two-factor
chi-squared tests of stationarity, uniform modulation, and isotropy.  It
also ships the point-process simulators used to exercise those tests, a
Monte-Carlo-calibrated comparison of two patterns, and a translation-
corrected K function with CSR envelopes.
"""

from .errors import (
    BudgetExceededError,
    ConfigError,
    DegenerateInputError,
    DesignSpacingWarning,
    OutOfWindowError,
    PatternFormatError,
    ZeroPeriodogramError,
)
from .geometry import (
    LatticeGrid,
    PointPattern,
    Window,
    as_point_pattern,
    as_window,
    load_pattern,
    pattern_csv_text,
    rasterize_counts,
    rescale_pattern,
    save_pattern,
)
from .rng import make_rng, subseed
from .spectral import (
    DEFAULT_SMOOTHING_NODES,
    FilterSpec,
    SmootherSpec,
    filter_transfer,
    filter_weight,
    local_dft,
    local_periodogram,
    periodogram_table,
    residual_variance,
    residual_variance_quadrature,
)
from .anova import (
    STANDARD_FREQUENCIES,
    VERDICT_NONUNIFORM,
    VERDICT_STATIONARY,
    VERDICT_UNIFORM,
    AnovaReport,
    DesignSpec,
    LogPeriodogramTable,
    PairwiseLocationTest,
    anova_decompose,
    auto_design,
    build_log_table,
    chi2_cdf,
    chi2_quantile,
    posthoc_bonferroni,
    posthoc_text,
    quadrant_design,
    test_isotropy,
)
from .expressions import compile_intensity, scan_upper_bound
from .simulate import (
    DEFAULT_BACKGROUND_INTENSITY,
    DEFAULT_POINT_BUDGET,
    IntensityField,
    SsiResult,
    ThomasParams,
    ZonalCompositeSpec,
    default_zonal_cells,
    sim_poisson,
    sim_poisson_inhom,
    sim_ssi,
    sim_thomas,
    sim_zonal_composite,
    simulate_model,
    simulate_replicates,
)
from .compare import (
    DEFAULT_NULL_REPLICATES,
    ComparisonReport,
    LocationComparison,
    compare_patterns,
    lambda_statistic,
    mc_null_quantiles,
)
from .summaries import (
    DEFAULT_ENVELOPE_SIMULATIONS,
    KFunctionEstimate,
    k_envelopes,
    k_estimate,
)
from .study import StudyConfig, StudyReport, run_study
from .estimators import LocalLogSpectrum, StationarityAnova

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "ConfigError",
    "DegenerateInputError",
    "DesignSpacingWarning",
    "OutOfWindowError",
    "PatternFormatError",
    "ZeroPeriodogramError",
    "LatticeGrid",
    "PointPattern",
    "Window",
    "as_point_pattern",
    "as_window",
    "load_pattern",
    "pattern_csv_text",
    "rasterize_counts",
    "rescale_pattern",
    "save_pattern",
    "make_rng",
    "subseed",
    "DEFAULT_SMOOTHING_NODES",
    "FilterSpec",
    "SmootherSpec",
    "filter_transfer",
    "filter_weight",
    "local_dft",
    "local_periodogram",
    "periodogram_table",
    "residual_variance",
    "residual_variance_quadrature",
    "STANDARD_FREQUENCIES",
    "VERDICT_NONUNIFORM",
    "VERDICT_STATIONARY",
    "VERDICT_UNIFORM",
    "AnovaReport",
    "DesignSpec",
    "LogPeriodogramTable",
    "PairwiseLocationTest",
    "anova_decompose",
    "auto_design",
    "build_log_table",
    "chi2_cdf",
    "chi2_quantile",
    "posthoc_bonferroni",
    "posthoc_text",
    "quadrant_design",
    "test_isotropy",
    "compile_intensity",
    "scan_upper_bound",
    "DEFAULT_BACKGROUND_INTENSITY",
    "DEFAULT_POINT_BUDGET",
    "IntensityField",
    "SsiResult",
    "ThomasParams",
    "ZonalCompositeSpec",
    "default_zonal_cells",
    "sim_poisson",
    "sim_poisson_inhom",
    "sim_ssi",
    "sim_thomas",
    "sim_zonal_composite",
    "simulate_model",
    "simulate_replicates",
    "DEFAULT_NULL_REPLICATES",
    "ComparisonReport",
    "LocationComparison",
    "compare_patterns",
    "lambda_statistic",
    "mc_null_quantiles",
    "DEFAULT_ENVELOPE_SIMULATIONS",
    "KFunctionEstimate",
    "k_envelopes",
    "k_estimate",
    "StudyConfig",
    "StudyReport",
    "run_study",
    "LocalLogSpectrum",
    "StationarityAnova",
    "__version__",
]
