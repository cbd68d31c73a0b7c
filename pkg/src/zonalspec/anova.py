"""Two-factor decomposition of log local spectra and the stationarity test.

The log smoothed spectrum at m locations and n frequencies forms a table
``Y[i, j] = ln I_{z_i}(omega_j)`` whose residual variance ``sigma^2`` is
known from the filter/smoother pair.  Its two-way decomposition

    SSL   = n * sum_i (rowmean_i - grand)^2      (between locations)
    SSF   = m * sum_j (colmean_j - grand)^2      (between frequencies)
    SSIEr = sum_ij (Y_ij - rowmean_i - colmean_j + grand)^2
    SST   = SSL + SSF + SSIEr

is referred to chi-squared distributions after division by sigma^2.  The
interaction is examined first: a significant interaction means the local
spectra differ in shape across locations (nonuniformly modulated, hence
nonstationary).  Otherwise a significant location effect means the spectra
differ by location-dependent scale factors only (uniformly modulated,
still nonstationary); with neither significant the pattern is compatible
with stationarity.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DesignSpacingWarning, ZeroPeriodogramError
from .geometry import PointPattern, Window
from .spectral import (
    DEFAULT_SMOOTHING_NODES,
    FilterSpec,
    SmootherSpec,
    periodogram_table,
    residual_variance,
)

VERDICT_STATIONARY = "stationary-compatible"
VERDICT_UNIFORM = "uniformly-modulated-nonstationary"
VERDICT_NONUNIFORM = "nonuniformly-modulated-nonstationary"


def chi2_cdf(x: float, df: float) -> float:
    """Chi-squared CDF via the regularized lower incomplete gamma P(df/2, x/2)."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    x = float(x)
    if x <= 0.0:
        return 0.0
    return float(special.gammainc(df / 2.0, x / 2.0))


def chi2_quantile(p: float, df: float) -> float:
    """Inverse chi-squared CDF; ``p`` must lie strictly between 0 and 1."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError("probability must lie strictly between 0 and 1")
    return float(2.0 * special.gammaincinv(df / 2.0, p))


def _min_pairwise_distance(arr: np.ndarray) -> float:
    diffs = arr[:, None, :] - arr[None, :, :]
    dist = np.sqrt(np.sum(diffs**2, axis=-1))
    dist[np.diag_indices_from(dist)] = np.inf
    return float(dist.min())


@dataclass(frozen=True)
class DesignSpec:
    """Test locations and frequencies with their minimum-spacing rules.

    Spacing below the minima does not invalidate the arithmetic, it only
    correlates neighbouring estimates, so violations warn instead of
    raising.  ``min_location_spacing`` defaults to the smoothing side and
    ``min_frequency_spacing`` to the filter bandwidth pi/h when built via
    :func:`auto_design` / :func:`quadrant_design`.
    """

    locations: np.ndarray
    frequencies: np.ndarray
    min_location_spacing: float | None = None
    min_frequency_spacing: float | None = None

    def __post_init__(self):
        locs = np.array(self.locations, dtype=float, copy=True)
        oms = np.array(self.frequencies, dtype=float, copy=True)
        if locs.ndim != 2 or locs.shape[1] != 2 or len(locs) < 2:
            raise ValueError("need at least two locations, as an (m, 2) array")
        if oms.ndim != 2 or oms.shape[1] != 2 or len(oms) < 2:
            raise ValueError("need at least two frequencies, as an (n, 2) array")
        if not (np.all(np.isfinite(locs)) and np.all(np.isfinite(oms))):
            raise ValueError("locations and frequencies must be finite")
        locs.setflags(write=False)
        oms.setflags(write=False)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "frequencies", oms)
        self.check_spacing(warn=True)

    @property
    def n_locations(self) -> int:
        return len(self.locations)

    @property
    def n_frequencies(self) -> int:
        return len(self.frequencies)

    def check_spacing(self, warn: bool = False) -> tuple[bool, bool]:
        """Whether location and frequency spacings meet their minima."""
        loc_ok = True
        freq_ok = True
        if self.min_location_spacing is not None:
            loc_ok = _min_pairwise_distance(self.locations) >= self.min_location_spacing
        if self.min_frequency_spacing is not None:
            freq_ok = _min_pairwise_distance(self.frequencies) >= self.min_frequency_spacing
        if warn and not loc_ok:
            warnings.warn(
                "test locations are closer than the smoothing side; neighbouring "
                "local spectra will be correlated and the chi-squared reference "
                "is only approximate",
                DesignSpacingWarning,
                stacklevel=3,
            )
        if warn and not freq_ok:
            warnings.warn(
                "test frequencies are closer than the filter bandwidth pi/h; "
                "neighbouring spectral estimates will be correlated and the "
                "chi-squared reference is only approximate",
                DesignSpacingWarning,
                stacklevel=3,
            )
        return loc_ok, freq_ok


#: The nine standard test frequencies: components from {pi/20, 8pi/20, 15pi/20},
#: first component varying fastest.  Spacing 7 pi / 20 exceeds pi/3, the
#: bandwidth of the default h = 3 filter.
STANDARD_FREQUENCIES = np.array(
    [
        [np.pi / 20.0, np.pi / 20.0],
        [8.0 * np.pi / 20.0, np.pi / 20.0],
        [15.0 * np.pi / 20.0, np.pi / 20.0],
        [np.pi / 20.0, 8.0 * np.pi / 20.0],
        [8.0 * np.pi / 20.0, 8.0 * np.pi / 20.0],
        [15.0 * np.pi / 20.0, 8.0 * np.pi / 20.0],
        [np.pi / 20.0, 15.0 * np.pi / 20.0],
        [8.0 * np.pi / 20.0, 15.0 * np.pi / 20.0],
        [15.0 * np.pi / 20.0, 15.0 * np.pi / 20.0],
    ]
)
STANDARD_FREQUENCIES.setflags(write=False)


def _fractional_locations(window: Window, fractions) -> np.ndarray:
    lo = np.asarray(window.lower)
    lengths = window.lengths
    pts = [
        lo + lengths * np.array([fx, fy])
        for fy in fractions
        for fx in fractions
    ]
    return np.array(pts)


def auto_design(window: Window | None = None, h: float = 3.0,
                rho: float = 20.0) -> DesignSpec:
    """Nine-location, nine-frequency design.

    Locations sit at fractions 1/6, 3/6, 5/6 of each axis (the centres of a
    3 x 3 tiling), ordered left to right then bottom to top; frequencies are
    :data:`STANDARD_FREQUENCIES`.  On the default 70 x 70 window the location
    spacing is 70/3, clear of the default smoothing side of 20.
    """
    window = window if window is not None else Window.square(70.0)
    return DesignSpec(
        locations=_fractional_locations(window, (1 / 6, 3 / 6, 5 / 6)),
        frequencies=STANDARD_FREQUENCIES,
        min_location_spacing=rho,
        min_frequency_spacing=np.pi / h,
    )


def quadrant_design(window: Window | None = None, h: float = 3.0,
                    rho: float = 34.0) -> DesignSpec:
    """Four-location design at the quadrant centres, standard frequencies."""
    window = window if window is not None else Window.square(70.0)
    return DesignSpec(
        locations=_fractional_locations(window, (1 / 4, 3 / 4)),
        frequencies=STANDARD_FREQUENCIES,
        min_location_spacing=rho,
        min_frequency_spacing=np.pi / h,
    )


@dataclass(frozen=True)
class LogPeriodogramTable:
    """Log smoothed local spectra on a location x frequency design."""

    values: np.ndarray
    design: DesignSpec
    sigma2: float
    h: float | None = None
    rho: float | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != (self.design.n_locations, self.design.n_frequencies):
            raise ValueError(
                f"table shape {vals.shape} does not match the design "
                f"({self.design.n_locations} locations x "
                f"{self.design.n_frequencies} frequencies)"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("log table entries must be finite")
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError("sigma2 must be finite and positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n_locations(self) -> int:
        return self.design.n_locations

    @property
    def n_frequencies(self) -> int:
        return self.design.n_frequencies

    def without_frequency(self, index: int) -> "LogPeriodogramTable":
        """Copy of the table with one frequency column removed (0-based index)."""
        n = self.n_frequencies
        if not 0 <= index < n:
            raise ValueError(f"frequency index {index} outside 0..{n - 1}")
        if n - 1 < 2:
            raise ValueError("cannot drop a frequency from a two-column table")
        keep = [j for j in range(n) if j != index]
        design = DesignSpec(
            locations=self.design.locations,
            frequencies=self.design.frequencies[keep],
            min_location_spacing=self.design.min_location_spacing,
            min_frequency_spacing=self.design.min_frequency_spacing,
        )
        return LogPeriodogramTable(
            values=self.values[:, keep], design=design, sigma2=self.sigma2,
            h=self.h, rho=self.rho,
        )

    def to_json_dict(self) -> dict:
        return {
            "values": self.values.tolist(),
            "locations": self.design.locations.tolist(),
            "frequencies": self.design.frequencies.tolist(),
            "sigma2": self.sigma2,
            "h": self.h,
            "rho": self.rho,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "LogPeriodogramTable":
        design = DesignSpec(
            locations=np.asarray(data["locations"], dtype=float),
            frequencies=np.asarray(data["frequencies"], dtype=float),
        )
        return cls(
            values=np.asarray(data["values"], dtype=float),
            design=design,
            sigma2=float(data["sigma2"]),
            h=data.get("h"),
            rho=data.get("rho"),
        )


def build_log_table(pattern: PointPattern, design: DesignSpec,
                    fspec: FilterSpec, sspec: SmootherSpec,
                    nodes: int = DEFAULT_SMOOTHING_NODES) -> LogPeriodogramTable:
    """Compute the log smoothed spectrum at every design cell.

    Raises :class:`ZeroPeriodogramError` naming the first offending cell if
    any smoothed value is exactly zero, since its log is undefined.
    """
    design.check_spacing(warn=True)
    table = periodogram_table(
        pattern, design.locations, design.frequencies, fspec, sspec, nodes
    )
    zero = np.argwhere(table == 0.0)
    if len(zero):
        i, j = zero[0]
        raise ZeroPeriodogramError(
            i, j, design.locations[i], design.frequencies[j]
        )
    return LogPeriodogramTable(
        values=np.log(table),
        design=design,
        sigma2=residual_variance(fspec, sspec),
        h=fspec.h,
        rho=sspec.rho,
    )


@dataclass(frozen=True)
class AnovaReport:
    """Decomposition of a log spectrum table with its test decisions."""

    alpha: float
    sigma2: float
    n_locations: int
    n_frequencies: int
    ss_location: float
    ss_frequency: float
    ss_interaction: float
    ss_total: float
    df_location: int
    df_frequency: int
    df_interaction: int
    df_total: int
    chi2_location: float
    chi2_frequency: float
    chi2_interaction: float
    chi2_total: float
    p_location: float
    p_frequency: float
    p_interaction: float
    location_significant: bool
    frequency_significant: bool
    interaction_significant: bool
    verdict: str
    h: float | None = None
    rho: float | None = None
    spacing_ok: tuple[bool, bool] | None = None
    label: str | None = None

    def rows(self) -> list[dict]:
        """The four report rows in fixed order."""
        return [
            {
                "item": "Between spatial locations",
                "df": self.df_location,
                "ss": self.ss_location,
                "chi2": self.chi2_location,
                "p": self.p_location,
            },
            {
                "item": "Between frequencies",
                "df": self.df_frequency,
                "ss": self.ss_frequency,
                "chi2": self.chi2_frequency,
                "p": self.p_frequency,
            },
            {
                "item": "Interaction + residual",
                "df": self.df_interaction,
                "ss": self.ss_interaction,
                "chi2": self.chi2_interaction,
                "p": self.p_interaction,
            },
            {
                "item": "Total",
                "df": self.df_total,
                "ss": self.ss_total,
                "chi2": self.chi2_total,
                "p": None,
            },
        ]

    def to_text(self) -> str:
        lines = []
        if self.label:
            lines.append(self.label)
        header = f"{'Item':<28}{'Df':>4}  {'SS':>12}  {'chi2':>12}  {'p':>10}"
        lines.append(header)
        lines.append("-" * len(header))
        for row in self.rows():
            p_txt = "" if row["p"] is None else f"{row['p']:.4g}"
            lines.append(
                f"{row['item']:<28}{row['df']:>4}  {row['ss']:>12.4f}  "
                f"{row['chi2']:>12.4f}  {p_txt:>10}"
            )
        lines.append("")
        extras = [f"sigma2 = {self.sigma2:.6g}", f"alpha = {self.alpha:g}"]
        if self.h is not None:
            extras.append(f"h = {self.h:g}")
        if self.rho is not None:
            extras.append(f"rho = {self.rho:g}")
        lines.append(", ".join(extras))
        if self.spacing_ok is not None and not all(self.spacing_ok):
            lines.append("warning: design spacing below the recommended minimum")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "sigma2": self.sigma2,
            "n_locations": self.n_locations,
            "n_frequencies": self.n_frequencies,
            "h": self.h,
            "rho": self.rho,
            "rows": self.rows(),
            "location_significant": self.location_significant,
            "frequency_significant": self.frequency_significant,
            "interaction_significant": self.interaction_significant,
            "spacing_ok": list(self.spacing_ok) if self.spacing_ok else None,
            "verdict": self.verdict,
            "label": self.label,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)


def anova_decompose(table: LogPeriodogramTable, alpha: float = 0.05,
                    label: str | None = None) -> AnovaReport:
    """Two-way decomposition of the log table and the stationarity verdict.

    All three effect statistics are computed unconditionally; the verdict
    applies the ladder described in the module docstring.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    y = table.values
    m, n = y.shape
    grand = y.mean()
    row_means = y.mean(axis=1)
    col_means = y.mean(axis=0)
    ss_loc = n * float(np.sum((row_means - grand) ** 2))
    ss_freq = m * float(np.sum((col_means - grand) ** 2))
    resid = y - row_means[:, None] - col_means[None, :] + grand
    ss_inter = float(np.sum(resid**2))
    ss_total = ss_loc + ss_freq + ss_inter

    s2 = table.sigma2
    df_loc = m - 1
    df_freq = n - 1
    df_inter = (m - 1) * (n - 1)
    df_total = m * n - 1
    chi_loc = ss_loc / s2
    chi_freq = ss_freq / s2
    chi_inter = ss_inter / s2
    chi_total = ss_total / s2

    loc_sig = chi_loc > chi2_quantile(1.0 - alpha, df_loc)
    freq_sig = chi_freq > chi2_quantile(1.0 - alpha, df_freq)
    inter_sig = chi_inter > chi2_quantile(1.0 - alpha, df_inter)
    if inter_sig:
        verdict = VERDICT_NONUNIFORM
    elif loc_sig:
        verdict = VERDICT_UNIFORM
    else:
        verdict = VERDICT_STATIONARY

    return AnovaReport(
        alpha=float(alpha),
        sigma2=float(s2),
        n_locations=m,
        n_frequencies=n,
        ss_location=ss_loc,
        ss_frequency=ss_freq,
        ss_interaction=ss_inter,
        ss_total=ss_total,
        df_location=df_loc,
        df_frequency=df_freq,
        df_interaction=df_inter,
        df_total=df_total,
        chi2_location=chi_loc,
        chi2_frequency=chi_freq,
        chi2_interaction=chi_inter,
        chi2_total=chi_total,
        p_location=1.0 - chi2_cdf(chi_loc, df_loc),
        p_frequency=1.0 - chi2_cdf(chi_freq, df_freq),
        p_interaction=1.0 - chi2_cdf(chi_inter, df_inter),
        location_significant=bool(loc_sig),
        frequency_significant=bool(freq_sig),
        interaction_significant=bool(inter_sig),
        verdict=verdict,
        h=table.h,
        rho=table.rho,
        spacing_ok=table.design.check_spacing(warn=False),
        label=label,
    )


@dataclass(frozen=True)
class PairwiseLocationTest:
    """One Bonferroni-corrected comparison of two location means."""

    i: int
    j: int
    statistic: float
    p_value: float
    level: float
    reject: bool
    df: int = 1


def posthoc_bonferroni(table: LogPeriodogramTable,
                       alpha: float = 0.05) -> list[PairwiseLocationTest]:
    """All pairwise location-mean comparisons at Bonferroni level alpha / C(m, 2).

    The statistic for locations i and j is n * (rowmean_i - rowmean_j)^2 /
    (2 sigma^2), referred to chi-squared with one degree of freedom.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly between 0 and 1")
    y = table.values
    m, n = y.shape
    row_means = y.mean(axis=1)
    n_pairs = m * (m - 1) // 2
    level = alpha / n_pairs
    results = []
    for i in range(m):
        for j in range(i + 1, m):
            stat = n * (row_means[i] - row_means[j]) ** 2 / (2.0 * table.sigma2)
            p = 1.0 - chi2_cdf(stat, 1)
            results.append(
                PairwiseLocationTest(
                    i=i, j=j, statistic=float(stat), p_value=float(p),
                    level=float(level), reject=bool(p < level),
                )
            )
    return results


def posthoc_text(results: list[PairwiseLocationTest]) -> str:
    """Aligned text table of pairwise comparisons; ``*`` marks rejections."""
    header = f"{'test':<14}{'Df':>4}  {'chi2':>10}  {'p':>10}"
    lines = [header, "-" * len(header)]
    for r in results:
        name = f"z{r.i + 1} vs z{r.j + 1}"
        star = " *" if r.reject else ""
        lines.append(
            f"{name:<14}{r.df:>4}  {r.statistic:>10.4f}  {r.p_value:>10.4g}{star}"
        )
    if results:
        lines.append("")
        lines.append(
            f"per-comparison level = {results[0].level:.4g} "
            f"(Bonferroni over {len(results)} pairs)"
        )
    return "\n".join(lines)


def test_isotropy(pattern: PointPattern, locations, norm_groups,
                  fspec: FilterSpec, sspec: SmootherSpec, alpha: float = 0.05,
                  nodes: int = DEFAULT_SMOOTHING_NODES) -> list[AnovaReport]:
    """Frequency-effect tests within groups of equal-norm frequencies.

    Each group must hold at least two frequencies of equal norm (same
    wavelength, different orientation).  Under isotropy the spectrum at a
    fixed norm does not depend on orientation, so a significant frequency
    effect within a group (``frequency_significant`` on that group's
    report) indicates anisotropy at that norm.  One report per group is
    returned, in input order.
    """
    locs = np.atleast_2d(np.asarray(locations, dtype=float))
    reports = []
    for g, group in enumerate(norm_groups):
        oms = np.atleast_2d(np.asarray(group, dtype=float))
        if len(oms) < 2:
            raise ValueError(
                f"norm group {g} has {len(oms)} frequency; need at least two "
                "orientations to test isotropy"
            )
        norms = np.sqrt(np.sum(oms**2, axis=1))
        if np.max(norms) - np.min(norms) > 1e-9:
            raise ValueError(
                f"norm group {g} mixes norms {norms.min()!r} and {norms.max()!r}; "
                "frequencies in a group must share their norm"
            )
        design = DesignSpec(
            locations=locs,
            frequencies=oms,
            min_location_spacing=sspec.rho,
            min_frequency_spacing=fspec.bandwidth,
        )
        table = build_log_table(pattern, design, fspec, sspec, nodes)
        reports.append(
            anova_decompose(table, alpha=alpha, label=f"norm group {g}: "
                            f"|omega| = {norms.mean():.6g}")
        )
    return reports
