"""Two-factor decomposition, chi-squared reference, post-hoc, isotropy."""

import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import zonalspec as zs
from zonalspec import (
    STANDARD_FREQUENCIES,
    AnovaReport,
    DesignSpacingWarning,
    DesignSpec,
    FilterSpec,
    LogPeriodogramTable,
    PointPattern,
    SmootherSpec,
    Window,
    ZeroPeriodogramError,
    anova_decompose,
    auto_design,
    build_log_table,
    chi2_cdf,
    chi2_quantile,
    posthoc_bonferroni,
    posthoc_text,
    quadrant_design,
    residual_variance,
)
from zonalspec import test_isotropy as isotropy_groups

SIGMA2_Q = residual_variance(FilterSpec(3.0), SmootherSpec(34.0))  # 16/1156


def quadrant_table(row_effects, col_scale=0.0, resid_scale=0.0, base=1.0):
    """4 x 9 log table with prescribed additive structure.

    ``row_effects`` are the four location effects; columns get a centered
    linear trend scaled by ``col_scale``; ``resid_scale`` adds one fixed
    doubly-centered residual direction so the interaction sum of squares
    equals ``resid_scale**2`` exactly.
    """
    a = np.asarray(row_effects, dtype=float)
    t = -np.arange(9.0)
    b = col_scale * (t - t.mean())
    u = np.array([0.5, -0.5, 0.5, -0.5])
    v = np.zeros(9)
    v[0], v[1] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    values = base + a[:, None] + b[None, :] + resid_scale * np.outer(u, v)
    design = quadrant_design(Window.square(70.0))
    return LogPeriodogramTable(values=values, design=design, sigma2=SIGMA2_Q,
                               h=3.0, rho=34.0)


class TestChi2:
    def test_reference_quantiles(self):
        assert chi2_quantile(0.95, 8) == pytest.approx(15.51, abs=0.005)
        assert chi2_quantile(0.95, 3) == pytest.approx(7.81, abs=0.005)
        assert chi2_quantile(0.95, 24) == pytest.approx(36.42, abs=0.005)

    def test_cdf_closed_form_df2(self):
        # with two degrees of freedom the distribution is Exp(1/2)
        assert chi2_cdf(2.0, 2) == pytest.approx(1 - np.exp(-1.0), abs=1e-10)

    @pytest.mark.parametrize("df", [1, 3, 8, 24, 56, 64])
    def test_quantile_inverts_cdf(self, df):
        for p in [1e-6, 0.025, 0.5, 0.95, 0.999]:
            assert chi2_cdf(chi2_quantile(p, df), df) == pytest.approx(p, abs=1e-8)

    def test_cdf_edges(self):
        assert chi2_cdf(0.0, 5) == 0.0
        assert chi2_cdf(-3.0, 5) == 0.0
        assert chi2_cdf(1e9, 5) == pytest.approx(1.0)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            chi2_cdf(1.0, 0)
        with pytest.raises(ValueError):
            chi2_quantile(0.95, -1)
        with pytest.raises(ValueError):
            chi2_quantile(1.0, 3)
        with pytest.raises(ValueError):
            chi2_quantile(0.0, 3)


class TestDesignSpec:
    def test_standard_frequencies_layout(self):
        assert STANDARD_FREQUENCIES.shape == (9, 2)
        comps = np.array([np.pi / 20, 8 * np.pi / 20, 15 * np.pi / 20])
        # first component varies fastest
        assert np.allclose(STANDARD_FREQUENCIES[:3, 0], comps)
        assert np.allclose(STANDARD_FREQUENCIES[:3, 1], comps[0])
        assert np.allclose(STANDARD_FREQUENCIES[::3, 1], comps)

    def test_auto_design_locations(self, unit70):
        d = auto_design(unit70)
        assert d.n_locations == 9
        assert d.n_frequencies == 9
        expected = [70 / 6, 35.0, 350 / 6]
        assert np.allclose(sorted(set(d.locations[:, 0])), expected)
        # ordered left to right, bottom to top
        assert np.allclose(d.locations[0], [70 / 6, 70 / 6])
        assert np.allclose(d.locations[-1], [350 / 6, 350 / 6])

    def test_quadrant_design_locations(self, unit70):
        d = quadrant_design(unit70)
        assert d.n_locations == 4
        assert np.allclose(d.locations, [[17.5, 17.5], [52.5, 17.5],
                                         [17.5, 52.5], [52.5, 52.5]])

    def test_spacing_warning_on_close_locations(self):
        with pytest.warns(DesignSpacingWarning, match="locations"):
            DesignSpec(
                locations=np.array([[0.0, 0.0], [5.0, 0.0]]),
                frequencies=STANDARD_FREQUENCIES,
                min_location_spacing=20.0,
            )

    def test_spacing_warning_on_close_frequencies(self):
        with pytest.warns(DesignSpacingWarning, match="frequencies"):
            DesignSpec(
                locations=np.array([[0.0, 0.0], [40.0, 0.0]]),
                frequencies=np.array([[0.1, 0.1], [0.12, 0.1]]),
                min_frequency_spacing=np.pi / 3,
            )

    def test_default_design_is_clear_of_minima(self, unit70):
        with warnings.catch_warnings():
            warnings.simplefilter("error", DesignSpacingWarning)
            d = auto_design(unit70)
            quadrant_design(unit70)
        assert d.check_spacing() == (True, True)

    def test_small_window_triggers_warning(self):
        with pytest.warns(DesignSpacingWarning):
            auto_design(Window.square(30.0), rho=20.0)

    @pytest.mark.parametrize(
        "locs,oms",
        [
            (np.zeros((1, 2)), STANDARD_FREQUENCIES),       # one location
            (np.zeros((3, 3)), STANDARD_FREQUENCIES),       # bad shape
            (np.array([[0.0, 0.0], [1.0, 1.0]]), np.zeros((1, 2))),
            (np.array([[0.0, np.nan], [1.0, 1.0]]), STANDARD_FREQUENCIES),
        ],
    )
    def test_invalid_designs_raise(self, locs, oms):
        with pytest.raises(ValueError):
            DesignSpec(locations=locs, frequencies=oms)


class TestLogPeriodogramTable:
    def test_shape_must_match_design(self, unit70):
        with pytest.raises(ValueError, match="shape"):
            LogPeriodogramTable(values=np.zeros((3, 9)),
                                design=quadrant_design(unit70), sigma2=0.04)

    def test_entries_must_be_finite(self, unit70):
        values = np.zeros((4, 9))
        values[2, 5] = np.inf
        with pytest.raises(ValueError, match="finite"):
            LogPeriodogramTable(values=values, design=quadrant_design(unit70),
                                sigma2=0.04)

    def test_sigma2_must_be_positive(self, unit70):
        with pytest.raises(ValueError, match="sigma2"):
            LogPeriodogramTable(values=np.zeros((4, 9)),
                                design=quadrant_design(unit70), sigma2=0.0)

    def test_without_frequency(self):
        table = quadrant_table([0.0, 0.1, 0.2, 0.3], col_scale=0.05)
        reduced = table.without_frequency(8)
        assert reduced.n_frequencies == 8
        assert np.array_equal(reduced.values, table.values[:, :8])
        assert np.array_equal(reduced.design.frequencies,
                              table.design.frequencies[:8])
        assert reduced.sigma2 == table.sigma2
        with pytest.raises(ValueError, match="outside"):
            table.without_frequency(9)
        with pytest.raises(ValueError, match="outside"):
            table.without_frequency(-1)

    def test_without_frequency_refuses_two_column_table(self, unit70):
        design = DesignSpec(locations=np.array([[10.0, 10.0], [50.0, 50.0]]),
                            frequencies=STANDARD_FREQUENCIES[:2])
        table = LogPeriodogramTable(values=np.zeros((2, 2)), design=design,
                                    sigma2=0.04)
        with pytest.raises(ValueError, match="two-column"):
            table.without_frequency(0)

    def test_json_round_trip(self):
        table = quadrant_table([0.0, -0.1, 0.2, 0.05], col_scale=0.03,
                               resid_scale=0.2)
        blob = json.dumps(table.to_json_dict())
        again = LogPeriodogramTable.from_json_dict(json.loads(blob))
        assert np.allclose(again.values, table.values)
        assert np.allclose(again.design.locations, table.design.locations)
        assert np.allclose(again.design.frequencies, table.design.frequencies)
        assert again.sigma2 == table.sigma2
        assert again.h == 3.0 and again.rho == 34.0


class TestBuildLogTable:
    def test_values_are_logs_of_periodogram_table(self, poisson30, window30):
        design = DesignSpec(
            locations=np.array([[10.0, 10.0], [20.0, 20.0]]),
            frequencies=STANDARD_FREQUENCIES[:3],
        )
        fspec, sspec = FilterSpec(3.0), SmootherSpec(8.0)
        table = build_log_table(poisson30, design, fspec, sspec, nodes=3)
        raw = zs.periodogram_table(poisson30, design.locations,
                                   design.frequencies, fspec, sspec, nodes=3)
        assert np.allclose(table.values, np.log(raw), rtol=1e-14)
        assert table.sigma2 == pytest.approx(residual_variance(fspec, sspec))
        assert table.h == 3.0 and table.rho == 8.0

    def test_zero_cell_raises_with_cell_info(self):
        w = Window.square(30.0)
        corner_only = PointPattern(w, [[1.0, 1.0], [2.0, 1.5]])
        design = DesignSpec(
            locations=np.array([[2.0, 2.0], [25.0, 25.0]]),
            frequencies=STANDARD_FREQUENCIES[:2],
        )
        with pytest.raises(ZeroPeriodogramError) as err:
            build_log_table(corner_only, design, FilterSpec(3.0),
                            SmootherSpec(4.0), nodes=1)
        assert err.value.location_index == 1
        assert err.value.frequency_index == 0
        assert "too sparse" in str(err.value)


class TestDecomposition:
    def test_hand_worked_two_by_two(self, unit70):
        design = DesignSpec(locations=np.array([[10.0, 10.0], [50.0, 50.0]]),
                            frequencies=STANDARD_FREQUENCIES[:2])
        table = LogPeriodogramTable(values=np.array([[0.0, 0.0], [0.0, 1.0]]),
                                    design=design, sigma2=1.0)
        rpt = anova_decompose(table)
        assert rpt.ss_location == pytest.approx(0.25, abs=1e-15)
        assert rpt.ss_frequency == pytest.approx(0.25, abs=1e-15)
        assert rpt.ss_interaction == pytest.approx(0.25, abs=1e-15)
        assert rpt.ss_total == pytest.approx(0.75, abs=1e-15)
        assert (rpt.df_location, rpt.df_frequency, rpt.df_interaction,
                rpt.df_total) == (1, 1, 1, 3)

    def test_sum_of_squares_identity_on_random_tables(self):
        rng = np.random.default_rng(101)
        for _ in range(1000):
            m = int(rng.integers(2, 7))
            n = int(rng.integers(2, 7))
            y = rng.normal(scale=rng.uniform(0.1, 5.0), size=(m, n))
            design = DesignSpec(
                locations=rng.uniform(0, 100, size=(m, 2)),
                frequencies=rng.uniform(0.1, 3.0, size=(n, 2)),
            )
            table = LogPeriodogramTable(values=y, design=design, sigma2=0.04)
            rpt = anova_decompose(table)
            direct_total = float(np.sum((y - y.mean()) ** 2))
            assert abs(rpt.ss_total - direct_total) < 1e-9
            parts = rpt.ss_location + rpt.ss_frequency + rpt.ss_interaction
            assert abs(parts - rpt.ss_total) < 1e-9

    def test_additive_table_has_no_interaction(self):
        table = quadrant_table([0.0, 0.3, -0.2, 0.1], col_scale=0.2)
        rpt = anova_decompose(table)
        assert rpt.ss_interaction == pytest.approx(0.0, abs=1e-18)

    def test_constant_table_is_stationary_compatible(self):
        table = quadrant_table([0.0, 0.0, 0.0, 0.0], base=2.7)
        rpt = anova_decompose(table)
        assert rpt.ss_total == pytest.approx(0.0, abs=1e-18)
        assert rpt.verdict == zs.VERDICT_STATIONARY
        assert not rpt.location_significant
        assert not rpt.interaction_significant

    def test_shift_invariance(self):
        base = quadrant_table([0.0, 0.2, -0.1, 0.4], col_scale=0.1,
                              resid_scale=0.3)
        shifted = LogPeriodogramTable(values=base.values + 5.5,
                                      design=base.design, sigma2=base.sigma2)
        a, b = anova_decompose(base), anova_decompose(shifted)
        assert a.ss_location == pytest.approx(b.ss_location, rel=1e-12)
        assert a.ss_frequency == pytest.approx(b.ss_frequency, rel=1e-12)
        assert a.ss_interaction == pytest.approx(b.ss_interaction, rel=1e-9)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(7)
        base = quadrant_table([0.0, 0.2, -0.1, 0.4], col_scale=0.1,
                              resid_scale=0.3)
        perm_rows = rng.permutation(4)
        perm_cols = rng.permutation(9)
        shuffled = LogPeriodogramTable(
            values=base.values[np.ix_(perm_rows, perm_cols)],
            design=base.design, sigma2=base.sigma2,
        )
        a, b = anova_decompose(base), anova_decompose(shuffled)
        for field in ("ss_location", "ss_frequency", "ss_interaction", "ss_total"):
            assert getattr(a, field) == pytest.approx(getattr(b, field), rel=1e-12)

    def test_chi2_is_ss_over_sigma2(self):
        table = quadrant_table([0.0, 0.2, -0.1, 0.4], col_scale=0.1,
                               resid_scale=0.3)
        rpt = anova_decompose(table)
        assert rpt.chi2_location == pytest.approx(rpt.ss_location / SIGMA2_Q)
        assert rpt.chi2_frequency == pytest.approx(rpt.ss_frequency / SIGMA2_Q)
        assert rpt.chi2_interaction == pytest.approx(rpt.ss_interaction / SIGMA2_Q)

    def test_alpha_validation(self):
        table = quadrant_table([0.0, 0.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            anova_decompose(table, alpha=0.0)
        with pytest.raises(ValueError):
            anova_decompose(table, alpha=1.0)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_identity_holds_for_arbitrary_seeds(self, seed):
        rng = np.random.default_rng(seed)
        y = rng.normal(size=(4, 9))
        table = quadrant_table([0, 0, 0, 0])
        table = LogPeriodogramTable(values=y, design=table.design, sigma2=0.04)
        rpt = anova_decompose(table)
        assert rpt.ss_total == pytest.approx(
            rpt.ss_location + rpt.ss_frequency + rpt.ss_interaction, rel=1e-12
        )


class TestVerdictLadder:
    def test_row_effects_only_mean_uniform_modulation(self):
        table = quadrant_table([0.0, 1.0, -1.0, 0.5])
        rpt = anova_decompose(table)
        assert rpt.location_significant
        assert not rpt.interaction_significant
        assert rpt.verdict == zs.VERDICT_UNIFORM

    def test_interaction_outranks_location(self):
        table = quadrant_table([0.0, 1.0, -1.0, 0.5], resid_scale=3.0)
        rpt = anova_decompose(table)
        assert rpt.interaction_significant
        assert rpt.verdict == zs.VERDICT_NONUNIFORM

    def test_interaction_alone_means_nonuniform(self):
        table = quadrant_table([0.0, 0.0, 0.0, 0.0], resid_scale=3.0)
        rpt = anova_decompose(table)
        assert not rpt.location_significant
        assert rpt.verdict == zs.VERDICT_NONUNIFORM

    def test_frequency_effect_alone_is_still_stationary(self):
        # a spectrum that varies over frequency but not over space
        table = quadrant_table([0.0, 0.0, 0.0, 0.0], col_scale=1.0)
        rpt = anova_decompose(table)
        assert rpt.frequency_significant
        assert rpt.verdict == zs.VERDICT_STATIONARY

    def test_null_calibration_of_location_test(self):
        # iid Normal(0, sigma^2) entries: the location statistic is exactly
        # chi-squared, so rejection should sit at alpha
        rng = np.random.default_rng(515)
        design = quadrant_design(Window.square(70.0))
        hits = 0
        n_tables = 2000
        for _ in range(n_tables):
            y = rng.normal(scale=np.sqrt(SIGMA2_Q), size=(4, 9))
            table = LogPeriodogramTable(values=y, design=design, sigma2=SIGMA2_Q)
            if anova_decompose(table).location_significant:
                hits += 1
        # se at p = 0.05 is about 0.005; allow five of them
        assert hits / n_tables == pytest.approx(0.05, abs=0.025)


class TestReportOutput:
    def test_text_layout(self):
        rpt = anova_decompose(quadrant_table([0.0, 1.0, -1.0, 0.5]),
                              label="demo")
        text = rpt.to_text()
        assert "demo" in text
        assert "Between spatial locations" in text
        assert "Between frequencies" in text
        assert "Interaction + residual" in text
        assert "Total" in text
        assert "verdict: " + zs.VERDICT_UNIFORM in text
        assert "sigma2" in text and "h = 3" in text

    def test_json_rows(self):
        rpt = anova_decompose(quadrant_table([0.0, 1.0, -1.0, 0.5]))
        blob = json.loads(rpt.to_json())
        assert len(blob["rows"]) == 4
        assert blob["rows"][0]["item"] == "Between spatial locations"
        assert blob["rows"][3]["p"] is None
        assert blob["verdict"] == zs.VERDICT_UNIFORM
        assert blob["n_locations"] == 4 and blob["n_frequencies"] == 9

    def test_spacing_flag_surfaces_in_text(self):
        with pytest.warns(DesignSpacingWarning):
            design = DesignSpec(
                locations=np.array([[1.0, 1.0], [2.0, 1.0]]),
                frequencies=STANDARD_FREQUENCIES,
                min_location_spacing=20.0,
            )
        table = LogPeriodogramTable(values=np.zeros((2, 9)), design=design,
                                    sigma2=0.04)
        text = anova_decompose(table).to_text()
        assert "below the recommended minimum" in text


class TestPosthoc:
    def test_statistic_formula(self):
        table = quadrant_table([0.0, 0.4, 0.0, 0.0])
        results = posthoc_bonferroni(table, alpha=0.05)
        assert len(results) == 6
        byp = {(r.i, r.j): r for r in results}
        expected = 9 * 0.4**2 / (2 * SIGMA2_Q)
        assert byp[(0, 1)].statistic == pytest.approx(expected, rel=1e-12)
        assert byp[(2, 3)].statistic == pytest.approx(0.0, abs=1e-18)
        assert all(r.level == pytest.approx(0.05 / 6) for r in results)

    def test_single_outlying_quadrant(self):
        # row effects with one quadrant clearly elevated: only the pair
        # spanning the largest gap survives the Bonferroni correction
        table = quadrant_table([0.0, -0.06515, -0.01921, 0.12389])
        results = posthoc_bonferroni(table, alpha=0.05)
        rejected = {(r.i, r.j) for r in results if r.reject}
        assert rejected == {(1, 3)}
        byp = {(r.i, r.j): r for r in results}
        assert byp[(1, 3)].statistic == pytest.approx(11.64, abs=0.05)

    def test_three_pairs_sharing_one_low_row(self):
        # one depressed quadrant against three comparable ones: exactly the
        # three pairs that involve it reject
        table = quadrant_table([0.0, 0.23874, 0.31593, 0.26220])
        results = posthoc_bonferroni(table, alpha=0.05)
        rejected = {(r.i, r.j) for r in results if r.reject}
        assert rejected == {(0, 1), (0, 2), (0, 3)}
        byp = {(r.i, r.j): r for r in results}
        assert byp[(0, 1)].statistic == pytest.approx(18.53, abs=0.05)
        assert byp[(0, 2)].statistic == pytest.approx(32.45, abs=0.05)
        assert byp[(0, 3)].statistic == pytest.approx(22.35, abs=0.05)

    def test_text_output(self):
        table = quadrant_table([0.0, -0.06515, -0.01921, 0.12389])
        text = posthoc_text(posthoc_bonferroni(table))
        lines = text.splitlines()
        assert lines[0].startswith("test")
        starred = [ln for ln in lines if ln.endswith("*")]
        assert len(starred) == 1 and starred[0].startswith("z2 vs z4")
        assert "per-comparison level" in text
        assert "6 pairs" in text

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            posthoc_bonferroni(quadrant_table([0, 0, 0, 0]), alpha=2.0)


class TestQuadrantConsistency:
    def test_decomposition_matches_reconstructed_effect_sizes(self):
        # a 4 x 9 table rebuilt from rounded row effects and exact column /
        # interaction magnitudes must reproduce its chi-squared statistics
        col_scale = np.sqrt(838.00 * SIGMA2_Q / 240.0)
        resid_scale = np.sqrt(26.60 * SIGMA2_Q)
        table = quadrant_table([0.0, -0.06515, -0.01921, 0.12389],
                               col_scale=col_scale, resid_scale=resid_scale)
        rpt = anova_decompose(table)
        assert rpt.chi2_location == pytest.approx(12.74, abs=0.05)
        assert rpt.chi2_frequency == pytest.approx(838.00, rel=1e-9)
        assert rpt.chi2_interaction == pytest.approx(26.60, rel=1e-9)
        assert rpt.location_significant
        assert not rpt.interaction_significant
        assert rpt.verdict == zs.VERDICT_UNIFORM


class TestIsotropy:
    def test_rejects_single_frequency_group(self, poisson30):
        with pytest.raises(ValueError, match="at least two"):
            isotropy_groups(poisson30, [(10.0, 10.0), (20.0, 20.0)],
                          [[(0.5, 0.0)]], FilterSpec(3.0), SmootherSpec(8.0))

    def test_rejects_mixed_norm_group(self, poisson30):
        with pytest.raises(ValueError, match="mixes norms"):
            isotropy_groups(poisson30, [(10.0, 10.0), (20.0, 20.0)],
                          [[(0.5, 0.0), (0.0, 0.9)]],
                          FilterSpec(3.0), SmootherSpec(8.0))

    def test_isotropic_pattern_passes(self, poisson30):
        w = 2 * np.pi / 2.5
        reports = isotropy_groups(
            poisson30, [(10.0, 10.0), (20.0, 20.0)],
            [[(w, 0.0), (0.0, w)]], FilterSpec(3.0), SmootherSpec(8.0),
        )
        assert len(reports) == 1
        assert not reports[0].frequency_significant
        assert reports[0].label.startswith("norm group 0")

    def test_striped_pattern_flags_anisotropy(self):
        # points concentrated on vertical stripes of period s put spectral
        # mass at (2 pi / s, 0) but not at (0, 2 pi / s)
        rng = np.random.default_rng(77)
        s = 2.5
        cols = np.arange(1.25, 30.0, s)
        xs = np.repeat(cols, 60) + rng.normal(0.0, 0.08, 60 * len(cols))
        ys = rng.uniform(0.0, 30.0, size=xs.shape)
        keep = (xs >= 0) & (xs <= 30)
        pattern = PointPattern(Window.square(30.0),
                               np.column_stack([xs[keep], ys[keep]]))
        w = 2 * np.pi / s
        reports = isotropy_groups(
            pattern, [(10.0, 10.0), (20.0, 20.0)],
            [[(w, 0.0), (0.0, w)]], FilterSpec(3.0), SmootherSpec(8.0),
        )
        assert reports[0].frequency_significant

    def test_one_report_per_group_in_order(self, poisson30):
        w1, w2 = 0.8, 1.7
        reports = isotropy_groups(
            poisson30, [(10.0, 10.0), (20.0, 20.0)],
            [[(w1, 0.0), (0.0, w1)], [(w2, 0.0), (0.0, w2)]],
            FilterSpec(3.0), SmootherSpec(8.0),
        )
        assert len(reports) == 2
        assert f"{w1:.6g}" in reports[0].label
        assert f"{w2:.6g}" in reports[1].label
