"""Window, pattern, lattice, and CSV round-trip tests."""

import numpy as np
import pytest

import zonalspec as zs
from zonalspec import (
    LatticeGrid,
    OutOfWindowError,
    PatternFormatError,
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


class TestWindow:
    def test_square_constructor(self):
        w = Window.square(70.0)
        assert w.as_bounds() == (0.0, 0.0, 70.0, 70.0)
        assert w.area == pytest.approx(4900.0)
        assert np.allclose(w.lengths, [70.0, 70.0])

    def test_square_with_origin(self):
        w = Window.square(10.0, origin=(-5.0, 2.0))
        assert w.as_bounds() == (-5.0, 2.0, 5.0, 12.0)

    @pytest.mark.parametrize(
        "lower,upper",
        [
            ((0, 0), (0, 1)),          # zero extent on x
            ((0, 0), (1, 0)),          # zero extent on y
            ((1, 0), (0, 1)),          # inverted x
            ((0, 0), (np.inf, 1)),     # nonfinite
            ((0, 0, 0), (1, 1, 1)),    # wrong arity
        ],
    )
    def test_invalid_windows_raise(self, lower, upper):
        with pytest.raises(ValueError):
            Window(lower, upper)

    def test_contains_is_boundary_inclusive(self):
        w = Window((0, 0), (1, 2))
        pts = np.array([[0, 0], [1, 2], [0.5, 1], [1.0001, 1], [-0.0001, 0]])
        assert list(w.contains(pts)) == [True, True, True, False, False]

    def test_dilate(self):
        w = Window((0, 0), (1, 1)).dilate(0.5)
        assert w.as_bounds() == (-0.5, -0.5, 1.5, 1.5)
        with pytest.raises(ValueError):
            Window((0, 0), (1, 1)).dilate(-0.1)


class TestPointPattern:
    def test_empty_by_default(self):
        p = PointPattern(Window.square(1.0))
        assert p.n_points == 0
        assert p.points.shape == (0, 2)
        assert p.intensity == 0.0

    def test_points_are_copied_and_frozen(self):
        src = np.array([[0.5, 0.5]])
        p = PointPattern(Window.square(1.0), src)
        src[0, 0] = 0.9
        assert p.points[0, 0] == 0.5
        with pytest.raises(ValueError):
            p.points[0, 0] = 0.1

    def test_outside_point_raises(self):
        with pytest.raises(OutOfWindowError):
            PointPattern(Window.square(1.0), [[0.5, 1.5]])

    def test_boundary_point_is_inside(self):
        p = PointPattern(Window.square(1.0), [[1.0, 1.0]])
        assert p.n_points == 1

    @pytest.mark.parametrize("pts", [[[0.1, 0.2, 0.3]], [[np.nan, 0.5]], [0.1, 0.2, 0.3]])
    def test_malformed_points_raise(self, pts):
        with pytest.raises(ValueError):
            PointPattern(Window.square(1.0), pts)

    def test_intensity(self):
        p = PointPattern(Window.square(2.0), [[0, 0], [1, 1], [2, 2]])
        assert p.intensity == pytest.approx(0.75)

    def test_same_points(self):
        w = Window.square(1.0)
        a = PointPattern(w, [[0.1, 0.2], [0.3, 0.4]])
        b = PointPattern(w, [[0.1, 0.2], [0.3, 0.4]])
        c = PointPattern(w, [[0.3, 0.4], [0.1, 0.2]])
        assert a.same_points(b)
        assert not a.same_points(c)


class TestCoercions:
    def test_as_window_passthrough_and_bounds(self):
        w = Window.square(3.0)
        assert as_window(w) is w
        assert as_window((0, 0, 3, 3)) == w
        with pytest.raises(ValueError):
            as_window((0, 0, 3))

    def test_as_point_pattern_requires_window_for_arrays(self):
        with pytest.raises(ValueError):
            as_point_pattern(np.array([[0.1, 0.1]]))
        p = as_point_pattern(np.array([[0.1, 0.1]]), window=(0, 0, 1, 1))
        assert isinstance(p, PointPattern)

    def test_as_point_pattern_window_conflict(self):
        p = PointPattern(Window.square(1.0), [[0.5, 0.5]])
        assert as_point_pattern(p) is p
        assert as_point_pattern(p, window=(0, 0, 1, 1)) is p
        with pytest.raises(ValueError):
            as_point_pattern(p, window=(0, 0, 2, 2))


class TestLatticeGrid:
    def test_spacing_and_bounds_tile_the_window(self):
        grid = LatticeGrid(Window.square(70.0), (3, 3))
        assert np.allclose(grid.spacing, [70 / 3, 70 / 3])
        b00 = grid.cell_bounds(0, 0)
        b22 = grid.cell_bounds(2, 2)
        assert b00.as_bounds() == pytest.approx((0, 0, 70 / 3, 70 / 3))
        assert b22.as_bounds() == pytest.approx((140 / 3, 140 / 3, 70, 70))
        with pytest.raises(ValueError):
            grid.cell_bounds(3, 0)

    def test_cells_are_half_open(self):
        grid = LatticeGrid(Window.square(2.0), (2, 2))
        # the internal boundary belongs to the upper cell, the window edge
        # to the last cell
        idx = grid.cell_of(np.array([[1.0, 0.5], [0.5, 1.0], [2.0, 2.0]]))
        assert idx.tolist() == [[1, 0], [0, 1], [1, 1]]

    def test_cell_of_outside_raises(self):
        grid = LatticeGrid(Window.square(1.0), (2, 2))
        with pytest.raises(OutOfWindowError):
            grid.cell_of(np.array([[1.5, 0.5]]))

    def test_invalid_shape_raises(self):
        with pytest.raises(ValueError):
            LatticeGrid(Window.square(1.0), (0, 2))


class TestRasterize:
    def test_hand_counts(self):
        w = Window.square(2.0)
        pts = [[0.2, 0.3], [0.7, 0.8], [0.4, 1.5], [1.5, 0.5], [1.2, 1.8]]
        grid = LatticeGrid(w, (2, 2))
        counts = rasterize_counts(PointPattern(w, pts), grid)
        # counts[i1, i2]: first axis is x
        assert counts.tolist() == [[2, 1], [1, 1]]
        assert counts.sum() == 5

    def test_counts_sum_to_n(self):
        w = Window.square(10.0)
        p = zs.sim_poisson(1.0, w, seed=4)
        counts = rasterize_counts(p, LatticeGrid(w, (7, 3)))
        assert counts.shape == (7, 3)
        assert counts.sum() == p.n_points

    def test_window_mismatch_raises(self):
        p = PointPattern(Window.square(1.0), [[0.5, 0.5]])
        with pytest.raises(ValueError):
            rasterize_counts(p, LatticeGrid(Window.square(2.0), (2, 2)))


class TestRescale:
    def test_affine_map(self):
        p = PointPattern(Window.square(1.0), [[0.25, 0.75]])
        q = rescale_pattern(p, Window.square(70.0))
        assert np.allclose(q.points, [[17.5, 52.5]])

    def test_round_trip(self):
        w = Window((2, -1), (5, 3))
        p = PointPattern(w, [[2.5, 0.0], [4.9, 2.9]])
        back = rescale_pattern(rescale_pattern(p, Window.square(1.0)), w)
        assert np.allclose(back.points, p.points, atol=1e-12)

    def test_boundary_points_stay_inside(self):
        w = Window.square(1.0)
        p = PointPattern(w, [[1.0, 1.0], [0.0, 0.0]])
        q = rescale_pattern(p, Window((0, 0), (0.1, 0.3)))
        assert q.n_points == 2


class TestPatternCsv:
    def test_text_layout(self):
        p = PointPattern(Window.square(1.0), [[0.25, 0.5]])
        text = pattern_csv_text(p)
        lines = text.splitlines()
        assert lines[0] == "# window: 0.0 0.0 1.0 1.0"
        assert lines[1] == "x,y"
        assert lines[2] == "0.25,0.5"

    def test_round_trip_is_bit_exact(self, tmp_path, poisson30):
        path = tmp_path / "pattern.csv"
        save_pattern(poisson30, path)
        again = load_pattern(path)
        assert again.same_points(poisson30)

    def test_empty_pattern_round_trip(self, tmp_path):
        path = tmp_path / "empty.csv"
        save_pattern(PointPattern(Window.square(5.0)), path)
        p = load_pattern(path)
        assert p.n_points == 0
        assert p.window == Window.square(5.0)

    def test_expected_window_fallback(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("x,y\n0.5,0.5\n")
        p = load_pattern(path, expected_window=Window.square(1.0))
        assert p.window == Window.square(1.0)

    def test_declared_window_wins(self, tmp_path):
        path = tmp_path / "declared.csv"
        path.write_text("# window: 0 0 2 2\nx,y\n0.5,0.5\n")
        p = load_pattern(path, expected_window=Window.square(3.0))
        assert p.window == Window.square(2.0)

    def test_no_window_anywhere_raises(self, tmp_path):
        path = tmp_path / "nowindow.csv"
        path.write_text("x,y\n0.5,0.5\n")
        with pytest.raises(PatternFormatError):
            load_pattern(path)

    def test_point_outside_expected_window_raises(self, tmp_path):
        path = tmp_path / "outside.csv"
        path.write_text("x,y\n5.0,5.0\n")
        with pytest.raises(OutOfWindowError):
            load_pattern(path, expected_window=Window.square(1.0))

    def test_bad_header_names_line(self, tmp_path):
        path = tmp_path / "badheader.csv"
        path.write_text("# a comment\nlon,lat\n0.5,0.5\n")
        with pytest.raises(PatternFormatError, match="line 2"):
            load_pattern(path, expected_window=Window.square(1.0))

    def test_bad_row_names_line(self, tmp_path):
        path = tmp_path / "badrow.csv"
        path.write_text("x,y\n0.5,0.5\n0.5,oops\n")
        with pytest.raises(PatternFormatError, match="line 3"):
            load_pattern(path, expected_window=Window.square(1.0))

    def test_wrong_column_count_raises(self, tmp_path):
        path = tmp_path / "threecols.csv"
        path.write_text("x,y\n0.5,0.5,0.5\n")
        with pytest.raises(PatternFormatError, match="two comma-separated"):
            load_pattern(path, expected_window=Window.square(1.0))

    def test_malformed_window_line_raises(self, tmp_path):
        path = tmp_path / "badwindow.csv"
        path.write_text("# window: 0 0 1\nx,y\n")
        with pytest.raises(PatternFormatError, match="four numbers"):
            load_pattern(path)

    def test_comments_and_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "comments.csv"
        path.write_text(
            "# produced by hand\n\n# window: 0 0 1 1\n# more notes\nx,y\n\n0.5,0.25\n"
        )
        p = load_pattern(path)
        assert p.n_points == 1
        assert np.allclose(p.points, [[0.5, 0.25]])
