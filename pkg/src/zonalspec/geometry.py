"""Rectangular observation windows, point patterns, and pattern file I/O.

Patterns live on axis-aligned rectangles in the plane.  The CSV format is
a two column ``x,y`` table; ``#`` comment lines may precede the header and
an optional ``# window: x0 y0 x1 y1`` comment declares the observation
window.  Coordinates on the window boundary count as inside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfWindowError, PatternFormatError


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle ``[x0, x1] x [y0, y1]``.

    Attributes
    ----------
    lower, upper : tuple of float
        Opposite corners; every component of ``upper`` must exceed the
        matching component of ``lower`` and all four must be finite.
    """

    lower: tuple[float, float]
    upper: tuple[float, float]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != 2 or len(hi) != 2:
            raise ValueError("window corners must be coordinate pairs")
        if not all(np.isfinite(lo + hi)):
            raise ValueError("window corners must be finite")
        if not (hi[0] > lo[0] and hi[1] > lo[1]):
            raise ValueError("window must have positive extent on both axes")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def square(cls, side: float, origin: tuple[float, float] = (0.0, 0.0)) -> "Window":
        ox, oy = origin
        return cls((ox, oy), (ox + side, oy + side))

    @property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.upper, dtype=float) - np.asarray(self.lower, dtype=float)

    @property
    def area(self) -> float:
        return float(np.prod(self.lengths))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the window, boundary inclusive."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def dilate(self, margin: float) -> "Window":
        """Window grown by ``margin`` on every side."""
        m = float(margin)
        if m < 0:
            raise ValueError("margin must be nonnegative")
        return Window(
            (self.lower[0] - m, self.lower[1] - m),
            (self.upper[0] + m, self.upper[1] + m),
        )

    def as_bounds(self) -> tuple[float, float, float, float]:
        return (self.lower[0], self.lower[1], self.upper[0], self.upper[1])


@dataclass(frozen=True)
class PointPattern:
    """A finite set of planar points together with its observation window.

    The coordinate array is copied and frozen at construction; every point
    must lie inside the window (boundary inclusive) and be finite.
    """

    window: Window
    points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must be an (n, 2) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        inside = self.window.contains(pts) if len(pts) else np.ones(0, bool)
        if not np.all(inside):
            bad = pts[~inside][0]
            raise OutOfWindowError(
                f"point ({bad[0]}, {bad[1]}) lies outside the window "
                f"{self.window.as_bounds()}"
            )
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def intensity(self) -> float:
        """Points per unit area."""
        return self.n_points / self.window.area

    def same_points(self, other: "PointPattern") -> bool:
        return (
            self.window == other.window
            and self.points.shape == other.points.shape
            and bool(np.array_equal(self.points, other.points))
        )


@dataclass(frozen=True)
class LatticeGrid:
    """Partition of a window into ``n1 x n2`` equal rectangular cells.

    Cells are half-open ``[lo, hi)`` along each axis except the last cell,
    which is closed so the partition covers the whole window.
    """

    window: Window
    cells_per_axis: tuple[int, int]

    def __post_init__(self):
        n = tuple(int(v) for v in self.cells_per_axis)
        if len(n) != 2 or n[0] < 1 or n[1] < 1:
            raise ValueError("cells_per_axis must be two positive integers")
        object.__setattr__(self, "cells_per_axis", n)

    @property
    def spacing(self) -> np.ndarray:
        return self.window.lengths / np.asarray(self.cells_per_axis, dtype=float)

    def cell_of(self, points: np.ndarray) -> np.ndarray:
        """Integer cell indices ``(i1, i2)`` for each point."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if not np.all(self.window.contains(pts)):
            raise OutOfWindowError("cannot assign cells to points outside the window")
        rel = (pts - np.asarray(self.window.lower)) / self.spacing
        idx = np.floor(rel).astype(int)
        return np.minimum(idx, np.asarray(self.cells_per_axis) - 1)

    def cell_bounds(self, i1: int, i2: int) -> Window:
        """Rectangle of cell ``(i1, i2)``; indices count from zero."""
        n1, n2 = self.cells_per_axis
        if not (0 <= i1 < n1 and 0 <= i2 < n2):
            raise ValueError(f"cell index ({i1}, {i2}) outside grid {self.cells_per_axis}")
        dx, dy = self.spacing
        x0 = self.window.lower[0] + i1 * dx
        y0 = self.window.lower[1] + i2 * dy
        return Window((x0, y0), (x0 + dx, y0 + dy))


def rasterize_counts(pattern: PointPattern, grid: LatticeGrid) -> np.ndarray:
    """Count pattern points per grid cell.

    Returns an integer array indexed ``[i1, i2]`` (first axis is x).  The
    counts always sum to the number of points in the pattern.
    """
    if grid.window != pattern.window:
        raise ValueError("grid window and pattern window differ")
    n1, n2 = grid.cells_per_axis
    counts = np.zeros((n1, n2), dtype=int)
    if pattern.n_points:
        idx = grid.cell_of(pattern.points)
        np.add.at(counts, (idx[:, 0], idx[:, 1]), 1)
    return counts


def rescale_pattern(pattern: PointPattern, target: Window) -> PointPattern:
    """Map a pattern onto ``target`` by the per-axis affine map between windows."""
    lo = np.asarray(pattern.window.lower)
    t_lo = np.asarray(target.lower)
    scale = target.lengths / pattern.window.lengths
    pts = t_lo + (pattern.points - lo) * scale
    # guard against one-ulp overshoot at the far boundary
    pts = np.clip(pts, t_lo, np.asarray(target.upper))
    return PointPattern(target, pts)


def as_window(value) -> Window:
    """Coerce a :class:`Window` or a 4-sequence ``(x0, y0, x1, y1)`` to a Window."""
    if isinstance(value, Window):
        return value
    vals = [float(v) for v in np.asarray(value, dtype=float).ravel()]
    if len(vals) != 4:
        raise ValueError("expected a Window or four bounds (x0, y0, x1, y1)")
    x0, y0, x1, y1 = vals
    return Window((x0, y0), (x1, y1))


def as_point_pattern(value, window=None) -> PointPattern:
    """Coerce coordinates plus a window, or pass through a PointPattern.

    Arrays require an explicit ``window``; guessing a bounding box would
    silently change every windowed statistic downstream.
    """
    if isinstance(value, PointPattern):
        if window is not None:
            w = as_window(window)
            if w != value.window:
                raise ValueError("pattern already carries a different window")
        return value
    if window is None:
        raise ValueError("a window is required when passing bare coordinates")
    return PointPattern(as_window(window), np.asarray(value, dtype=float))


_WINDOW_PREFIX = "# window:"


def load_pattern(path, expected_window: Window | None = None) -> PointPattern:
    """Read a pattern from a CSV file.

    Parameters
    ----------
    path : str or path-like
        File with optional ``#`` comments, an optional ``# window: x0 y0 x1 y1``
        line, a ``x,y`` header, then one ``x,y`` row per point.
    expected_window : Window, optional
        Window to verify the points against.  Used as the pattern window when
        the file declares none; when both are absent the file is unreadable
        because a pattern without a window has no meaning here.
    """
    declared = None
    rows = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if not header_seen and line.startswith("#"):
                if line.startswith(_WINDOW_PREFIX):
                    parts = line[len(_WINDOW_PREFIX):].split()
                    if len(parts) != 4:
                        raise PatternFormatError(
                            f"{path}: line {lineno}: window line needs four numbers"
                        )
                    try:
                        declared = as_window([float(p) for p in parts])
                    except ValueError as exc:
                        raise PatternFormatError(
                            f"{path}: line {lineno}: bad window line ({exc})"
                        ) from exc
                continue
            if not header_seen:
                cols = [c.strip().lower() for c in line.split(",")]
                if cols != ["x", "y"]:
                    raise PatternFormatError(
                        f"{path}: line {lineno}: expected header 'x,y', got {line!r}"
                    )
                header_seen = True
                continue
            cols = line.split(",")
            if len(cols) != 2:
                raise PatternFormatError(
                    f"{path}: line {lineno}: expected two comma-separated values"
                )
            try:
                rows.append((float(cols[0]), float(cols[1])))
            except ValueError as exc:
                raise PatternFormatError(
                    f"{path}: line {lineno}: could not parse row {line!r}"
                ) from exc
    if not header_seen and rows == [] and declared is None and expected_window is None:
        # completely empty file with no window information anywhere
        raise PatternFormatError(
            f"{path}: no window declared in the file and none supplied"
        )
    window = declared if declared is not None else expected_window
    if window is None:
        raise PatternFormatError(
            f"{path}: no window declared in the file and none supplied"
        )
    pts = np.asarray(rows, dtype=float) if rows else np.empty((0, 2))
    if expected_window is not None and len(pts):
        inside = expected_window.contains(pts)
        if not np.all(inside):
            bad = pts[~inside][0]
            raise OutOfWindowError(
                f"{path}: point ({bad[0]}, {bad[1]}) outside the expected window "
                f"{expected_window.as_bounds()}"
            )
    return PointPattern(window, pts)


def pattern_csv_text(pattern: PointPattern) -> str:
    """The CSV serialization of a pattern, window comment line included.

    Coordinates are written with ``repr`` so a save/load round trip
    reproduces the array bit for bit.
    """
    x0, y0, x1, y1 = pattern.window.as_bounds()
    lines = [f"{_WINDOW_PREFIX} {x0!r} {y0!r} {x1!r} {y1!r}", "x,y"]
    lines.extend(f"{float(x)!r},{float(y)!r}" for x, y in pattern.points)
    return "\n".join(lines) + "\n"


def save_pattern(pattern: PointPattern, path) -> None:
    """Write a pattern as CSV via :func:`pattern_csv_text`."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(pattern_csv_text(pattern))
