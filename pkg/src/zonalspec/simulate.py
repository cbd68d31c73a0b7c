"""Point process generators on rectangular windows.

All generators draw from a ``numpy`` Generator seeded through
:mod:`zonalspec.rng`, so a given seed always reproduces the same pattern.
Composite simulations derive one independent child stream per cell or
replicate from the master seed.

Expected point counts are capped by a budget (default ten million) so a
mistyped intensity fails fast instead of exhausting memory.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceededError, ConfigError
from .expressions import compile_intensity, scan_upper_bound
from .geometry import LatticeGrid, PointPattern, Window
from .rng import make_rng, subseed

DEFAULT_POINT_BUDGET = 10_000_000

#: Background intensity of the default composite: parent rate 0.046 times
#: mean cluster size 4, so plain cells match the cluster cell's expected
#: count of about 100 points per 23.3 x 23.3 cell.
DEFAULT_BACKGROUND_INTENSITY = 0.046 * 4


def _check_budget(expected: float, budget: float, what: str) -> None:
    if expected > budget:
        raise BudgetExceededError(
            f"{what} would generate about {expected:.3g} points, "
            f"over the budget of {budget:.3g}"
        )


def sim_poisson(intensity: float, window: Window, seed,
                budget: float = DEFAULT_POINT_BUDGET) -> PointPattern:
    """Homogeneous Poisson pattern with the given points-per-unit-area rate.

    Parameters
    ----------
    intensity : float
        Expected number of points per unit area; zero gives an empty pattern.
    window : Window
        Observation window.
    seed : int, SeedSequence or Generator
        Source of randomness.
    """
    intensity = float(intensity)
    if not (np.isfinite(intensity) and intensity >= 0):
        raise ValueError("intensity must be finite and nonnegative")
    expected = intensity * window.area
    _check_budget(expected, budget, "homogeneous Poisson simulation")
    rng = make_rng(seed)
    n = int(rng.poisson(expected))
    lo = np.asarray(window.lower)
    pts = lo + rng.random((n, 2)) * window.lengths
    return PointPattern(window, pts)


@dataclass(frozen=True)
class IntensityField:
    """Spatially varying intensity with a bound for rejection sampling.

    Attributes
    ----------
    evaluator : callable
        Vectorized ``f(x, y)`` returning intensities.
    upper_bound : float
        Value that must dominate the evaluator over the window of use.
    """

    evaluator: object
    upper_bound: float

    def __post_init__(self):
        if not callable(self.evaluator):
            raise ValueError("evaluator must be callable")
        ub = float(self.upper_bound)
        if not (np.isfinite(ub) and ub >= 0):
            raise ValueError("upper_bound must be finite and nonnegative")
        object.__setattr__(self, "upper_bound", ub)

    @classmethod
    def from_expression(cls, source: str, upper_bound: float | None = None,
                        window: Window | None = None) -> "IntensityField":
        """Build a field from an expression string over ``x`` and ``y``.

        Without an explicit ``upper_bound`` the bound is taken from a dense
        grid scan over ``window``, which is approximate by nature.
        """
        func = compile_intensity(source)
        if upper_bound is None:
            if window is None:
                raise ConfigError(
                    "either an upper bound or a window to scan for one is required"
                )
            upper_bound = scan_upper_bound(func, window)
        return cls(evaluator=func, upper_bound=float(upper_bound))

    def __call__(self, x, y):
        return self.evaluator(x, y)

    def spot_check(self, window: Window, grid: int = 64) -> None:
        """Verify 0 <= evaluator <= upper_bound on a dense grid over the window."""
        xs = np.linspace(window.lower[0], window.upper[0], grid)
        ys = np.linspace(window.lower[1], window.upper[1], grid)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        vals = np.asarray(self.evaluator(gx, gy), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("intensity evaluator returned a non-finite value")
        if np.any(vals < 0):
            raise ValueError("intensity evaluator returned a negative value")
        if np.any(vals > self.upper_bound * (1.0 + 1e-9)):
            raise ValueError(
                f"intensity evaluator exceeds its upper bound {self.upper_bound} "
                f"(found {vals.max()})"
            )


def sim_poisson_inhom(field: IntensityField, window: Window, seed,
                      budget: float = DEFAULT_POINT_BUDGET) -> PointPattern:
    """Inhomogeneous Poisson pattern by thinning a dominating uniform pattern.

    A homogeneous pattern at the field's upper bound is generated and each
    point is retained with probability ``field(x, y) / upper_bound``.  The
    evaluator must stay within ``[0, upper_bound]``; violations at proposed
    points raise immediately rather than silently biasing the sample.
    """
    if not isinstance(field, IntensityField):
        raise TypeError("field must be an IntensityField")
    field.spot_check(window)
    ub = field.upper_bound
    if ub == 0.0:
        return PointPattern(window, np.empty((0, 2)))
    _check_budget(ub * window.area, budget, "thinning simulation (dominating rate)")
    rng = make_rng(seed)
    n = int(rng.poisson(ub * window.area))
    lo = np.asarray(window.lower)
    props = lo + rng.random((n, 2)) * window.lengths
    u = rng.random(n)
    vals = np.asarray(field(props[:, 0], props[:, 1]), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("intensity evaluator returned a non-finite value at a proposal")
    if np.any(vals < 0):
        raise ValueError("intensity evaluator returned a negative value at a proposal")
    if np.any(vals > ub * (1.0 + 1e-9)):
        raise ValueError(
            "intensity evaluator exceeded its upper bound at a proposal; "
            "the bound must dominate the intensity over the whole window"
        )
    keep = u * ub < vals
    return PointPattern(window, props[keep])


@dataclass(frozen=True)
class ThomasParams:
    """Parent-offspring cluster parameters.

    Attributes
    ----------
    delta : float
        Parent intensity per unit area.
    tau : float
        Standard deviation of the isotropic Gaussian offspring displacement.
    mu : float or callable
        Mean offspring count per parent; a callable ``mu(x, y)`` lets the
        cluster size depend on the parent location.
    """

    delta: float
    tau: float
    mu: object

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta >= 0):
            raise ValueError("parent intensity delta must be finite and nonnegative")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValueError("offspring spread tau must be finite and positive")
        if not callable(self.mu):
            mu = float(self.mu)
            if not (np.isfinite(mu) and mu >= 0):
                raise ValueError("mean cluster size mu must be finite and nonnegative")
            object.__setattr__(self, "mu", mu)

    def mean_offspring(self, xy: np.ndarray) -> np.ndarray:
        if callable(self.mu):
            vals = np.asarray(self.mu(xy[:, 0], xy[:, 1]), dtype=float)
            if not np.all(np.isfinite(vals)) or np.any(vals < 0):
                raise ValueError("mu evaluator must return finite nonnegative values")
            return vals
        return np.full(len(xy), self.mu)


def sim_thomas(params: ThomasParams, window: Window, seed,
               budget: float = DEFAULT_POINT_BUDGET) -> PointPattern:
    """Clustered pattern: Poisson parents, Poisson cluster sizes, Gaussian spread.

    Parents are placed on the window dilated by ``4 * tau`` per side so
    clusters centred just outside still contribute; offspring falling
    outside the window are dropped.  The retained process then has
    intensity ``delta * mu`` away from any boundary effect.
    """
    dilated = window.dilate(4.0 * params.tau)
    exp_parents = params.delta * dilated.area
    if not callable(params.mu):
        _check_budget(exp_parents * params.mu, budget, "cluster simulation")
    _check_budget(exp_parents, budget, "cluster simulation (parents)")
    rng = make_rng(seed)
    n_par = int(rng.poisson(exp_parents))
    lo = np.asarray(dilated.lower)
    parents = lo + rng.random((n_par, 2)) * dilated.lengths
    means = params.mean_offspring(parents) if n_par else np.empty(0)
    counts = rng.poisson(means).astype(int) if n_par else np.empty(0, int)
    total = int(counts.sum())
    _check_budget(total, budget, "cluster simulation (offspring)")
    centres = np.repeat(parents, counts, axis=0)
    offspring = centres + rng.normal(0.0, params.tau, size=(total, 2))
    keep = window.contains(offspring) if total else np.ones(0, bool)
    return PointPattern(window, offspring[keep])


@dataclass(frozen=True)
class SsiResult:
    """Outcome of a sequential inhibition run."""

    pattern: PointPattern
    saturated: bool
    attempts: int


def sim_ssi(r: float, count: int, window: Window, seed,
            max_attempts: int = 1_000_000) -> SsiResult:
    """Simple sequential inhibition: uniform proposals kept at distance >= r.

    Proposals are drawn until ``count`` points are placed or ``max_attempts``
    proposals have been spent.  Running out of attempts is not an error;
    the partial pattern is returned with ``saturated=True`` so callers can
    decide how to react.
    """
    r = float(r)
    if not (np.isfinite(r) and r > 0):
        raise ValueError("inhibition distance r must be finite and positive")
    count = int(count)
    if count < 0:
        raise ValueError("count must be nonnegative")
    max_attempts = int(max_attempts)
    if max_attempts < 1:
        raise ValueError("max_attempts must be positive")
    rng = make_rng(seed)
    lo = np.asarray(window.lower)
    lengths = window.lengths
    # bucket accepted points into cells of side >= r; any point closer than
    # r must then lie in the 3 x 3 cell neighbourhood
    n_cells = np.maximum(1, np.floor(lengths / r).astype(int))
    cell_side = lengths / n_cells
    buckets: dict[tuple[int, int], list[int]] = {}
    accepted = np.empty((count, 2))
    n_acc = 0
    attempts = 0
    r2 = r * r
    while n_acc < count and attempts < max_attempts:
        attempts += 1
        p = lo + rng.random(2) * lengths
        ci = tuple(np.minimum((p - lo) // cell_side, n_cells - 1).astype(int))
        ok = True
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for k in buckets.get((ci[0] + dx, ci[1] + dy), ()):
                    d = accepted[k] - p
                    if d[0] * d[0] + d[1] * d[1] < r2:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            accepted[n_acc] = p
            buckets.setdefault(ci, []).append(n_acc)
            n_acc += 1
    pattern = PointPattern(window, accepted[:n_acc])
    return SsiResult(pattern=pattern, saturated=n_acc < count, attempts=attempts)


_MODEL_KEYS = {
    "poisson": {"intensity"},
    "poisson_inhom": {"expression", "upper_bound"},
    "thomas": {"delta", "tau", "mu", "mu_expression"},
    "ssi": {"r", "count", "max_attempts"},
    "zonal": {"cells"},
    "zonal_default": set(),
}


def default_zonal_cells() -> dict[int, dict]:
    """Cell models of the default composite: clustering in cell 3, inhibition
    in cell 8, uniform background elsewhere, all with matched expected counts."""
    cells: dict[int, dict] = {
        k: {"model": "poisson", "intensity": DEFAULT_BACKGROUND_INTENSITY}
        for k in range(1, 10)
    }
    cells[3] = {"model": "thomas", "delta": 0.046, "tau": 1.0, "mu": 4.0}
    cells[8] = {"model": "ssi", "r": 1.5, "count": None}
    return cells


@dataclass(frozen=True)
class ZonalCompositeSpec:
    """A 3 x 3 tiling of the window with one model per cell.

    Cells are numbered 1..9 left to right, bottom to top.  Every cell needs
    a model block; an SSI count of ``None`` is filled in at simulation time
    as the background intensity times the cell area.
    """

    window: Window
    cells: dict = field(default_factory=default_zonal_cells)

    def __post_init__(self):
        cells = {int(k): dict(v) for k, v in self.cells.items()}
        missing = [k for k in range(1, 10) if k not in cells]
        if missing:
            raise ConfigError(f"composite spec leaves cells {missing} unassigned")
        extra = [k for k in cells if not 1 <= k <= 9]
        if extra:
            raise ConfigError(f"composite spec names cells outside 1..9: {extra}")
        for k, model in cells.items():
            _validate_model(model, where=f"cell {k}")
            if model.get("model") == "zonal" or model.get("model") == "zonal_default":
                raise ConfigError(f"cell {k}: composites cannot nest composites")
        object.__setattr__(self, "cells", cells)

    @property
    def grid(self) -> LatticeGrid:
        return LatticeGrid(self.window, (3, 3))

    def cell_window(self, k: int) -> Window:
        i = k - 1
        return self.grid.cell_bounds(i % 3, i // 3)


def _validate_model(model: dict, where: str = "model") -> None:
    if not isinstance(model, dict) or "model" not in model:
        raise ConfigError(f"{where}: expected a dict with a 'model' key")
    name = model["model"]
    if name not in _MODEL_KEYS:
        raise ConfigError(
            f"{where}: unknown model {name!r}; choose from {sorted(_MODEL_KEYS)}"
        )
    unknown = set(model) - _MODEL_KEYS[name] - {"model"}
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)} for model {name!r}")


def simulate_model(model: dict, window: Window, seed,
                   budget: float = DEFAULT_POINT_BUDGET) -> PointPattern:
    """Simulate one model block (as used in config JSON) on a window."""
    _validate_model(model)
    name = model["model"]
    if name == "poisson":
        if "intensity" not in model:
            raise ConfigError("poisson model needs an 'intensity'")
        return sim_poisson(model["intensity"], window, seed, budget)
    if name == "poisson_inhom":
        if "expression" not in model:
            raise ConfigError("poisson_inhom model needs an 'expression'")
        field_ = IntensityField.from_expression(
            model["expression"], model.get("upper_bound"), window
        )
        return sim_poisson_inhom(field_, window, seed, budget)
    if name == "thomas":
        for key in ("delta", "tau"):
            if key not in model:
                raise ConfigError(f"thomas model needs '{key}'")
        if ("mu" in model) == ("mu_expression" in model):
            raise ConfigError("thomas model needs exactly one of 'mu' or 'mu_expression'")
        mu = model.get("mu")
        if "mu_expression" in model:
            mu = compile_intensity(model["mu_expression"])
        params = ThomasParams(delta=model["delta"], tau=model["tau"], mu=mu)
        return sim_thomas(params, window, seed, budget)
    if name == "ssi":
        if "r" not in model:
            raise ConfigError("ssi model needs 'r'")
        count = model.get("count")
        if count is None:
            count = int(round(DEFAULT_BACKGROUND_INTENSITY * window.area))
        result = sim_ssi(
            model["r"], count, window, seed,
            max_attempts=int(model.get("max_attempts") or 1_000_000),
        )
        if result.saturated:
            warnings.warn(
                f"sequential inhibition saturated at {result.pattern.n_points} of "
                f"{count} points after {result.attempts} attempts",
                RuntimeWarning,
                stacklevel=2,
            )
        return result.pattern
    if name == "zonal_default":
        return sim_zonal_composite(ZonalCompositeSpec(window=window), seed, budget)
    # name == "zonal"
    if "cells" not in model:
        raise ConfigError("zonal model needs a 'cells' mapping")
    spec = ZonalCompositeSpec(window=window, cells=model["cells"])
    return sim_zonal_composite(spec, seed, budget)


def sim_zonal_composite(spec: ZonalCompositeSpec, seed,
                        budget: float = DEFAULT_POINT_BUDGET) -> PointPattern:
    """Simulate each cell's model on its sub-window and pool the points.

    Cell k draws from an independent stream derived from the master seed
    with spawn key k, so any one cell's pattern is reproducible on its own.
    """
    parts = []
    for k in range(1, 10):
        sub = spec.cell_window(k)
        pat = simulate_model(spec.cells[k], sub, subseed(seed, k), budget)
        if pat.n_points:
            parts.append(pat.points)
    pts = np.vstack(parts) if parts else np.empty((0, 2))
    return PointPattern(spec.window, pts)


def simulate_replicates(model: dict, window: Window, seed, n_replicates: int,
                        budget: float = DEFAULT_POINT_BUDGET):
    """Yield ``(replicate_index, pattern)`` pairs with per-replicate substreams."""
    for rep in range(int(n_replicates)):
        yield rep, simulate_model(model, window, subseed(seed, 1_000_000 + rep), budget)
