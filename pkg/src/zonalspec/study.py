"""Replicated simulation studies of the stationarity test.

A study simulates a model repeatedly, runs the test on every replicate,
and reports the fraction of replicates that reject stationarity (verdict
other than stationary-compatible).  When a frequency is dropped the same
replicates are evaluated both with and without that column, so the two
rejection fractions are directly comparable.  Replicates whose log table
cannot be formed (a zero periodogram in an extremely sparse corner) are
counted and reported separately; rejection fractions are taken over the
completed replicates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .anova import (
    VERDICT_STATIONARY,
    DesignSpec,
    anova_decompose,
    auto_design,
    build_log_table,
    quadrant_design,
)
from .errors import ConfigError, ZeroPeriodogramError
from .geometry import Window, as_window
from .simulate import DEFAULT_POINT_BUDGET, simulate_model
from .rng import subseed
from .spectral import DEFAULT_SMOOTHING_NODES, FilterSpec, SmootherSpec


@dataclass(frozen=True)
class StudyConfig:
    """Configuration of a replicated rejection-rate study."""

    model: dict
    window: Window = field(default_factory=lambda: Window.square(70.0))
    design: object = "auto"
    h: float = 3.0
    rho: float = 20.0
    alpha: float = 0.05
    nodes: int = DEFAULT_SMOOTHING_NODES
    replicates: int = 100
    seed: int = 0
    drop_frequency: int | None = None
    budget: float = DEFAULT_POINT_BUDGET
    note: str | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("a study needs at least one replicate")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie strictly between 0 and 1")

    @classmethod
    def from_json_dict(cls, data: dict) -> "StudyConfig":
        data = dict(data)
        known = {
            "model", "window", "design", "h", "rho", "alpha", "nodes",
            "replicates", "seed", "drop_frequency", "budget", "note",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown study config keys: {sorted(unknown)}")
        if "model" not in data:
            raise ConfigError("study config needs a 'model' block")
        if "window" in data:
            data["window"] = as_window(data["window"])
        design = data.get("design", "auto")
        if isinstance(design, dict):
            data["design"] = DesignSpec(
                locations=np.asarray(design["locations"], dtype=float),
                frequencies=np.asarray(design["frequencies"], dtype=float),
                min_location_spacing=design.get("min_location_spacing"),
                min_frequency_spacing=design.get("min_frequency_spacing"),
            )
        elif design not in ("auto", "quadrants"):
            raise ConfigError(
                "design must be 'auto', 'quadrants', or an explicit "
                "locations/frequencies dict"
            )
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad study config: {exc}") from exc

    def resolve_design(self) -> DesignSpec:
        if isinstance(self.design, DesignSpec):
            return self.design
        if self.design == "auto":
            return auto_design(self.window, h=self.h, rho=self.rho)
        if self.design == "quadrants":
            return quadrant_design(self.window, h=self.h, rho=self.rho)
        raise ConfigError(f"unknown design {self.design!r}")


@dataclass(frozen=True)
class StudyReport:
    """Rejection fractions and bookkeeping for one study run."""

    replicates: int
    completed: int
    failed: int
    rejection_fraction: float
    verdicts: tuple
    rejection_fraction_reduced: float | None
    verdicts_reduced: tuple | None
    drop_frequency: int | None
    errors: tuple
    seed: int
    note: str | None

    def to_text(self) -> str:
        lines = [
            f"replicates: {self.replicates} ({self.completed} completed, "
            f"{self.failed} failed)",
            f"rejection fraction (all frequencies): {self.rejection_fraction:.4f}",
        ]
        if self.rejection_fraction_reduced is not None:
            lines.append(
                f"rejection fraction (without frequency {self.drop_frequency}): "
                f"{self.rejection_fraction_reduced:.4f}"
            )
        if self.failed:
            lines.append(f"first failure: {self.errors[0][1]}")
        if self.note:
            lines.append(f"note: {self.note}")
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        return {
            "replicates": self.replicates,
            "completed": self.completed,
            "failed": self.failed,
            "rejection_fraction": self.rejection_fraction,
            "verdicts": list(self.verdicts),
            "rejection_fraction_reduced": self.rejection_fraction_reduced,
            "verdicts_reduced": (
                list(self.verdicts_reduced)
                if self.verdicts_reduced is not None
                else None
            ),
            "drop_frequency": self.drop_frequency,
            "errors": [{"replicate": r, "message": m} for r, m in self.errors],
            "seed": self.seed,
            "note": self.note,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)


def run_study(config: StudyConfig) -> StudyReport:
    """Run the configured study; deterministic for a given config."""
    design = config.resolve_design()
    fspec = FilterSpec(config.h)
    sspec = SmootherSpec(config.rho)
    drop_idx = None
    if config.drop_frequency is not None:
        drop_idx = int(config.drop_frequency)
        if not 1 <= drop_idx <= design.n_frequencies:
            raise ConfigError(
                f"drop_frequency must be a 1-based index in 1.."
                f"{design.n_frequencies}, got {config.drop_frequency}"
            )
    verdicts: list[str] = []
    verdicts_reduced: list[str] = []
    errors: list[tuple[int, str]] = []
    for rep in range(config.replicates):
        pattern = simulate_model(
            config.model, config.window, subseed(config.seed, 1_000_000 + rep),
            config.budget,
        )
        try:
            table = build_log_table(pattern, design, fspec, sspec, config.nodes)
        except ZeroPeriodogramError as exc:
            errors.append((rep, str(exc)))
            continue
        verdicts.append(anova_decompose(table, alpha=config.alpha).verdict)
        if drop_idx is not None:
            reduced = table.without_frequency(drop_idx - 1)
            verdicts_reduced.append(
                anova_decompose(reduced, alpha=config.alpha).verdict
            )
    completed = len(verdicts)
    if completed == 0:
        raise ZeroPeriodogramError(0, 0, design.locations[0], design.frequencies[0])
    frac = sum(v != VERDICT_STATIONARY for v in verdicts) / completed
    frac_red = None
    if drop_idx is not None:
        frac_red = sum(v != VERDICT_STATIONARY for v in verdicts_reduced) / completed
    return StudyReport(
        replicates=config.replicates,
        completed=completed,
        failed=len(errors),
        rejection_fraction=frac,
        verdicts=tuple(verdicts),
        rejection_fraction_reduced=frac_red,
        verdicts_reduced=tuple(verdicts_reduced) if drop_idx is not None else None,
        drop_frequency=drop_idx,
        errors=tuple(errors),
        seed=config.seed,
        note=config.note,
    )
