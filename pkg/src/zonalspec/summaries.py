"""Second-order summary: the K function with translation edge correction.

The estimate counts ordered point pairs within distance r, weighting each
pair by the inverse overlap fraction of the window with itself shifted by
the pair difference,

    Khat(r) = |W| / (n (n-1)) * sum_{i != j} 1{d_ij <= r} / p_ij,
    p_ij = prod_axis (l - |dx|) / l,

which is unbiased for pi r^2 under complete spatial randomness.  Envelopes
come from repeated uniform simulations at the pattern's fitted intensity;
the pointwise min/max of 99 simulations gives the conventional 1% bands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError
from .geometry import PointPattern
from .rng import subrng

DEFAULT_ENVELOPE_SIMULATIONS = 99


@dataclass(frozen=True)
class KFunctionEstimate:
    """K function values on a radius grid, optionally with CSR envelopes."""

    radii: np.ndarray
    khat: np.ndarray
    theoretical: np.ndarray
    envelope_lower: np.ndarray | None = None
    envelope_upper: np.ndarray | None = None
    n_simulations: int | None = None

    def csv_text(self) -> str:
        cols = ["r", "khat", "poisson"]
        arrays = [self.radii, self.khat, self.theoretical]
        if self.envelope_lower is not None:
            cols += ["lo", "hi"]
            arrays += [self.envelope_lower, self.envelope_upper]
        lines = [",".join(cols)]
        lines.extend(
            ",".join(f"{float(v)!r}" for v in row) for row in zip(*arrays)
        )
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.csv_text())


def _pair_distances_and_weights(pattern: PointPattern):
    pts = pattern.points
    lengths = pattern.window.lengths
    diff = pts[:, None, :] - pts[None, :, :]
    iu = np.triu_indices(len(pts), k=1)
    d = np.sqrt(np.sum(diff[iu] ** 2, axis=-1))
    overlap = np.prod(1.0 - np.abs(diff[iu]) / lengths, axis=-1)
    return d, overlap


def k_estimate(pattern: PointPattern, radii) -> KFunctionEstimate:
    """Translation-corrected K function of one pattern.

    Radii beyond a quarter of the shorter window side exceed the usual
    validity rule of thumb for this correction and draw a warning from the
    caller-facing wrappers; here they are simply computed.
    """
    radii = np.sort(np.asarray(radii, dtype=float).ravel())
    if len(radii) == 0 or np.any(radii < 0) or not np.all(np.isfinite(radii)):
        raise ValueError("radii must be a nonempty array of finite nonnegative values")
    n = pattern.n_points
    if n < 2:
        raise DegenerateInputError(
            f"the K function needs at least two points, got {n}"
        )
    d, overlap = _pair_distances_and_weights(pattern)
    # each unordered pair stands for two ordered pairs
    weights = 2.0 / overlap
    order = np.argsort(d)
    d_sorted = d[order]
    cum = np.concatenate([[0.0], np.cumsum(weights[order])])
    idx = np.searchsorted(d_sorted, radii, side="right")
    khat = pattern.window.area / (n * (n - 1)) * cum[idx]
    return KFunctionEstimate(
        radii=radii, khat=khat, theoretical=np.pi * radii**2
    )


def k_envelopes(pattern: PointPattern, radii,
                n_simulations: int = DEFAULT_ENVELOPE_SIMULATIONS,
                seed=0) -> KFunctionEstimate:
    """K function of the pattern with pointwise CSR min/max envelopes.

    Simulates ``n_simulations`` binomial-ish CSR patterns (Poisson with the
    pattern's fitted intensity) on the same window, computes each K
    function on the same radius grid, and records the pointwise extremes.
    """
    n_simulations = int(n_simulations)
    if n_simulations < 1:
        raise ValueError("need at least one simulation for envelopes")
    base = k_estimate(pattern, radii)
    lam = pattern.intensity
    window = pattern.window
    lo = np.asarray(window.lower)
    env_lo = np.full_like(base.radii, np.inf)
    env_hi = np.full_like(base.radii, -np.inf)
    for s in range(n_simulations):
        rng = subrng(seed, 7_000_000 + s)
        n = max(2, int(rng.poisson(lam * window.area)))
        sim = PointPattern(window, lo + rng.random((n, 2)) * window.lengths)
        k_sim = k_estimate(sim, base.radii).khat
        env_lo = np.minimum(env_lo, k_sim)
        env_hi = np.maximum(env_hi, k_sim)
    return KFunctionEstimate(
        radii=base.radii,
        khat=base.khat,
        theoretical=base.theoretical,
        envelope_lower=env_lo,
        envelope_upper=env_hi,
        n_simulations=n_simulations,
    )
