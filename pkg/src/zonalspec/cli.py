"""Command line interface.

Subcommands
-----------
simulate
    Draw a point pattern from one of the built-in models and write it as CSV.
test
    Run the zonal stationarity test on a pattern file (or a precomputed
    log-periodogram table), optionally with pairwise location comparisons
    and within-norm isotropy tests.
study
    Run a replicated rejection-rate study from a JSON configuration.
compare
    Compare the local spectra of two patterns location by location.
khat
    Estimate the (translation-corrected) K function with CSR envelopes.

Exit codes: 0 success, 2 configuration or input-format problems, 3 point
budget exceeded, 4 degenerate data (for example a zero periodogram).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .anova import (
    DesignSpec,
    LogPeriodogramTable,
    anova_decompose,
    auto_design,
    build_log_table,
    posthoc_bonferroni,
    posthoc_text,
    quadrant_design,
    test_isotropy,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    DegenerateInputError,
    OutOfWindowError,
    PatternFormatError,
)
from .compare import DEFAULT_NULL_REPLICATES, compare_patterns
from .geometry import Window, load_pattern, pattern_csv_text, save_pattern
from .simulate import DEFAULT_POINT_BUDGET, simulate_model
from .spectral import DEFAULT_SMOOTHING_NODES, FilterSpec, SmootherSpec
from .study import StudyConfig, run_study
from .summaries import DEFAULT_ENVELOPE_SIMULATIONS, k_envelopes, k_estimate

_MODEL_CHOICES = [
    "poisson", "poisson-inhom", "thomas", "ssi", "zonal", "zonal-default",
]


def _add_window_option(parser: argparse.ArgumentParser, required_default: bool) -> None:
    help_txt = "observation window bounds x0 y0 x1 y1"
    if required_default:
        help_txt += " (default: 0 0 70 70)"
    else:
        help_txt += " (default: the window declared in the pattern file)"
    parser.add_argument(
        "--window", nargs=4, type=float, metavar=("X0", "Y0", "X1", "Y1"),
        default=None, help=help_txt,
    )


def _window_from_args(args, fallback_unit_70: bool) -> Window | None:
    if args.window is not None:
        x0, y0, x1, y1 = args.window
        return Window((x0, y0), (x1, y1))
    if fallback_unit_70:
        return Window.square(70.0)
    return None


def _add_spectrum_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--design", default="auto",
        help="'auto' (9 locations), 'quadrants' (4 locations), or a JSON file "
             "with 'locations' and 'frequencies' arrays (default: auto)",
    )
    parser.add_argument("--h", type=float, default=3.0,
                        help="box filter half-width (default: 3)")
    parser.add_argument(
        "--rho", type=float, default=None,
        help="smoothing square side (default: 20, or 34 for --design quadrants)",
    )
    parser.add_argument(
        "--nodes", type=int, default=DEFAULT_SMOOTHING_NODES,
        help=f"smoothing nodes per axis (default: {DEFAULT_SMOOTHING_NODES})",
    )


def _resolve_rho(args) -> float:
    if args.rho is not None:
        return args.rho
    return 34.0 if args.design == "quadrants" else 20.0


def _resolve_design(args, window: Window, rho: float) -> DesignSpec:
    name = args.design
    if name == "auto":
        return auto_design(window, h=args.h, rho=rho)
    if name == "quadrants":
        return quadrant_design(window, h=args.h, rho=rho)
    try:
        with open(name, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(
            f"--design must be 'auto', 'quadrants', or a readable JSON file "
            f"({exc})"
        ) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{name}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict) or "locations" not in data or "frequencies" not in data:
        raise ConfigError(
            f"{name}: a design file needs 'locations' and 'frequencies' arrays"
        )
    try:
        return DesignSpec(
            locations=np.asarray(data["locations"], dtype=float),
            frequencies=np.asarray(data["frequencies"], dtype=float),
            min_location_spacing=data.get("min_location_spacing"),
            min_frequency_spacing=data.get("min_frequency_spacing"),
        )
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _load_pattern_arg(path: str, args):
    expected = _window_from_args(args, fallback_unit_70=False)
    try:
        return load_pattern(path, expected_window=expected)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _cmd_simulate(args) -> int:
    window = _window_from_args(args, fallback_unit_70=True)
    name = args.model.replace("-", "_")
    model: dict = {"model": name}
    if name == "poisson":
        if args.intensity is None:
            raise ConfigError("simulate poisson needs --intensity")
        model["intensity"] = args.intensity
    elif name == "poisson_inhom":
        if args.expression is None:
            raise ConfigError("simulate poisson-inhom needs --expression")
        model["expression"] = args.expression
        if args.upper_bound is not None:
            model["upper_bound"] = args.upper_bound
    elif name == "thomas":
        if args.delta is None or args.tau is None:
            raise ConfigError("simulate thomas needs --delta and --tau")
        model["delta"] = args.delta
        model["tau"] = args.tau
        if args.mu is not None:
            model["mu"] = args.mu
        if args.mu_expression is not None:
            model["mu_expression"] = args.mu_expression
        if ("mu" in model) == ("mu_expression" in model):
            raise ConfigError(
                "simulate thomas needs exactly one of --mu or --mu-expression"
            )
    elif name == "ssi":
        if args.r is None:
            raise ConfigError("simulate ssi needs --r")
        model["r"] = args.r
        if args.count is not None:
            model["count"] = args.count
        if args.max_attempts is not None:
            model["max_attempts"] = args.max_attempts
    elif name == "zonal":
        if args.cells_json is None:
            raise ConfigError("simulate zonal needs --cells-json FILE")
        try:
            with open(args.cells_json, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.cells_json}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.cells_json}: not valid JSON ({exc})") from exc
        cells = data.get("cells", data) if isinstance(data, dict) else None
        if not isinstance(cells, dict):
            raise ConfigError(
                f"{args.cells_json}: expected a JSON object mapping cell "
                "numbers 1..9 to model blocks"
            )
        model["cells"] = cells
    pattern = simulate_model(model, window, args.seed, args.budget)
    if args.out is None:
        sys.stdout.write(pattern_csv_text(pattern))
    else:
        save_pattern(pattern, args.out)
        print(f"wrote {pattern.n_points} points to {args.out}")
    return 0


def _norm_groups_of(design: DesignSpec) -> list[np.ndarray]:
    norms = np.sqrt(np.sum(design.frequencies**2, axis=1))
    groups: dict[float, list[int]] = {}
    for j, norm in enumerate(norms):
        groups.setdefault(round(float(norm), 9), []).append(j)
    return [
        design.frequencies[idx]
        for _, idx in sorted(groups.items())
        if len(idx) >= 2
    ]


def _cmd_test(args) -> int:
    if (args.pattern is None) == (args.table_json is None):
        raise ConfigError(
            "test needs either a pattern file or --table-json, not both"
        )
    rho = _resolve_rho(args)
    fspec = FilterSpec(args.h)
    sspec = SmootherSpec(rho)
    pattern = None
    if args.table_json is not None:
        try:
            with open(args.table_json, "r", encoding="utf-8") as fh:
                table = LogPeriodogramTable.from_json_dict(json.load(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read {args.table_json}: {exc}") from exc
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"{args.table_json}: bad table file ({exc})") from exc
    else:
        pattern = _load_pattern_arg(args.pattern, args)
        design = _resolve_design(args, pattern.window, rho)
        table = build_log_table(pattern, design, fspec, sspec, args.nodes)
    if args.isotropy and pattern is None:
        raise ConfigError("--isotropy needs the pattern, not a table file")
    if args.save_table is not None:
        with open(args.save_table, "w", encoding="utf-8") as fh:
            json.dump(table.to_json_dict(), fh, indent=2)
            fh.write("\n")
    if args.drop_frequency is not None:
        n = table.n_frequencies
        if not 1 <= args.drop_frequency <= n:
            raise ConfigError(
                f"--drop-frequency must be a 1-based index in 1..{n}"
            )
        table = table.without_frequency(args.drop_frequency - 1)
    report = anova_decompose(table, alpha=args.alpha)
    posthoc = posthoc_bonferroni(table, alpha=args.alpha) if args.posthoc else None
    iso_reports = None
    if args.isotropy:
        groups = _norm_groups_of(table.design)
        if not groups:
            raise ConfigError(
                "no group of two or more equal-norm frequencies in the design; "
                "nothing to test for isotropy"
            )
        iso_reports = test_isotropy(
            pattern, table.design.locations, groups, fspec, sspec,
            alpha=args.alpha, nodes=args.nodes,
        )
    if args.json:
        doc = {"anova": report.to_json_dict()}
        if posthoc is not None:
            doc["posthoc"] = [
                {
                    "i": t.i, "j": t.j, "chi2": t.statistic, "p": t.p_value,
                    "level": t.level, "reject": t.reject,
                }
                for t in posthoc
            ]
        if iso_reports is not None:
            doc["isotropy"] = [r.to_json_dict() for r in iso_reports]
        _emit(json.dumps(doc, indent=2), args.out)
    else:
        blocks = [report.to_text()]
        if posthoc is not None:
            blocks.append("pairwise location comparisons (Bonferroni)")
            blocks.append(posthoc_text(posthoc))
        if iso_reports is not None:
            blocks.extend(r.to_text() for r in iso_reports)
        _emit("\n\n".join(blocks), args.out)
    return 0


def _cmd_study(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.config}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{args.config}: the study config must be a JSON object")
    if args.replicates is not None:
        data["replicates"] = args.replicates
    if args.seed is not None:
        data["seed"] = args.seed
    config = StudyConfig.from_json_dict(data)
    report = run_study(config)
    text = report.to_json(indent=2) if args.json else report.to_text()
    _emit(text, args.out)
    return 0


def _cmd_compare(args) -> int:
    rho = _resolve_rho(args)
    fspec = FilterSpec(args.h)
    sspec = SmootherSpec(rho)
    pattern_a = _load_pattern_arg(args.pattern_a, args)
    pattern_b = _load_pattern_arg(args.pattern_b, args)
    if pattern_a.window != pattern_b.window:
        raise ConfigError(
            "the two patterns declare different windows; compare needs a "
            "common observation window"
        )
    design = _resolve_design(args, pattern_a.window, rho)
    report = compare_patterns(
        pattern_a, pattern_b, design, fspec, sspec,
        replicates=args.reps, seed=args.seed,
    )
    text = report.to_json(indent=2) if args.json else report.to_text()
    _emit(text, args.out)
    return 0


def _cmd_khat(args) -> int:
    pattern = _load_pattern_arg(args.pattern, args)
    rmax = args.rmax
    if rmax is None:
        rmax = min(pattern.window.lengths) / 4.0
    radii = np.linspace(0.0, rmax, args.n_radii)
    if args.nsim > 0:
        estimate = k_envelopes(pattern, radii, n_simulations=args.nsim,
                               seed=args.seed)
    else:
        estimate = k_estimate(pattern, radii)
    if args.out is None:
        sys.stdout.write(estimate.csv_text())
    else:
        estimate.to_csv(args.out)
        print(f"wrote {len(radii)} radii to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zonalspec",
        description="Local-spectrum stationarity analysis of spatial point patterns.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate a point pattern model")
    p_sim.add_argument("model", choices=_MODEL_CHOICES)
    _add_window_option(p_sim, required_default=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", default=None, help="output CSV (default: stdout)")
    p_sim.add_argument("--budget", type=float, default=DEFAULT_POINT_BUDGET,
                       help="abort if more points than this would be generated")
    p_sim.add_argument("--intensity", type=float, default=None,
                       help="poisson: points per unit area")
    p_sim.add_argument("--expression", default=None,
                       help="poisson-inhom: intensity as a function of x and y, "
                            "e.g. '0.2*exp(0.1*y)'")
    p_sim.add_argument("--upper-bound", type=float, default=None,
                       help="poisson-inhom: intensity bound (default: scanned)")
    p_sim.add_argument("--delta", type=float, default=None,
                       help="thomas: parent intensity")
    p_sim.add_argument("--tau", type=float, default=None,
                       help="thomas: offspring displacement scale")
    p_sim.add_argument("--mu", type=float, default=None,
                       help="thomas: mean offspring per parent")
    p_sim.add_argument("--mu-expression", default=None,
                       help="thomas: mean offspring as a function of the parent "
                            "location")
    p_sim.add_argument("--r", type=float, default=None,
                       help="ssi: inhibition distance")
    p_sim.add_argument("--count", type=int, default=None,
                       help="ssi: points to place (default: 0.184 per unit area)")
    p_sim.add_argument("--max-attempts", type=int, default=None,
                       help="ssi: proposal budget before giving up")
    p_sim.add_argument("--cells-json", default=None,
                       help="zonal: JSON file mapping cells 1..9 to model blocks")
    p_sim.set_defaults(func=_cmd_simulate)

    p_test = sub.add_parser("test", help="zonal stationarity test of one pattern")
    p_test.add_argument("pattern", nargs="?", default=None,
                        help="pattern CSV (or use --table-json)")
    p_test.add_argument("--table-json", default=None,
                        help="precomputed log-periodogram table (JSON) to test "
                             "instead of a pattern file")
    p_test.add_argument("--save-table", default=None,
                        help="write the computed log-periodogram table as JSON")
    _add_window_option(p_test, required_default=False)
    _add_spectrum_options(p_test)
    p_test.add_argument("--alpha", type=float, default=0.05,
                        help="test level (default: 0.05)")
    p_test.add_argument("--drop-frequency", type=int, default=None,
                        help="drop one frequency column (1-based) before testing")
    p_test.add_argument("--posthoc", action="store_true",
                        help="add Bonferroni pairwise location comparisons")
    p_test.add_argument("--isotropy", action="store_true",
                        help="add frequency-effect tests within equal-norm groups")
    p_test.add_argument("--json", action="store_true",
                        help="emit JSON instead of text")
    p_test.add_argument("--out", default=None, help="output file (default: stdout)")
    p_test.set_defaults(func=_cmd_test)

    p_study = sub.add_parser("study", help="replicated rejection-rate study")
    p_study.add_argument("--config", required=True,
                         help="study configuration JSON file")
    p_study.add_argument("--replicates", type=int, default=None,
                         help="override the configured replicate count")
    p_study.add_argument("--seed", type=int, default=None,
                         help="override the configured seed")
    p_study.add_argument("--json", action="store_true",
                         help="emit JSON instead of text")
    p_study.add_argument("--out", default=None, help="output file (default: stdout)")
    p_study.set_defaults(func=_cmd_study)

    p_cmp = sub.add_parser("compare", help="compare the local spectra of two patterns")
    p_cmp.add_argument("pattern_a", help="first pattern CSV")
    p_cmp.add_argument("pattern_b", help="second pattern CSV")
    _add_window_option(p_cmp, required_default=False)
    _add_spectrum_options(p_cmp)
    p_cmp.add_argument("--reps", type=int, default=DEFAULT_NULL_REPLICATES,
                       help="Monte Carlo draws for the null quantiles "
                            f"(default: {DEFAULT_NULL_REPLICATES})")
    p_cmp.add_argument("--seed", type=int, default=0,
                       help="seed of the Monte Carlo null (default: 0)")
    p_cmp.add_argument("--json", action="store_true",
                       help="emit JSON instead of text")
    p_cmp.add_argument("--out", default=None, help="output file (default: stdout)")
    p_cmp.set_defaults(func=_cmd_compare)

    p_k = sub.add_parser("khat", help="K function with CSR envelopes")
    p_k.add_argument("pattern", help="pattern CSV")
    _add_window_option(p_k, required_default=False)
    p_k.add_argument("--rmax", type=float, default=None,
                     help="largest radius (default: shorter window side / 4)")
    p_k.add_argument("--n-radii", type=int, default=101,
                     help="number of radii from 0 to rmax (default: 101)")
    p_k.add_argument("--nsim", type=int, default=DEFAULT_ENVELOPE_SIMULATIONS,
                     help="CSR simulations for the envelopes; 0 disables "
                          f"(default: {DEFAULT_ENVELOPE_SIMULATIONS})")
    p_k.add_argument("--seed", type=int, default=0)
    p_k.add_argument("--out", default=None, help="output CSV (default: stdout)")
    p_k.set_defaults(func=_cmd_khat)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PatternFormatError, OutOfWindowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DegenerateInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
