"""Command-line entry point.

Reports emit CSV (to --out or stdout); human-readable notes such as the
crossover point or slope table go to stderr so piped output stays
machine-readable.  Exit codes: 0 success, 2 configuration error,
3 numerical guard tripped.
"""

from __future__ import annotations

import argparse
import sys

from .beamforming import SearchSpaceTooLarge
from .config import (
    ConfigError,
    SCALING_M_GRID,
    ExperimentConfig,
    parse_config_items,
)
from .experiments import (
    find_crossover,
    rows_to_csv,
    run_deployment_sweep,
    run_rho_sweep,
    run_rician_monte_carlo,
    run_scaling_report,
    write_rows,
)
from .geometry import Deployment

_ALL_DEPLOYMENTS = tuple(d.value for d in Deployment)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsrelay",
        description="Capacity experiments for a relay link aided by passive reflecting surfaces.",
    )
    parser.add_argument(
        "--report",
        choices=("sweep", "rician", "scaling", "rho"),
        default="sweep",
        help="which experiment driver to run (default: sweep)",
    )
    parser.add_argument("--config", metavar="FILE", help="key=value configuration file")
    parser.add_argument(
        "--deployment",
        choices=_ALL_DEPLOYMENTS + ("all",),
        help="restrict to one deployment (default: all)",
    )
    parser.add_argument("--m-grid", metavar="N,N,...", help="element-count grid")
    parser.add_argument("--rho", type=float, help="end-panel element fraction for multi rows")
    parser.add_argument("--rho-grid", metavar="R,R,...", help="element-split grid for multi rows")
    parser.add_argument("--tau-db", metavar="T,T,...", help="Rician factors in dB (inf allowed)")
    parser.add_argument("--trials", type=int, help="fading trials per grid point")
    parser.add_argument("--seed", type=int, help="base seed for the trial generators")
    parser.add_argument("--strategy", choices=("closed-form", "ascent"), help="beamforming design")
    parser.add_argument("--out", metavar="FILE", help="write CSV here instead of stdout")
    return parser


def _load_config(args) -> ExperimentConfig:
    items = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as handle:
                items = parse_config_items(handle.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
    if args.deployment:
        items["deployments"] = _ALL_DEPLOYMENTS if args.deployment == "all" else (args.deployment,)
    if args.m_grid:
        try:
            items["m_grid"] = tuple(int(part) for part in args.m_grid.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --m-grid: {exc}") from exc
    elif args.report == "scaling" and "m_grid" not in items:
        items["m_grid"] = SCALING_M_GRID
    if args.rho is not None:
        items["rho"] = args.rho
        items.setdefault("rho_grid", (args.rho,))
    if args.rho_grid:
        try:
            items["rho_grid"] = tuple(float(part) for part in args.rho_grid.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --rho-grid: {exc}") from exc
    if args.tau_db:
        try:
            items["tau_db"] = tuple(float(part) for part in args.tau_db.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --tau-db: {exc}") from exc
    if args.trials is not None:
        items["trials"] = args.trials
    if args.seed is not None:
        items["seed"] = args.seed
    if args.strategy:
        items["strategy"] = args.strategy
    if args.out:
        items["output_path"] = args.out
    try:
        return ExperimentConfig(**items)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _emit_rows(rows, config: ExperimentConfig) -> None:
    if config.output_path:
        write_rows(rows, config.output_path)
        print(f"wrote {len(rows)} rows to {config.output_path}", file=sys.stderr)
    else:
        sys.stdout.write(rows_to_csv(rows))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        if args.report == "sweep":
            rows = run_deployment_sweep(config)
            _emit_rows(rows, config)
            if Deployment.MULTI.value in config.deployments and Deployment.NEAR_R.value in config.deployments:
                crossover = find_crossover(config)
                if crossover is None:
                    print("crossover: distributed deployment never overtakes near-relay on this grid", file=sys.stderr)
                else:
                    lo, hi = crossover.bracket
                    print(
                        f"crossover: distributed overtakes near-relay at M={crossover.m_star}"
                        f" (grid bracket [{lo}, {hi}])",
                        file=sys.stderr,
                    )
        elif args.report == "rician":
            _emit_rows(run_rician_monte_carlo(config), config)
        elif args.report == "rho":
            rows = run_rho_sweep(config)
            _emit_rows(rows, config)
            if rows:
                best = max(rows, key=lambda r: r.capacity)
                print(
                    f"best split on grid: rho={best.rho:g} (capacity {best.capacity:.6g} bps/Hz);"
                    f" asymptotic optimum rho=0.25",
                    file=sys.stderr,
                )
        else:  # scaling
            table = run_scaling_report(config)
            lines = ["label,slope,expected,tolerance,passed"]
            for row in table:
                lines.append(
                    f"{row.label},{row.slope:.10g},{row.expected:g},{row.tolerance:g},"
                    f"{'pass' if row.passed else 'FAIL'}"
                )
            text = "\n".join(lines) + "\n"
            if config.output_path:
                with open(config.output_path, "w", encoding="utf-8", newline="\n") as handle:
                    handle.write(text)
                print(f"wrote slope table to {config.output_path}", file=sys.stderr)
            else:
                sys.stdout.write(text)
            for row in table:
                status = "pass" if row.passed else "FAIL"
                print(
                    f"{row.label}: slope {row.slope:+.4f} vs expected {row.expected:g}"
                    f" +/- {row.tolerance:g} -> {status}",
                    file=sys.stderr,
                )
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SearchSpaceTooLarge as exc:
        print(f"numerical guard tripped: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
