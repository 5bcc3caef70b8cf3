"""Command-line front end.

Examples:
  sphere-structures verify --scenario hypersphere_default
  sphere-structures verify --config run.json --json out/report.json --csv out/report.csv
  sphere-structures table --config run.json --point 1,0,1,0
  sphere-structures sweep --config run.json --param r3 --grid 0.5,1,2
"""

from __future__ import annotations

import argparse
import csv
import functools
import io
import json
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from sphere_structures.ambient import AmbientVector, GeometryError
from sphere_structures.induced import (
    closed_form_structure,
    det_i_minus_a_squared,
    has_closed_form,
    oracle_structure,
)
from sphere_structures.loguru_logger import logger
from sphere_structures.manifolds import RadiiAtPoint, SubmanifoldFamily, require_on_manifold
from sphere_structures.normality import NORMALITY_RESIDUAL, run_normality_sweep
from sphere_structures.render import render_key_values, render_report, render_sweep
from sphere_structures.run_config import ConfigError, RunConfig
from sphere_structures.scenario_registry import ScenarioRegistry
from sphere_structures.verify import ResidualReport, run_suite

EXIT_PASS = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

DEFAULT_JSON = "report.json"
DEFAULT_CSV = "report.csv"


def _exit_on_config_error(func: Callable[..., int]) -> Callable[..., int]:
    """Turns configuration and domain errors into exit code 2 with a message on stderr."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except GeometryError as e:
            logger.info(f"{func.__name__} rejected its configuration: {e.message}")
            print(f"error: {e.message}", file=sys.stderr)
            return EXIT_CONFIG

    return wrapper


def _write(path: str | Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")


def _csv_text(rows: list[list[Any]]) -> str:
    buffer = io.StringIO()
    csv.writer(buffer, lineterminator="\n").writerows(rows)
    return buffer.getvalue()


def build_report(config: RunConfig, verbose: bool = False) -> ResidualReport:
    """Identity suite, then the normality sweep when enabled; both under config.seed."""
    report = run_suite(
        config.spec,
        config.signs,
        config.n_points,
        config.n_vectors,
        config.seed,
        tols=config.tolerances,
        n_jobs=config.n_jobs,
        verbose=verbose,
    )
    if config.normality_enabled:
        report = report.merged(
            run_normality_sweep(
                config.spec,
                config.signs,
                config.normality_points,
                config.normality_fields,
                config.seed,
                cfg=config.fd,
                tols=config.tolerances,
                n_jobs=config.n_jobs,
                verbose=verbose,
            )
        )
    metadata = {**report.metadata, "config": config.to_dict(execution=False)}
    return ResidualReport(report.residuals, metadata)


@_exit_on_config_error
def cmd_verify(
    config: RunConfig,
    json_path: str | None = None,
    csv_path: str | None = None,
    verbose: bool = False,
) -> int:
    report = build_report(config, verbose=verbose)
    _write(json_path or config.output_json or DEFAULT_JSON, report.to_json())
    _write(csv_path or config.output_csv or DEFAULT_CSV, report.to_csv())
    print(render_report(report, str(config.spec)))
    if report.passed:
        return EXIT_PASS
    print(f"failed: {', '.join(report.failures())}", file=sys.stderr)
    return EXIT_FAILURE


def _u_description(config: RunConfig) -> str:
    family = config.spec.family
    if family == SubmanifoldFamily.HYPERSPHERE:
        return "u1(X) = (tau(X) + sum_j eps_j z_j Z_j) / R"
    if family == SubmanifoldFamily.DOUBLE_PRODUCT:
        return "u1(X) = tau(X) / R, u2(X) = r3 tau(X) / (r R)"
    return "u1 = tau/R, u2 = r3 tau/(r R), u3 = ((r2/r1)<x,Y> - (r1/r2)<y,X>) / r"


def structure_table(config: RunConfig, point: Sequence[float]) -> dict[str, Any]:
    """Closed-form and oracle structure at one point, with their largest deviation."""
    spec, signs = config.spec, config.signs
    try:
        pt = AmbientVector(spec.p, spec.q, np.asarray(point, dtype=np.float64))
    except GeometryError as e:
        raise ConfigError(e.message) from e
    require_on_manifold(spec, pt)

    oracle = oracle_structure(spec, pt, signs)
    rad = RadiiAtPoint.at(pt)
    table = {
        "sigma": rad.sigma,
        "u": _u_description(config),
        "oracle_a": oracle.a.tolist(),
        "oracle_xi": [xi.data.tolist() for xi in oracle.xi],
        "det_i_minus_a2": det_i_minus_a_squared(oracle),
        "closed_form_a": None,
        "closed_form_xi": None,
        "max_deviation": None,
    }
    if has_closed_form(spec, signs):
        closed = closed_form_structure(spec, pt, signs)
        deviation = float(np.max(np.abs(closed.a - oracle.a)))
        for c, o in zip(closed.xi, oracle.xi):
            deviation = max(deviation, float(np.max(np.abs(c.data - o.data))))
        table["closed_form_a"] = closed.a.tolist()
        table["closed_form_xi"] = [xi.data.tolist() for xi in closed.xi]
        table["max_deviation"] = deviation
    return table


def _fmt(values) -> str:
    return np.array2string(np.asarray(values), precision=6, suppress_small=True, separator=", ")


@_exit_on_config_error
def cmd_table(config: RunConfig, point: Sequence[float]) -> int:
    table = structure_table(config, point)
    rows = [
        ("point", _fmt(point)),
        ("sigma", f"{table['sigma']:.6g}"),
        ("u", table["u"]),
        ("a (oracle)", _fmt(table["oracle_a"])),
        ("a (closed form)", "n/a" if table["closed_form_a"] is None else _fmt(table["closed_form_a"])),
    ]
    for alpha, xi in enumerate(table["oracle_xi"], start=1):
        rows.append((f"xi{alpha} (oracle)", _fmt(xi)))
        if table["closed_form_xi"] is not None:
            rows.append((f"xi{alpha} (closed form)", _fmt(table["closed_form_xi"][alpha - 1])))
    rows.append(("det(I - a^2)", f"{table['det_i_minus_a2']:.6g}"))
    deviation = table["max_deviation"]
    rows.append(("max deviation", "n/a" if deviation is None else f"{deviation:.3e}"))
    print(render_key_values(rows, f"{config.spec} signs={config.signs}"))
    return EXIT_PASS


def _sweep_row(param: str, value: str, report: ResidualReport) -> dict[str, Any]:
    asserted = [(n, r) for n, r in report.residuals.items() if r.asserted]
    worst_name, worst = max(asserted, key=lambda item: item[1].max_abs_err / item[1].tol)
    normality = report.residuals.get(NORMALITY_RESIDUAL)
    meta = report.metadata.get("normality", {})
    return {
        "param": param,
        "value": value,
        "passed": report.passed,
        "worst_identity": worst_name,
        "worst_max_abs_err": worst.max_abs_err,
        "normality_residual": None if normality is None else normality.max_abs_err,
        "min_abs_det": meta.get("min_abs_det"),
    }


@_exit_on_config_error
def cmd_sweep(
    config: RunConfig,
    param: str,
    grid: Sequence[str],
    json_path: str | None = None,
    csv_path: str | None = None,
    verbose: bool = False,
) -> int:
    """One report per grid cell; the sweep table carries a summary row per cell."""
    grid = [value.strip() for value in grid if value.strip()]
    if not grid:
        raise ConfigError("Sweep grid is empty.")

    rows = []
    for value in grid:
        # Explicit sign patterns are written with ':' inside a comma-separated grid.
        cell_value = value.replace(":", ",") if param == "signs" else value
        cell = config.with_param(param, cell_value)
        logger.info(f"Sweep cell {param}={value}: {cell.spec} signs={cell.signs}")
        rows.append(_sweep_row(param, value, build_report(cell, verbose=verbose)))

    document = {"config": config.to_dict(execution=False), "param": param, "rows": rows}
    _write(
        json_path or config.output_json or DEFAULT_JSON,
        json.dumps(document, indent=2, sort_keys=True) + "\n",
    )
    header = ["param", "value", "passed", "worst_identity", "worst_max_abs_err", "normality_residual", "min_abs_det"]
    csv_rows = [header] + [
        [
            row["param"],
            row["value"],
            str(row["passed"]).lower(),
            row["worst_identity"],
            repr(row["worst_max_abs_err"]),
            "" if row["normality_residual"] is None else repr(row["normality_residual"]),
            "" if row["min_abs_det"] is None else repr(row["min_abs_det"]),
        ]
        for row in rows
    ]
    _write(csv_path or config.output_csv or DEFAULT_CSV, _csv_text(csv_rows))
    print(render_sweep(rows, param, f"sweep {param} on {config.spec}"))
    return EXIT_PASS if all(row["passed"] for row in rows) else EXIT_FAILURE


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.scenario:
        config = ScenarioRegistry.get(args.scenario)
        if config is None:
            raise ConfigError(
                f"Unknown scenario '{args.scenario}', expected one of {ScenarioRegistry.list_scenarios()}."
            )
        return config
    return RunConfig.from_json_file(args.config)


def _parse_point(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"Cannot parse point '{text}'.") from None


def _add_source(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="JSON run configuration")
    source.add_argument("--scenario", help="name of a registered scenario")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphere-structures",
        description="Induced (a,1)f structures on spheres and products of spheres.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run the identity suite and the normality sweep")
    _add_source(verify)
    verify.add_argument("--json", help="JSON report path")
    verify.add_argument("--csv", help="CSV summary path")
    verify.add_argument("--verbose", action="store_true", help="show progress bars")

    table = sub.add_parser("table", help="print the structure at one point")
    _add_source(table)
    table.add_argument("--point", required=True, help="comma-separated coordinates")

    sweep = sub.add_parser("sweep", help="vary one parameter over a grid")
    _add_source(sweep)
    sweep.add_argument("--param", required=True)
    sweep.add_argument("--grid", required=True, help="comma-separated values")
    sweep.add_argument("--json", help="JSON sweep path")
    sweep.add_argument("--csv", help="CSV sweep path")
    sweep.add_argument("--verbose", action="store_true")

    sub.add_parser("scenarios", help="list registered scenarios")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    sink_id = logger.add(sys.stderr, level="WARNING", format="{level}: {message}")
    try:
        if args.command == "scenarios":
            for name in ScenarioRegistry.list_scenarios():
                print(name)
            return EXIT_PASS
        try:
            config = _load_config(args)
            point = _parse_point(args.point) if args.command == "table" else None
        except GeometryError as e:
            print(f"error: {e.message}", file=sys.stderr)
            return EXIT_CONFIG

        if args.command == "verify":
            return cmd_verify(config, args.json, args.csv, args.verbose)
        if args.command == "table":
            return cmd_table(config, point)
        return cmd_sweep(config, args.param, args.grid.split(","), args.json, args.csv, args.verbose)
    finally:
        logger.remove(sink_id)


if __name__ == "__main__":
    raise SystemExit(main())
