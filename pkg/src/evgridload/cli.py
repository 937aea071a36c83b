"""Command line front end.

Exit codes: 0 success, 2 validation failure, 3 data error, 4 usage error.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from . import pipeline
from .charts import chart as render_chart
from .config import load_config, parse_classes
from .core import ConfigurationError, DataError, EvLoadError, GeoId, HourlyProfile, ScenarioKey, UsageError
from .metrics import BaLoadPair, PathwayResult, compare_pathways, metrics_row, read_system_load, write_metrics

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DATA = 3
EXIT_USAGE = 4


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose):
    """Hourly transportation charging load profiles by balancing authority."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")


@cli.command()
@click.option("--config", "config_path", required=True, help="Run configuration (YAML).")
@click.pass_context
def validate(ctx, config_path):
    """Check input schemas, allocation sums and mixes."""
    cfg = load_config(config_path)
    problems = pipeline.validate(cfg)
    for problem in problems:
        click.echo(problem)
    click.echo(f"{len(problems)} violations")
    ctx.exit(EXIT_VALIDATION if problems else EXIT_OK)


@cli.command()
@click.option("--config", "config_path", required=True, help="Run configuration (YAML).")
@click.option("--scenario", "scenarios", multiple=True, help="YEAR:PATHWAY:CLIMATE; repeatable. Defaults to the config's list.")
@click.option("--classes", default=None, help="Comma-separated subset of ldv,mhdv,nonroad.")
@click.option("--out", "out_dir", default=None, help="Output directory (overrides config and environment).")
@click.option("--seed", type=int, default=None, help="Overrides the config seed.")
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True)
def run(config_path, scenarios, classes, out_dir, seed, threads):
    """Generate profile files, metrics and a manifest."""
    cfg = load_config(config_path, seed=seed, output_dir=out_dir)
    keys = [ScenarioKey.parse(s) for s in scenarios] or cfg.scenarios
    groups = parse_classes(classes) if classes else cfg.classes
    manifest = pipeline.run(cfg, keys, groups, threads)
    click.echo(f"wrote {manifest}")


@cli.command()
@click.argument("profile_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--day-average-by-month", "by_month", is_flag=True, help="One mean day per month (default).")
@click.option("--single-day", default=None, metavar="YYYY-MM-DD", help="Plot one calendar day.")
@click.option("--column", default=None, help="Column to plot (default load_kw or total).")
@click.option("--out", "out_file", default=None, help="SVG path (default: next to the profile).")
def chart(profile_file, by_month, single_day, column, out_file):
    """Render a static SVG chart of a profile file."""
    if by_month and single_day:
        raise UsageError("choose either --day-average-by-month or --single-day")
    if out_file is None:
        suffix = f"_{single_day}" if single_day else "_by_month"
        out_file = Path(profile_file).with_name(Path(profile_file).stem + suffix + ".svg")
    click.echo(f"wrote {render_chart(profile_file, out_file, single_day, column)}")


def _load_run_dir(run_dir: Path) -> tuple[ScenarioKey, dict[str, HourlyProfile]]:
    try:
        year, pathway, climate = run_dir.name.split("_", 2)
        scenario = ScenarioKey.parse(f"{year}:{pathway}:{climate}")
    except ValueError:
        raise UsageError(f"{run_dir} is not a scenario output directory") from None
    profiles = {}
    from .charts import read_profile_file

    for path in sorted(run_dir.glob("*_combined.csv")):
        ba = path.name[: -len("_combined.csv")]
        series = read_profile_file(path, "total")
        profiles[ba] = HourlyProfile.for_year(GeoId.ba(ba), None, scenario.year, series.to_numpy())
    if not profiles:
        raise DataError(f"{run_dir}: no *_combined.csv profile files")
    return scenario, profiles


def _metrics_rows(scenario, profiles, system):
    rows = {}
    for ba, profile in profiles.items():
        if ba in system:
            rows[ba] = metrics_row(BaLoadPair(GeoId.ba(ba), profile, system[ba], scenario))
    return rows


@cli.command()
@click.option("--run-dir", required=True, type=click.Path(exists=True, file_okay=False), help="One scenario's output directory.")
@click.option("--system-load", default=None, type=click.Path(exists=True, dir_okay=False), help="BA system load CSV.")
@click.option("--out", "out_file", default=None, help="Metrics CSV (default RUN_DIR/metrics.csv).")
@click.option("--compare", "compare_dir", default=None, type=click.Path(exists=True, file_okay=False),
              help="Baseline scenario directory; prints ratios of RUN_DIR to it.")
def metrics(run_dir, system_load, out_file, compare_dir):
    """Compute M1/M2/M3 for a finished run and optionally compare pathways."""
    run_dir = Path(run_dir)
    scenario, profiles = _load_run_dir(run_dir)
    rows = None
    if system_load:
        system = read_system_load(system_load, scenario.year)
        rows = _metrics_rows(scenario, profiles, system)
        out_file = Path(out_file) if out_file else run_dir / "metrics.csv"
        write_metrics(rows.values(), out_file, f"{scenario.year}-01-01T00:00:00Z")
        click.echo(f"wrote {out_file}")
    if compare_dir:
        base_scenario, base_profiles = _load_run_dir(Path(compare_dir))
        base_rows = None
        if system_load and base_scenario.year == scenario.year:
            base_rows = _metrics_rows(base_scenario, base_profiles, system)
        report = compare_pathways(
            PathwayResult(str(base_scenario), base_profiles, base_rows),
            PathwayResult(str(scenario), profiles, rows),
        )
        click.echo(report.format(), nl=False)
    if not system_load and not compare_dir:
        raise UsageError("nothing to do: give --system-load and/or --compare")


def main(argv=None) -> int:
    try:
        code = cli.main(args=argv, prog_name="evgridload", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except (click.UsageError, UsageError) as exc:
        click.echo(f"usage error: {exc}", err=True)
        return EXIT_USAGE
    except ConfigurationError as exc:
        click.echo(f"validation error: {exc}", err=True)
        return EXIT_VALIDATION
    except (DataError, EvLoadError, OSError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    return code if isinstance(code, int) else EXIT_OK


def run_main():
    sys.exit(main())
