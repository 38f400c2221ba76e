"""Click CLI with commands: loss-sweep, spectrum, contours, estimate, calibrate, show-config."""

from __future__ import annotations

import contextlib
import logging
import math
import sys
from typing import TYPE_CHECKING

import click
from pydantic import ValidationError

from cvent.config import ConfigError, RunConfig, apply_overrides, config_hash, dump_config, load_config
from cvent.criteria import CalibrationError, duan_product, epr_crossing_loss, epr_product
from cvent.gaussian import entangled_pair
from cvent.measurement import (
    ESTIMATE_COLUMNS,
    LOSS_SWEEP_COLUMNS,
    EstimateResult,
    estimate_duan,
    estimate_epr,
    generator_identity,
    loss_sweep_experiment,
)
from cvent.protocols import contour_columns, efficacy_grid
from cvent.settings import Settings
from cvent.spectra import SPECTRUM_COLUMNS, spectrum_sweep
from cvent.utils.output import STDOUT, format_value, provenance_header, write_csv
from cvent.utils.units import variance_to_db

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_IO = 3

_CONFIG_OPTION = click.option("--config", "config_path", default=None, help="Path to run config YAML (defaults when omitted).")
_COMMON_OPTIONS = (
    _CONFIG_OPTION,
    click.option("--out", default=STDOUT, show_default=True, help="Output CSV path, '-' for stdout."),
    click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Override estimator.seed."),
    click.option("--points", type=int, default=None, help="Override the command's grid size."),
)


def common_options[F: Callable[..., None]](fn: F) -> F:
    for option in reversed(_COMMON_OPTIONS):
        fn = option(fn)
    return fn


@contextlib.contextmanager
def _exit_codes() -> Iterator[None]:
    """Configuration failures exit 2, I/O failures (ConfigFileError included) exit 3."""
    try:
        yield
    except (ConfigError, ValidationError, CalibrationError) as exc:
        click.echo(f"config error: {exc}", err=True)
        raise SystemExit(EXIT_CONFIG) from exc
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        raise SystemExit(EXIT_IO) from exc


def _resolve(config_path: str | None, **overrides: int | None) -> RunConfig:
    cfg = apply_overrides(load_config(config_path), **overrides)
    logger.debug("cli.config_resolved hash=%s path=%s", config_hash(cfg), config_path)
    return cfg


def _header(cfg: RunConfig) -> str:
    return provenance_header(config_hash(cfg), generator_identity(cfg.estimator))


def _workers(ctx: click.Context) -> int:
    return ctx.obj["settings"].workers


@click.group()
@click.option("--log-level", default=None, help="Override CVENT_LOG_LEVEL.")
@click.version_option(package_name="cvent")
@click.pass_context
def cli(ctx: click.Context, log_level: str | None) -> None:
    """cvent: quadrature entanglement from two squeezed beams."""
    ctx.ensure_object(dict)
    settings = Settings()
    logging.basicConfig(
        level=(log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
    )
    ctx.obj["settings"] = settings


@cli.command("loss-sweep")
@common_options
@click.pass_context
def loss_sweep(ctx: click.Context, config_path: str | None, out: str, seed: int | None, points: int | None) -> None:
    """EPR and Duan products, estimated and analytic, against total loss."""
    with _exit_codes():
        cfg = _resolve(config_path, seed=seed, loss_points=points)
        rows = loss_sweep_experiment(cfg.source_spec(), cfg.efficiency, cfg.grids.loss.losses(), cfg.estimator, _workers(ctx))
        write_csv(out, _header(cfg), LOSS_SWEEP_COLUMNS, [r.as_row() for r in rows])


@cli.command("spectrum")
@common_options
@click.pass_context
def spectrum(ctx: click.Context, config_path: str | None, out: str, seed: int | None, points: int | None) -> None:
    """Joint-quadrature variances and photon coordinates across sideband frequency."""
    with _exit_codes():
        cfg = _resolve(config_path, seed=seed, frequency_points=points)
        rows = spectrum_sweep(cfg.spectrum, cfg.grids.frequency, _workers(ctx))
        write_csv(out, _header(cfg), SPECTRUM_COLUMNS, [r.as_row() for r in rows])


@cli.command("contours")
@common_options
@click.pass_context
def contours(ctx: click.Context, config_path: str | None, out: str, seed: int | None, points: int | None) -> None:
    """Protocol efficacies over the (n_min, n_excess) plane; infeasible points are NA."""
    with _exit_codes():
        cfg = _resolve(config_path, seed=seed, contour_resolution=points)
        grid = cfg.grids.contour
        rows = efficacy_grid(grid.nmin_range, grid.nexcess_range, grid.resolution, cfg.budgets, _workers(ctx))
        write_csv(out, _header(cfg), contour_columns(cfg.budgets), [r.as_row() for r in rows])


def _estimate_rows(criterion: str, result: EstimateResult) -> list[tuple[str | int | float | None, ...]]:
    rows: list[tuple[str | int | float | None, ...]] = [
        (criterion, t.trace, t.plus, t.minus, t.value, None, None) for t in result.traces
    ]
    rows.append((criterion, "all", result.plus, result.minus, result.value, result.stderr, result.raw_value))
    return rows


@cli.command("estimate")
@common_options
@click.pass_context
def estimate(ctx: click.Context, config_path: str | None, out: str, seed: int | None, points: int | None) -> None:
    """Monte-Carlo estimates of both criteria; per-trace rows plus one aggregate row each.

    ``--points`` overrides the points per trace. The summary line goes to stderr.
    """
    with _exit_codes():
        cfg = _resolve(config_path, seed=seed, points_per_trace=points)
        cm = entangled_pair(cfg.source_spec(), cfg.efficiency)
        duan = estimate_duan(cm, cfg.estimator, _workers(ctx))
        epr = estimate_epr(cm, cfg.estimator, _workers(ctx))
        write_csv(out, _header(cfg), ESTIMATE_COLUMNS, _estimate_rows("duan", duan) + _estimate_rows("epr", epr))
    click.echo(
        f"duan={format_value(duan.value)}±{format_value(duan.stderr)} "
        f"epr={format_value(epr.value)}±{format_value(epr.stderr)} seed={cfg.estimator.seed}",
        err=True,
    )


@cli.command("calibrate")
@_CONFIG_OPTION
def calibrate(config_path: str | None) -> None:
    """Fit the source to the calibration targets and print the model's criteria."""
    with _exit_codes():
        cfg = _resolve(config_path)
        spec = cfg.source_spec()
    cm = entangled_pair(spec, cfg.efficiency)
    epr = epr_product(cm)
    crossing = epr_crossing_loss(spec)
    report = {
        "squeezed_variance": spec.squeezed_variance,
        "anti_variance": spec.anti_variance,
        "squeezing_db": variance_to_db(spec.squeezed_variance),
        "efficiency": cfg.efficiency,
        "duan_product": duan_product(cm).product,
        "epr_product": epr.product,
        "cv_plus": epr.cv_plus,
        "cv_minus": epr.cv_minus,
        "epr_crossing_loss": math.nan if crossing is None else crossing,
    }
    for key, value in report.items():
        click.echo(f"{key}={format_value(value)}")


@cli.command("show-config")
@_CONFIG_OPTION
def show_config(config_path: str | None) -> None:
    """Print the resolved configuration as YAML."""
    with _exit_codes():
        cfg = _resolve(config_path)
    click.echo(dump_config(cfg), nl=False)
