"""Monte-Carlo emulation of the homodyne estimation chain.

Quadrature samples are drawn from a covariance matrix, detector darknoise is
added, and the criteria are estimated trace by trace the way a zero-span
spectrum-analyzer readout would: block variances, shot-noise normalisation,
linear darknoise subtraction and post-processed gain optimisation.

Every trace draws from its own counter-based substream,
``Philox(SeedSequence(seed, spawn_key=(trace,)))``, so results depend only on
(seed, trace) and not on how traces are scheduled.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from typing import TYPE_CHECKING, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cvent.criteria import duan_product, epr_product, optimal_gain, residual_variance
from cvent.gaussian import entangled_pair, quadrature_index
from cvent.utils.parallel import ordered_map

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from numpy.typing import NDArray

    from cvent.gaussian import CovarianceMatrix, Quadrature, SqueezerSpec

logger = logging.getLogger(__name__)

DARKNOISE_FLOOR_DB = 4.5
GainMode = Literal["unbiased", "dark_biased"]
_QUADRATURES: tuple[Quadrature, Quadrature] = ("+", "-")

LOSS_SWEEP_COLUMNS = (
    "loss",
    "total_efficiency",
    "epr_estimate",
    "epr_stderr",
    "epr_analytic",
    "duan_estimate",
    "duan_stderr",
    "duan_analytic",
)
ESTIMATE_COLUMNS = ("criterion", "trace", "plus", "minus", "value", "stderr", "raw_value")


class SamplingError(ValueError):
    """Covariance matrix cannot be factorised for sampling."""


class EstimatorConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    traces: int = Field(default=10, ge=1)
    points_per_trace: int = Field(default=400, ge=2)
    seed: int = Field(default=0, ge=0, lt=2**64)
    darknoise_rel: float = Field(default=0.0, ge=0)
    gain_mode: GainMode = "unbiased"
    generator: Literal["philox"] = "philox"


class LossGrid(BaseModel):
    """Total-loss points on the half-open interval [start, stop)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    start: float = Field(default=0.0, ge=0, lt=1)
    stop: float = Field(default=1.0, gt=0, le=1)
    points: int = Field(default=101, ge=1)

    @model_validator(mode="after")
    def _check_order(self) -> LossGrid:
        if self.start >= self.stop:
            raise ValueError("start must be below stop")
        return self

    def losses(self) -> list[float]:
        return [float(x) for x in np.linspace(self.start, self.stop, self.points, endpoint=False)]


@dataclasses.dataclass(frozen=True)
class TraceEstimate:
    trace: int
    plus: float
    minus: float
    value: float


@dataclasses.dataclass(frozen=True)
class EstimateResult:
    """Trace-averaged criterion estimate.

    ``value`` is the criterion evaluated on the trace-averaged ``plus`` and
    ``minus``; ``stderr`` propagates the trace-to-trace spread of those two
    averages through the same expression. Both are NaN when undefined: a
    single trace, or a Duan variance left non-positive by darknoise subtraction.
    """

    value: float
    stderr: float
    raw_value: float
    plus: float
    minus: float
    traces: tuple[TraceEstimate, ...]


@dataclasses.dataclass(frozen=True)
class LossSweepRow:
    loss: float
    total_efficiency: float
    epr: EstimateResult
    epr_analytic: float
    duan: EstimateResult
    duan_analytic: float
    # plate loss on top of the intrinsic efficiency; None below the intrinsic loss
    added_loss: float | None = None

    def as_row(self) -> tuple[float, ...]:
        return (
            self.loss,
            self.total_efficiency,
            self.epr.value,
            self.epr.stderr,
            self.epr_analytic,
            self.duan.value,
            self.duan.stderr,
            self.duan_analytic,
        )


# -- sampling ------------------------------------------------------------------------


def trace_generator(seed: int, trace: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(trace,))))


def generator_identity(config: EstimatorConfig) -> str:
    """Recorded in output headers; equal identities reproduce equal sample streams."""
    return f"numpy-{np.__version__}/{config.generator}/seedsequence-spawn"


def _cholesky(cm: CovarianceMatrix) -> NDArray[np.float64]:
    try:
        return np.linalg.cholesky(cm.entries)
    except np.linalg.LinAlgError as exc:
        raise SamplingError("covariance matrix is not positive definite") from exc


def _draw(factor: NDArray[np.float64], n: int, rng: np.random.Generator) -> NDArray[np.float64]:
    return rng.standard_normal((n, factor.shape[0])) @ factor.T


def sample_quadratures(cm: CovarianceMatrix, n: int, seed: int, *, trace: int = 0) -> NDArray[np.float64]:
    """``n`` zero-mean samples of the quadrature vector, one per row."""
    if n < 1:
        raise ValueError(f"sample count must be positive, got {n}")
    return _draw(_cholesky(cm), n, trace_generator(seed, trace))


def _trace_samples(factor: NDArray[np.float64], config: EstimatorConfig, trace: int) -> NDArray[np.float64]:
    rng = trace_generator(config.seed, trace)
    samples = _draw(factor, config.points_per_trace, rng)
    if config.darknoise_rel > 0:
        samples += math.sqrt(config.darknoise_rel) * rng.standard_normal(samples.shape)
    return samples


def _smallest_joint_variance(cm: CovarianceMatrix) -> float:
    """Smallest of the unity-gain sum and difference variances over both quadratures."""
    return min((cm.variance("x", q) + cm.variance("y", q)) / 2 - abs(cm.covariance(q)) for q in _QUADRATURES)


def _check_darknoise(cm: CovarianceMatrix, config: EstimatorConfig) -> None:
    # the joint variance carries darknoise_rel of dark once normalised to two-beam shot noise
    if config.darknoise_rel <= 0:
        return
    margin_db = 10 * math.log10(_smallest_joint_variance(cm) / config.darknoise_rel)
    if margin_db < DARKNOISE_FLOOR_DB:
        logger.warning("measurement.darknoise_margin_low margin_db=%.2f floor_db=%.1f", margin_db, DARKNOISE_FLOOR_DB)


def _per_trace[T](
    cm: CovarianceMatrix,
    config: EstimatorConfig,
    fn: Callable[[NDArray[np.float64]], T],
    workers: int,
) -> list[T]:
    cm.require_modes(2)
    _check_darknoise(cm, config)
    factor = _cholesky(cm)
    return ordered_map(lambda t: fn(_trace_samples(factor, config, t)), range(config.traces), workers=workers)


def _propagated_stderr(plus: NDArray[np.float64], minus: NDArray[np.float64], gradient: tuple[float, float]) -> float:
    """Standard error of f(mean plus, mean minus), linearised around the means."""
    if plus.size < 2 or not all(math.isfinite(g) for g in gradient):
        return math.nan
    g = np.asarray(gradient)
    variance = float(g @ np.cov(np.vstack([plus, minus]), ddof=1) @ g) / plus.size
    return math.sqrt(max(variance, 0.0))


def _duan_value(plus: float, minus: float) -> float:
    if plus > 0 and minus > 0:
        return math.sqrt(plus * minus)
    return math.nan


# -- inseparability ------------------------------------------------------------------------


def _joint_variances(samples: NDArray[np.float64], quadrature: Quadrature) -> tuple[float, float]:
    """Unity-gain sum and difference variances, normalised to two-beam shot noise."""
    x = samples[:, quadrature_index("x", quadrature)]
    y = samples[:, quadrature_index("y", quadrature)]
    return float(np.var(x + y, ddof=1) / 2), float(np.var(x - y, ddof=1) / 2)


def estimate_duan(cm: CovarianceMatrix, config: EstimatorConfig, workers: int = 1) -> EstimateResult:
    """Duan product from trace-averaged joint-quadrature variances.

    The sum or difference is chosen per quadrature by the smaller trace mean;
    darknoise is subtracted from the means (corrected = raw − dark). A trace or
    aggregate whose corrected variance is not positive gets a NaN product.
    """
    per_trace = _per_trace(cm, config, lambda s: tuple(_joint_variances(s, q) for q in _QUADRATURES), workers)
    dark = config.darknoise_rel
    chosen: list[NDArray[np.float64]] = []
    for q in range(2):
        by_sign = np.array([trace[q] for trace in per_trace])
        means = by_sign.mean(axis=0)
        chosen.append(by_sign[:, int(np.argmin(means))] - dark)
    plus, minus = float(chosen[0].mean()), float(chosen[1].mean())
    value = _duan_value(plus, minus)
    if math.isnan(value):
        logger.warning("measurement.duan_undefined plus=%.6g minus=%.6g darknoise_rel=%.6g", plus, minus, dark)
        gradient = (math.nan, math.nan)
    else:
        gradient = (value / (2 * plus), value / (2 * minus))

    traces = tuple(
        TraceEstimate(trace=t, plus=float(tp), minus=float(tm), value=_duan_value(float(tp), float(tm)))
        for t, (tp, tm) in enumerate(zip(chosen[0], chosen[1], strict=True))
    )
    return EstimateResult(
        value=value,
        stderr=_propagated_stderr(chosen[0], chosen[1], gradient),
        raw_value=math.sqrt((plus + dark) * (minus + dark)),
        plus=plus,
        minus=minus,
        traces=traces,
    )


# -- EPR -------------------------------------------------------------------------------------


def _conditional_pair(samples: NDArray[np.float64], quadrature: Quadrature, dark: float, gain_mode: GainMode) -> tuple[float, float]:
    """(corrected, raw) conditional variance of beam x given beam y for one trace.

    Both are rescaled by (n−1)/(n−2), the residual having lost one more degree
    of freedom to the fitted gain.
    """
    x = samples[:, quadrature_index("x", quadrature)]
    y = samples[:, quadrature_index("y", quadrature)]
    n = x.size
    cov_xy = np.cov(x, y, ddof=1)
    vx, vy, c = float(cov_xy[0, 0]), float(cov_xy[1, 1]), float(cov_xy[0, 1])
    scale = (n - 1) / (n - 2) if n > 2 else 1.0
    # dark_biased fits the gain on dark-inclusive statistics
    conditioner = vy if gain_mode == "dark_biased" else vy - dark
    gain = optimal_gain(c, conditioner)
    corrected = residual_variance(vx - dark, c, vy - dark, gain) * scale
    raw = residual_variance(vx, c, vy, optimal_gain(c, vy)) * scale
    return corrected, raw


def estimate_epr(cm: CovarianceMatrix, config: EstimatorConfig, workers: int = 1) -> EstimateResult:
    """EPR product from per-trace conditional variances with a post-processed gain."""
    dark, mode = config.darknoise_rel, config.gain_mode
    per_trace = _per_trace(
        cm,
        config,
        lambda s: (_conditional_pair(s, "+", dark, mode), _conditional_pair(s, "-", dark, mode)),
        workers,
    )
    corrected = np.array([[p[0], m[0]] for p, m in per_trace])
    raw = np.array([[p[1], m[1]] for p, m in per_trace])
    plus, minus = (float(v) for v in corrected.mean(axis=0))
    raw_plus, raw_minus = (float(v) for v in raw.mean(axis=0))
    traces = tuple(
        TraceEstimate(trace=t, plus=float(cp), minus=float(cmn), value=float(cp * cmn)) for t, (cp, cmn) in enumerate(corrected)
    )
    return EstimateResult(
        value=plus * minus,
        stderr=_propagated_stderr(corrected[:, 0], corrected[:, 1], (minus, plus)),
        raw_value=raw_plus * raw_minus,
        plus=plus,
        minus=minus,
        traces=traces,
    )


# -- loss sweep ---------------------------------------------------------------------------------


def loss_sweep_point(
    spec: SqueezerSpec,
    loss: float,
    config: EstimatorConfig,
    workers: int = 1,
    *,
    eta0: float = 1.0,
) -> LossSweepRow:
    if not 0 <= loss < 1:
        raise ValueError(f"loss must be in [0, 1), got {loss}")
    if not 0 < eta0 <= 1:
        raise ValueError(f"eta0 must be in (0, 1], got {eta0}")
    eta = 1 - loss
    cm = entangled_pair(spec, eta)
    return LossSweepRow(
        loss=loss,
        total_efficiency=eta,
        epr=estimate_epr(cm, config, workers),
        epr_analytic=epr_product(cm).product,
        duan=estimate_duan(cm, config, workers),
        duan_analytic=duan_product(cm).product,
        added_loss=1 - eta / eta0 if eta <= eta0 else None,
    )


def loss_sweep_experiment(
    spec: SqueezerSpec,
    eta0: float,
    loss_points: Sequence[float],
    config: EstimatorConfig,
    workers: int = 1,
) -> list[LossSweepRow]:
    """Both criteria, estimated and analytic, against total symmetric loss.

    ``eta0`` is the intrinsic efficiency of the setup; rows below ``1 − eta0``
    total loss are not reachable by adding loss plates and are logged.
    Every row reuses the configured seed.
    """
    losses = sorted(loss_points)
    unreachable = sum(loss < 1 - eta0 for loss in losses)
    logger.info("loss_sweep.started points=%d eta0=%g unreachable=%d", len(losses), eta0, unreachable)
    rows = [loss_sweep_point(spec, loss, config, workers, eta0=eta0) for loss in losses]
    logger.info("loss_sweep.complete rows=%d", len(rows))
    return rows
