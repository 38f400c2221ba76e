"""Frequency-dependent source model: OPA bandwidth roll-off plus laser relaxation-oscillation noise.

Each sideband frequency is an independent two-beam Gaussian state. Both line
shapes are Lorentzian; the parameters are illustrative defaults, not values
fitted to a measurement.
"""

from __future__ import annotations

import dataclasses
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cvent.criteria import duan_product, photon_coordinates
from cvent.gaussian import (
    CovarianceMatrix,
    LossChannel,
    SqueezerSpec,
    add_noise,
    apply_loss,
    entangle,
    squeezed_state,
)
from cvent.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

SPECTRUM_COLUMNS = ("freq_hz", "v_plus", "v_minus", "duan_product", "n_min", "n_excess", "n_total")


class SourceSpectrumModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    s0: float = Field(default=0.28, gt=0, le=1)
    f_opa: float = Field(default=15e6, gt=0)
    relax_amp: float = Field(default=3.0, ge=0)
    f_relax: float = Field(default=1e6, ge=0)
    relax_width: float = Field(default=1e6, gt=0)
    eta: float = Field(default=0.85, ge=0, le=1)


class FrequencyGrid(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    f_start: float = Field(default=2.5e6, gt=0)
    f_stop: float = Field(default=10e6, gt=0)
    points: int = Field(default=76, ge=2)

    @model_validator(mode="after")
    def _check_order(self) -> FrequencyGrid:
        if self.f_start >= self.f_stop:
            raise ValueError("f_start must be below f_stop")
        return self

    def frequencies(self) -> list[float]:
        return [float(f) for f in np.linspace(self.f_start, self.f_stop, self.points)]


@dataclasses.dataclass(frozen=True)
class SpectrumRow:
    freq_hz: float
    v_plus: float
    v_minus: float
    duan_product: float
    n_min: float
    n_excess: float
    n_total: float

    def as_row(self) -> tuple[float, ...]:
        return dataclasses.astuple(self)


def _check_frequency(f: float) -> None:
    if not (f >= 0 and math.isfinite(f)):
        raise ValueError(f"frequency must be finite and non-negative, got {f}")


def opa_roll_off(model: SourceSpectrumModel, f: float) -> float:
    """Lorentzian OPA transfer, 1 at zero frequency."""
    return 1 / (1 + (f / model.f_opa) ** 2)


def relaxation_excess(model: SourceSpectrumModel, f: float) -> float:
    """Excess amplitude-quadrature noise from the laser relaxation oscillation, shot-noise units."""
    return model.relax_amp / (1 + ((f - model.f_relax) / model.relax_width) ** 2)


def squeezed_variance_at(model: SourceSpectrumModel, f: float) -> float:
    return 1 - (1 - model.s0) * opa_roll_off(model, f)


def source_at(model: SourceSpectrumModel, f: float) -> SqueezerSpec:
    """Source at sideband ``f``: pure OPA output with the relaxation excess on its anti-squeezed quadrature."""
    _check_frequency(f)
    s = squeezed_variance_at(model, f)
    return SqueezerSpec(squeezed_variance=s, anti_variance=1 / s + relaxation_excess(model, f))


def state_at(model: SourceSpectrumModel, f: float) -> CovarianceMatrix:
    """Two sources → π/2 beamsplitter → loss, at one sideband frequency.

    The relaxation excess sits on the lab amplitude quadrature of both inputs.
    Source 2 is rotated by π/2, so its anti-squeezed quadrature becomes the lab
    amplitude quadrature; source 1 gets the excess on its squeezed quadrature.
    """
    spec = source_at(model, f)
    excess = relaxation_excess(model, f)
    s = spec.squeezed_variance
    first = add_noise(squeezed_state(SqueezerSpec(squeezed_variance=s, anti_variance=1 / s)), [excess, 0.0])
    second = squeezed_state(spec)
    return apply_loss(entangle(first, second, math.pi / 2), LossChannel.symmetric(model.eta))


def spectrum_point(model: SourceSpectrumModel, f: float) -> SpectrumRow:
    cm = state_at(model, f)
    duan = duan_product(cm)
    coords = photon_coordinates(cm)
    return SpectrumRow(
        freq_hz=f,
        v_plus=duan.v_plus,
        v_minus=duan.v_minus,
        duan_product=duan.product,
        n_min=coords.n_min,
        n_excess=coords.n_excess,
        n_total=coords.n_total,
    )


def spectrum_sweep(model: SourceSpectrumModel, grid: FrequencyGrid, workers: int = 1) -> list[SpectrumRow]:
    freqs = grid.frequencies()
    logger.info("spectrum.sweep_started points=%d f_start=%g f_stop=%g", len(freqs), grid.f_start, grid.f_stop)
    rows = ordered_map(lambda f: spectrum_point(model, f), freqs, workers=workers)
    logger.info("spectrum.sweep_complete rows=%d", len(rows))
    return rows
