"""Protocol efficacies over the photon-number plane.

A point (n_min, n_excess) is realised by the canonical family: a pure two-mode
squeezed state with Duan variance d0 plus isotropic excess noise u on all four
quadratures. Each point is then scored by its EPR product, unity-gain
teleportation fidelity and dense-coding capacity relative to a squeezed-state
channel carrying the same photon budget.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import optimize

from cvent.criteria import PhotonCoordinates, duan_product, epr_product
from cvent.gaussian import CovarianceMatrix, photon_number, require_physical
from cvent.utils.parallel import ordered_map

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import NDArray

logger = logging.getLogger(__name__)

_NEGATIVE_TOL = 1e-12
_D0_XTOL = 1e-15


class InfeasibleCoordinatesError(ValueError):
    """Photon coordinates have no state in the canonical family."""


class PhotonBudget(BaseModel):
    """Mean photons per bandwidth per time available in the transmitted beam."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_max: float = Field(gt=0)


class ContourGrid(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    nmin_start: float = 0.0
    nmin_stop: float = 1.5
    nexcess_start: float = 0.0
    nexcess_stop: float = 5.0
    resolution: int = Field(default=50, ge=2)

    @model_validator(mode="after")
    def _check_ranges(self) -> ContourGrid:
        if self.nmin_start >= self.nmin_stop:
            raise ValueError("nmin_start must be below nmin_stop")
        if self.nexcess_start >= self.nexcess_stop:
            raise ValueError("nexcess_start must be below nexcess_stop")
        return self

    @property
    def nmin_range(self) -> tuple[float, float]:
        return (self.nmin_start, self.nmin_stop)

    @property
    def nexcess_range(self) -> tuple[float, float]:
        return (self.nexcess_start, self.nexcess_stop)


@dataclasses.dataclass(frozen=True)
class CanonicalFamilyState:
    d0: float
    u: float
    cm: CovarianceMatrix


@dataclasses.dataclass(frozen=True)
class EfficacyRow:
    """One grid point; ``None`` marks an infeasible point."""

    n_min: float
    n_excess: float
    epr: float | None
    fidelity: float | None
    ratios: tuple[float | None, ...]

    @property
    def feasible(self) -> bool:
        return self.epr is not None

    def as_row(self) -> tuple[float | None, ...]:
        return (self.n_min, self.n_excess, self.epr, self.fidelity, *self.ratios)


def contour_columns(budgets: Sequence[PhotonBudget]) -> tuple[str, ...]:
    return ("n_min", "n_excess", "epr", "fidelity", *(f"ratio_b{i}" for i in range(1, len(budgets) + 1)))


# -- canonical family --------------------------------------------------------------


def canonical_cm(d0: float, u: float) -> CovarianceMatrix:
    """Pure two-mode squeezed state of Duan variance ``d0`` plus excess ``u`` on every quadrature."""
    if not 0 < d0 <= 1:
        raise ValueError(f"d0 must be in (0, 1], got {d0}")
    if u < 0:
        raise ValueError(f"excess noise must be non-negative, got {u}")
    v = (d0 + 1 / d0) / 2 + u
    c = (1 / d0 - d0) / 2
    return CovarianceMatrix(
        np.array(
            [
                [v, 0.0, -c, 0.0],
                [0.0, v, 0.0, c],
                [-c, 0.0, v, 0.0],
                [0.0, c, 0.0, v],
            ]
        )
    )


def duan_for_n_min(nm: float) -> float:
    """Inverse of n_min on (0, 1]: the Duan product D with (D + 1/D)/2 − 1 = nm."""
    k = 1 + nm
    return 1 / (k + math.sqrt(k * k - 1))


def canonical_state(coords: PhotonCoordinates) -> CanonicalFamilyState:
    """Place photon coordinates in the canonical family.

    n_min fixes D = d0 + u. Photon accounting then leaves one equation in d0,
    (1/d0 − d0)/2 = n_min + n_excess + 1 − D, whose left side falls monotonically
    on (0, D]; it is solved by bisection.
    """
    nm, ne = coords.n_min, coords.n_excess
    if nm < -_NEGATIVE_TOL or ne < -_NEGATIVE_TOL:
        raise InfeasibleCoordinatesError(f"photon coordinates must be non-negative, got n_min={nm} n_excess={ne}")
    nm, ne = max(nm, 0.0), max(ne, 0.0)
    big_d = duan_for_n_min(nm)
    rhs = nm + ne + 1 - big_d

    def residual(d: float) -> float:
        return (1 / d - d) / 2 - rhs

    # residual(D) is exactly −n_excess; once rounding erases that, the state is pure
    if ne == 0 or residual(big_d) >= 0:
        return CanonicalFamilyState(d0=big_d, u=0.0, cm=canonical_cm(big_d, 0.0))

    lo = 1 / (2 * rhs + 2)
    d0 = float(optimize.bisect(residual, lo, big_d, xtol=_D0_XTOL))
    if not 0 < d0 <= 1:
        raise InfeasibleCoordinatesError(f"no canonical state for n_min={nm} n_excess={ne}: d0={d0}")
    u = max(big_d - d0, 0.0)
    return CanonicalFamilyState(d0=d0, u=u, cm=canonical_cm(d0, u))


# -- protocols ------------------------------------------------------------------------


def teleportation_fidelity(cm: CovarianceMatrix) -> float:
    """Unity-gain coherent-state teleportation fidelity; 1/2 is the classical limit."""
    require_physical(cm)
    duan = duan_product(cm)
    return 1 / math.sqrt((1 + duan.v_plus) * (1 + duan.v_minus))


def water_fill(noise: Sequence[float], total_power: float) -> tuple[NDArray[np.float64], float]:
    """Capacity-optimal power split over parallel Gaussian channels.

    Returns ``(powers, level)``: every used channel is filled up to the common
    level, channels whose noise is above it get nothing.
    """
    n = np.asarray(noise, dtype=np.float64)
    if n.size == 0 or np.any(n <= 0):
        raise ValueError("channel noise variances must be positive")
    if total_power < 0:
        raise ValueError(f"total power must be non-negative, got {total_power}")
    order = np.argsort(n)
    sorted_noise = n[order]
    active = n.size
    level = (total_power + sorted_noise[:active].sum()) / active
    # drop the noisiest channel until the level clears every active one
    while active > 1 and level <= sorted_noise[active - 1]:
        active -= 1
        level = (total_power + sorted_noise[:active].sum()) / active
    powers = np.zeros(n.size)
    powers[order[:active]] = np.maximum(level - sorted_noise[:active], 0.0)
    return powers, float(level)


def shannon_capacity(signal: Sequence[float], noise: Sequence[float]) -> float:
    return float(sum(0.5 * math.log2(1 + p / nv) for p, nv in zip(signal, noise, strict=True)))


def densecoding_capacity(cm: CovarianceMatrix, budget: PhotonBudget) -> float:
    """Bits per use when both quadratures of beam x carry signal and a joint measurement decodes them.

    The joint measurement adds noise 2v± per quadrature. Signal photons are
    what the budget leaves after the entangled beam's own photons.
    """
    require_physical(cm)
    n_signal = budget.n_max - photon_number(cm, "x")
    if n_signal <= 0:
        return 0.0
    duan = duan_product(cm)
    noise = (2 * duan.v_plus, 2 * duan.v_minus)
    powers, _ = water_fill(noise, 4 * n_signal)
    return shannon_capacity(powers, noise)


def squeezed_channel_capacity(budget: PhotonBudget) -> float:
    return math.log2(1 + 2 * budget.n_max)


def densecoding_ratio(cm: CovarianceMatrix, budget: PhotonBudget) -> float:
    return densecoding_capacity(cm, budget) / squeezed_channel_capacity(budget)


def efficacy_point(n_min: float, n_excess: float, budgets: Sequence[PhotonBudget]) -> EfficacyRow:
    try:
        state = canonical_state(PhotonCoordinates.from_parts(n_min, n_excess))
    except InfeasibleCoordinatesError as exc:
        logger.debug("contours.infeasible n_min=%g n_excess=%g error=%s", n_min, n_excess, exc)
        return EfficacyRow(n_min=n_min, n_excess=n_excess, epr=None, fidelity=None, ratios=(None,) * len(budgets))
    return EfficacyRow(
        n_min=n_min,
        n_excess=n_excess,
        epr=epr_product(state.cm).product,
        fidelity=teleportation_fidelity(state.cm),
        ratios=tuple(densecoding_ratio(state.cm, b) for b in budgets),
    )


def efficacy_grid(
    nmin_range: tuple[float, float],
    nexcess_range: tuple[float, float],
    resolution: int | tuple[int, int],
    budgets: Sequence[PhotonBudget],
    workers: int = 1,
) -> list[EfficacyRow]:
    """Efficacies on a regular grid, n_min-major then n_excess."""
    res_min, res_excess = (resolution, resolution) if isinstance(resolution, int) else resolution
    if res_min < 2 or res_excess < 2:
        raise ValueError(f"resolution must be at least 2 per axis, got {resolution}")
    points = [
        (float(nm), float(ne))
        for nm in np.linspace(*nmin_range, res_min)
        for ne in np.linspace(*nexcess_range, res_excess)
    ]
    logger.info("contours.grid_started points=%d budgets=%d", len(points), len(budgets))
    rows = ordered_map(lambda p: efficacy_point(p[0], p[1], budgets), points, workers=workers)
    infeasible = sum(not r.feasible for r in rows)
    logger.info("contours.grid_complete rows=%d infeasible=%d", len(rows), infeasible)
    return rows