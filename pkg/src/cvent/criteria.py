"""EPR and inseparability criteria, photon-number coordinates and calibration.

Every quantity is read from a two-beam :class:`~cvent.gaussian.CovarianceMatrix`.
The closed forms for symmetric pure sources under equal loss on both beams are
kept alongside as cross-checks.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import sys

from scipy import optimize

from cvent.gaussian import (
    Beam,
    CovarianceMatrix,
    Quadrature,
    SqueezerSpec,
    entangled_pair,
    other_beam,
    quadrature_index,
)

logger = logging.getLogger(__name__)

_CALIBRATION_XTOL = 1e-10
_CALIBRATION_MAX_ANTI = 1e12
_PURE_MATCH_RTOL = 1e-12
_EXCESS_ROUNDING = 4 * sys.float_info.epsilon


class DegenerateConditionerError(ValueError):
    """Conditioning beam has no variance to infer from."""


class CalibrationError(ValueError):
    """Requested criterion values cannot be reached by a physical source."""


@dataclasses.dataclass(frozen=True)
class GainPair:
    g_plus: float
    g_minus: float


@dataclasses.dataclass(frozen=True)
class EprResult:
    """Conditional variances of beam x inferred from beam y, one per quadrature."""

    cv_plus: float
    cv_minus: float
    product: float
    gains: GainPair
    var_plus: float
    var_minus: float

    @property
    def satisfied(self) -> bool:
        return self.product < 1


@dataclasses.dataclass(frozen=True)
class DuanResult:
    """Joint-quadrature variances Δ²X±ₓ±ᵧ with the sign that minimised each.

    ``sign_plus = +1`` means the sum X⁺ₓ + X⁺ᵧ was used, ``-1`` the difference.
    """

    v_plus: float
    v_minus: float
    product: float
    sum: float
    a_param: float
    sign_plus: int
    sign_minus: int

    @property
    def satisfied(self) -> bool:
        return self.product < 1


@dataclasses.dataclass(frozen=True)
class DuanGeneralResult:
    lhs: float
    rhs: float
    a_param: float
    sign_plus: int
    sign_minus: int

    @property
    def satisfied(self) -> bool:
        return self.lhs < self.rhs


@dataclasses.dataclass(frozen=True)
class PhotonCoordinates:
    """Mean sideband photons of both beams split into the entanglement share and the excess."""

    n_min: float
    n_excess: float
    n_total: float

    @classmethod
    def from_parts(cls, n_min: float, n_excess: float) -> PhotonCoordinates:
        return cls(n_min=n_min, n_excess=n_excess, n_total=n_min + n_excess)


# -- conditional variances -----------------------------------------------------


def optimal_gain(cov: float, var_conditioner: float) -> float:
    if not var_conditioner > 0:
        raise DegenerateConditionerError(f"conditioning variance must be positive, got {var_conditioner}")
    return cov / var_conditioner


def residual_variance(var_target: float, cov: float, var_conditioner: float, gain: float) -> float:
    """⟨(δX_t − g δX_c)²⟩ for an arbitrary gain g."""
    return var_target - 2 * gain * cov + gain * gain * var_conditioner


def conditional_variance(cm: CovarianceMatrix, quadrature: Quadrature, inferred: Beam = "x") -> tuple[float, float]:
    """Variance of ``inferred``'s quadrature left after the optimal linear estimate from the other beam.

    Returns ``(variance, gain)`` with gain = Cov / Var(conditioner).
    """
    conditioner = other_beam(inferred)
    i = quadrature_index(inferred, quadrature)
    j = quadrature_index(conditioner, quadrature)
    m = cm.entries
    var_t, var_c, cov = float(m[i, i]), float(m[j, j]), float(m[i, j])
    gain = optimal_gain(cov, var_c)
    return var_t - cov * cov / var_c, gain


def epr_product(cm: CovarianceMatrix, inferred: Beam = "x") -> EprResult:
    cm.require_modes(2)
    cv_plus, g_plus = conditional_variance(cm, "+", inferred)
    cv_minus, g_minus = conditional_variance(cm, "-", inferred)
    return EprResult(
        cv_plus=cv_plus,
        cv_minus=cv_minus,
        product=cv_plus * cv_minus,
        gains=GainPair(g_plus=g_plus, g_minus=g_minus),
        var_plus=cm.variance(inferred, "+"),
        var_minus=cm.variance(inferred, "-"),
    )


def _check_closed_form_domain(s: float, eta: float) -> None:
    if not 0 < s <= 1:
        raise ValueError(f"squeezed variance must be in (0, 1], got {s}")
    if not 0 <= eta <= 1:
        raise ValueError(f"efficiency must be in [0, 1], got {eta}")


def epr_closed_form(s: float, eta: float) -> float:
    """EPR product of two pure sources of squeezed variance ``s`` entangled then lossy with efficiency ``eta``."""
    _check_closed_form_domain(s, eta)
    return 4 * (1 - eta + (2 * eta - 1) / (eta * (s + 1 / s - 2) + 2)) ** 2


def epr_crossing_loss(spec: SqueezerSpec) -> float | None:
    """Total symmetric loss at which the EPR product of the entangled pair reaches 1.

    None when the product never drops below 1 at any efficiency.
    """
    s, a = spec.squeezed_variance, spec.anti_variance
    if s >= 1 or a <= 1:
        return None
    eta_star = (s + a - 2) / (2 * (1 - s) * (a - 1))
    if not 0 < eta_star < 1:
        return None
    return 1 - eta_star


# -- inseparability --------------------------------------------------------------


def _minimising_sign(cov: float) -> int:
    return -1 if cov > 0 else 1


def duan_general(cm: CovarianceMatrix, a: float) -> DuanGeneralResult:
    """Sum criterion with adjustable parameter ``a``; the sign in each quadrature is minimised over."""
    cm.require_modes(2)
    if a == 0:
        raise ValueError("adjustable parameter a must be non-zero")
    lhs = 0.0
    signs: list[int] = []
    for quadrature in ("+", "-"):
        vx, vy = cm.variance("x", quadrature), cm.variance("y", quadrature)
        cov = cm.covariance(quadrature)
        # ⟨(|a|Xₓ + σXᵧ/a)²⟩ has cross term 2σ·sgn(a)·Cov
        sign = _minimising_sign(math.copysign(1.0, a) * cov)
        lhs += a * a * vx + vy / (a * a) + 2 * sign * math.copysign(1.0, a) * cov
        signs.append(sign)
    return DuanGeneralResult(lhs=lhs, rhs=2 * (a * a + 1 / (a * a)), a_param=a, sign_plus=signs[0], sign_minus=signs[1])


def duan_product(cm: CovarianceMatrix) -> DuanResult:
    cm.require_modes(2)
    parts: list[tuple[float, int]] = []
    for quadrature in ("+", "-"):
        vx, vy = cm.variance("x", quadrature), cm.variance("y", quadrature)
        cov = cm.covariance(quadrature)
        parts.append(((vx + vy) / 2 - abs(cov), _minimising_sign(cov)))
    (v_plus, sign_plus), (v_minus, sign_minus) = parts
    return DuanResult(
        v_plus=v_plus,
        v_minus=v_minus,
        product=math.sqrt(v_plus * v_minus),
        sum=v_plus + v_minus,
        a_param=1.0,
        sign_plus=sign_plus,
        sign_minus=sign_minus,
    )


def duan_closed_form(s: float, eta: float) -> float:
    _check_closed_form_domain(s, eta)
    return eta * s + (1 - eta)


# -- photon numbers ----------------------------------------------------------------


def n_min(d: float) -> float:
    """Mean photons both beams need to reach a Duan product ``d``; zero for separable values (d ≥ 1)."""
    if d <= 0:
        raise ValueError(f"Duan product must be positive, got {d}")
    if d >= 1:
        return 0.0
    return (d + 1 / d) / 2 - 1


def photon_coordinates(cm: CovarianceMatrix) -> PhotonCoordinates:
    """Split the photons of both beams into the share fixed by the Duan product and the excess.

    For strongly squeezed states n_excess is ill-conditioned: rounding of the
    order-1/D entries reaches it amplified by 1/D, so a pure state reads as
    roughly eps/D³ rather than zero. Negative values inside that rounding
    bound are reported as zero.
    """
    cm.require_modes(2)
    d = duan_product(cm).product
    nm = n_min(d)
    mean_variance = float(sum(cm.entries.diagonal())) / 4
    excess = mean_variance - nm - 1
    if -_EXCESS_ROUNDING * mean_variance**2 / d < excess < 0:
        excess = 0.0
    return PhotonCoordinates.from_parts(nm, excess)


# -- calibration -----------------------------------------------------------------------


def _epr_at(s: float, anti: float, eta: float) -> float:
    return epr_product(entangled_pair(SqueezerSpec(squeezed_variance=s, anti_variance=anti), eta)).product


def calibrate_to_paper(duan_target: float = 0.44, epr_target: float = 0.58, eta_fixed: float = 0.85) -> SqueezerSpec:
    """Fit a symmetric source to measured Duan and EPR products at a fixed efficiency.

    The Duan product fixes the squeezed variance; the anti-squeezed variance is
    then found by bisection, the EPR product being increasing in it.
    """
    if not 0 < eta_fixed <= 1:
        raise CalibrationError(f"eta_fixed must be in (0, 1], got {eta_fixed}")
    if not 0 < duan_target < 1:
        raise CalibrationError(f"duan_target must be in (0, 1), got {duan_target}")
    if not 0 < epr_target < 1:
        raise CalibrationError(f"epr_target must be in (0, 1), got {epr_target}")

    s = 1 - (1 - duan_target) / eta_fixed
    if s <= 0:
        raise CalibrationError(f"duan_target {duan_target} is below the loss floor {1 - eta_fixed:.6g} at eta {eta_fixed}")

    pure_anti = 1 / s
    pure_epr = _epr_at(s, pure_anti, eta_fixed)
    if math.isclose(pure_epr, epr_target, rel_tol=_PURE_MATCH_RTOL):
        logger.info("calibration.solved s=%.6g anti=%.6g pure=true", s, pure_anti)
        return SqueezerSpec(squeezed_variance=s, anti_variance=pure_anti)
    if epr_target < pure_epr:
        logger.warning("calibration.infeasible duan=%s epr=%s reason=below_pure_bound", duan_target, epr_target)
        raise CalibrationError(f"epr_target {epr_target} is below the pure-source value {pure_epr:.6g}")

    hi = 2 * pure_anti
    while _epr_at(s, hi, eta_fixed) <= epr_target:
        if hi >= _CALIBRATION_MAX_ANTI:
            logger.warning("calibration.infeasible duan=%s epr=%s reason=above_mixed_bound", duan_target, epr_target)
            raise CalibrationError(f"epr_target {epr_target} is not reachable for any anti-squeezed variance")
        hi *= 2

    anti = optimize.bisect(lambda a: _epr_at(s, a, eta_fixed) - epr_target, pure_anti, hi, xtol=_CALIBRATION_XTOL)
    logger.info("calibration.solved s=%.6g anti=%.6g pure=false", s, anti)
    return SqueezerSpec(squeezed_variance=s, anti_variance=float(anti))
