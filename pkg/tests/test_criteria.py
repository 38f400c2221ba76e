"""Tests for EPR and inseparability criteria and photon-number coordinates."""

from __future__ import annotations

import numpy as np
import pytest

from cvent.criteria import (
    DegenerateConditionerError,
    PhotonCoordinates,
    conditional_variance,
    duan_closed_form,
    duan_general,
    duan_product,
    epr_closed_form,
    epr_crossing_loss,
    epr_product,
    n_min,
    optimal_gain,
    photon_coordinates,
    residual_variance,
)
from cvent.gaussian import CovarianceMatrix, SqueezerSpec
from tests.factories import make_entangled, make_squeezer, make_vacuum
from tests.helpers import excess_tolerance

pytestmark = pytest.mark.unit


class TestConditionalVariance:
    def test_vacuum(self):
        assert conditional_variance(make_vacuum(), "+") == (1.0, 0.0)

    def test_half_squeezed(self):
        cm = make_entangled(0.5)
        var_plus, gain_plus = conditional_variance(cm, "+")
        var_minus, gain_minus = conditional_variance(cm, "-")
        assert var_plus == pytest.approx(0.8, abs=1e-12)
        assert var_minus == pytest.approx(0.8, abs=1e-12)
        assert gain_plus == pytest.approx(-0.6, abs=1e-12)
        assert gain_minus == pytest.approx(0.6, abs=1e-12)

    def test_matches_gain_scan(self):
        cm = make_entangled(0.5)
        var_x, var_y, cov = cm.variance("x", "+"), cm.variance("y", "+"), cm.covariance("+")
        gains = np.linspace(-2, 2, 40001)
        scan = var_x - 2 * gains * cov + gains**2 * var_y
        assert scan.min() == pytest.approx(conditional_variance(cm, "+")[0], abs=1e-8)
        assert gains[scan.argmin()] == pytest.approx(-0.6, abs=1e-4)

    def test_uncorrelated_gives_unconditional(self):
        cm = CovarianceMatrix(np.diag([0.7, 1.6, 2.0, 0.9]))
        assert conditional_variance(cm, "+")[0] == 0.7
        assert conditional_variance(cm, "-", inferred="y")[0] == 0.9

    def test_inferring_y_from_x_is_symmetric_here(self):
        cm = make_entangled(0.3, 4.0, eta=0.9)
        assert conditional_variance(cm, "+", "y")[0] == pytest.approx(conditional_variance(cm, "+", "x")[0])

    def test_degenerate_conditioner(self):
        with pytest.raises(DegenerateConditionerError):
            optimal_gain(0.3, 0.0)

    @pytest.mark.parametrize("eps", [1e-3, -1e-3, 0.05, -0.05])
    def test_perturbed_gain_is_worse(self, eps):
        cm = make_entangled(0.4, 3.0, eta=0.8)
        cv, gain = conditional_variance(cm, "-")
        var_x, var_y, cov = cm.variance("x", "-"), cm.variance("y", "-"), cm.covariance("-")
        assert residual_variance(var_x, cov, var_y, gain + eps) > cv


class TestEprProduct:
    def test_vacuum_is_boundary(self):
        result = epr_product(make_vacuum())
        assert result.product == 1.0
        assert not result.satisfied

    def test_half_squeezed(self):
        result = epr_product(make_entangled(0.5))
        assert result.product == pytest.approx(0.64, abs=1e-12)
        assert result.product == pytest.approx(result.cv_plus * result.cv_minus, abs=1e-12)
        assert result.satisfied
        assert result.gains.g_plus == pytest.approx(-0.6)
        assert result.cv_plus <= result.var_plus
        assert result.cv_minus <= result.var_minus


class TestEprClosedForm:
    @pytest.mark.parametrize("s", [0.05, 0.3, 0.5, 0.9, 1.0])
    def test_half_efficiency_is_unity(self, s):
        assert epr_closed_form(s, 0.5) == 1.0

    def test_lossless(self):
        assert epr_closed_form(0.5, 1.0) == pytest.approx(0.64)
        assert epr_closed_form(0.5, 1.0) == pytest.approx(4 / (0.5 + 2) ** 2)

    @pytest.mark.parametrize("eta", [0.0, 0.2, 0.7, 1.0])
    def test_unsqueezed(self, eta):
        assert epr_closed_form(1.0, eta) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize(("s", "eta"), [(0.0, 0.5), (1.2, 0.5), (0.5, -0.1), (0.5, 1.5)])
    def test_domain(self, s, eta):
        with pytest.raises(ValueError):
            epr_closed_form(s, eta)

    def test_no_go_below_half_efficiency(self):
        for s in np.linspace(0.05, 1.0, 20):
            for eta in np.linspace(0.0, 0.5, 11):
                assert epr_product(make_entangled(float(s), eta=float(eta))).product >= 1 - 1e-12

    @pytest.mark.parametrize(("s", "anti"), [(0.5, 2.5), (0.3, 5.0), (0.1, 10.5)])
    def test_impurity_penalty_at_half_efficiency(self, s, anti):
        product = epr_product(make_entangled(s, anti, eta=0.5)).product
        cv = (s + 1) * (anti + 1) / (s + anti + 2)
        assert product == pytest.approx(cv**2, rel=1e-12)
        assert product > 1

    @pytest.mark.parametrize("s", [0.1, 0.4, 0.8])
    def test_non_increasing_above_half(self, s):
        values = [epr_product(make_entangled(s, eta=float(eta))).product for eta in np.linspace(0.5, 1.0, 26)]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:], strict=False))


class TestDuanGeneral:
    def test_vacuum_boundary(self):
        result = duan_general(make_vacuum(), 1.0)
        assert result.lhs == pytest.approx(4.0)
        assert result.rhs == 4.0
        assert not result.satisfied

    def test_half_squeezed(self):
        result = duan_general(make_entangled(0.5), 1.0)
        assert result.lhs == pytest.approx(2.0, abs=1e-12)
        assert result.rhs == 4.0
        assert result.satisfied
        assert (result.sign_plus, result.sign_minus) == (1, -1)

    def test_unit_parameter_is_optimal_for_symmetric_state(self):
        cm = make_entangled(0.5)
        at_one = duan_general(cm, 1.0)
        at_two = duan_general(cm, 2.0)
        assert at_two.lhs / at_two.rhs > at_one.lhs / at_one.rhs

    def test_negative_parameter_minimises_over_sign(self):
        cm = make_entangled(0.5)
        assert duan_general(cm, -1.0).lhs == pytest.approx(duan_general(cm, 1.0).lhs)

    def test_rejects_zero(self):
        with pytest.raises(ValueError, match="non-zero"):
            duan_general(make_vacuum(), 0.0)


class TestDuanProduct:
    def test_vacuum(self):
        result = duan_product(make_vacuum())
        assert (result.v_plus, result.v_minus, result.product) == (1.0, 1.0, 1.0)
        assert not result.satisfied

    def test_half_squeezed(self):
        result = duan_product(make_entangled(0.5))
        assert result.v_plus == pytest.approx(0.5, abs=1e-12)
        assert result.v_minus == pytest.approx(0.5, abs=1e-12)
        assert result.product == pytest.approx(0.5, abs=1e-12)
        assert result.sum == pytest.approx(1.0, abs=1e-12)
        assert result.a_param == 1.0
        assert (result.sign_plus, result.sign_minus) == (1, -1)
        assert result.product <= max(result.v_plus, result.v_minus)

    def test_general_form_is_twice_the_sum(self):
        cm = make_entangled(0.3, 4.2, eta=0.7)
        assert duan_general(cm, 1.0).lhs == pytest.approx(2 * duan_product(cm).sum)


class TestDuanClosedForm:
    def test_lossless(self):
        assert duan_closed_form(0.389, 1.0) == pytest.approx(0.389)

    def test_lossy(self):
        assert duan_closed_form(0.5, 0.8) == pytest.approx(0.6)

    def test_survives_all_loss(self):
        values = [duan_closed_form(0.3, eta) for eta in (1.0, 0.5, 0.1, 1e-3, 1e-9)]
        assert all(v < 1 for v in values)
        assert values == sorted(values)
        assert values[-1] == pytest.approx(1.0, abs=1e-8)

    def test_full_loss(self):
        assert duan_closed_form(0.3, 0.0) == 1.0


class TestPhotonNumbers:
    @pytest.mark.parametrize(("d", "expected"), [(1.0, 0.0), (0.44, 0.356364), (0.5, 0.25), (1.7, 0.0)])
    def test_n_min(self, d, expected):
        assert n_min(d) == pytest.approx(expected, abs=1e-6)

    @pytest.mark.parametrize("d", [0.0, -0.2])
    def test_n_min_rejects_non_positive(self, d):
        with pytest.raises(ValueError):
            n_min(d)

    def test_pure_two_mode_squeezed(self):
        coords = photon_coordinates(make_entangled(0.5))
        assert coords.n_min == pytest.approx(0.25, abs=1e-12)
        assert coords.n_excess == pytest.approx(0.0, abs=1e-9)

    def test_vacuum(self):
        assert photon_coordinates(make_vacuum()) == PhotonCoordinates(0.0, 0.0, 0.0)

    def test_loss_creates_excess(self):
        assert photon_coordinates(make_entangled(0.5, eta=0.8)).n_excess > 0

    def test_accounting(self):
        cm = make_entangled(0.25, 6.0, eta=0.6)
        coords = photon_coordinates(cm)
        assert coords.n_total == coords.n_min + coords.n_excess
        assert coords.n_excess == float(sum(cm.entries.diagonal())) / 4 - coords.n_min - 1
        assert coords.n_total == pytest.approx((float(sum(cm.entries.diagonal())) - 4) / 4)

    @pytest.mark.parametrize("s", [1e-3, 0.05, 0.3, 0.7, 1.0])
    def test_pure_states_have_no_excess(self, s):
        assert photon_coordinates(make_entangled(s)).n_excess == pytest.approx(0.0, abs=excess_tolerance(s))

    @pytest.mark.parametrize("s", [1e-3, 2e-3, 5e-3, 0.01, 0.05, 0.3, 1.0])
    def test_pure_states_never_negative(self, s):
        coords = photon_coordinates(make_entangled(s))
        assert coords.n_excess >= 0
        assert coords.n_total == coords.n_min + coords.n_excess

    def test_mixed_state_excess_not_clamped(self):
        assert photon_coordinates(make_entangled(1e-3, 1e3 + 1, eta=1.0)).n_excess > 0.1


class TestEprCrossingLoss:
    def test_pure_source_crosses_at_half(self):
        assert epr_crossing_loss(make_squeezer(0.3)) == pytest.approx(0.5)

    def test_crossing_matches_pipeline(self):
        spec = SqueezerSpec(squeezed_variance=0.35, anti_variance=3.3)
        loss = epr_crossing_loss(spec)
        assert loss is not None
        assert epr_product(make_entangled(0.35, 3.3, eta=1 - loss)).product == pytest.approx(1.0, abs=1e-10)

    def test_unsqueezed_has_no_crossing(self):
        assert epr_crossing_loss(make_squeezer(1.0)) is None

    def test_very_impure_source_never_satisfies(self):
        spec = SqueezerSpec(squeezed_variance=0.9, anti_variance=10.0)
        assert epr_crossing_loss(spec) is None
        assert epr_product(make_entangled(0.9, 10.0)).product > 1
