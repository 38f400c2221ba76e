"""Tests for decibel conversions and efficiency arithmetic."""

from __future__ import annotations

import pytest

from cvent.utils.units import combine_efficiencies, db_to_variance, detection_efficiency, variance_to_db

pytestmark = pytest.mark.unit


class TestDecibels:
    def test_four_point_one_db(self):
        assert db_to_variance(4.1) == pytest.approx(0.389, abs=1e-3)

    def test_zero_db_is_shot_noise(self):
        assert db_to_variance(0.0) == 1.0
        assert variance_to_db(1.0) == 0.0

    def test_inverse(self):
        for db in (-3.0, 0.5, 4.1, 10.0):
            assert variance_to_db(db_to_variance(db)) == pytest.approx(db)

    def test_anti_squeezing_is_negative(self):
        assert variance_to_db(2.0) < 0

    @pytest.mark.parametrize("variance", [0.0, -1.0])
    def test_rejects_non_positive(self, variance):
        with pytest.raises(ValueError, match="positive"):
            variance_to_db(variance)


class TestEfficiencies:
    def test_detection_with_visibilities(self):
        eta = detection_efficiency(0.95, (0.987, 0.96))
        assert eta == pytest.approx(0.95 * 0.987**2 * 0.96**2)

    def test_detection_without_visibilities(self):
        assert detection_efficiency(0.9) == 0.9

    @pytest.mark.parametrize(("qe", "vis"), [(1.1, ()), (0.9, (1.2,)), (-0.1, ())])
    def test_detection_rejects_range(self, qe, vis):
        with pytest.raises(ValueError):
            detection_efficiency(qe, vis)

    def test_combine(self):
        assert combine_efficiencies(0.9, 0.8, 0.5) == pytest.approx(0.36)
        assert combine_efficiencies() == 1

    def test_combine_rejects_range(self):
        with pytest.raises(ValueError, match="efficiency"):
            combine_efficiencies(0.9, 1.5)
