"""Shared test fixtures."""

from __future__ import annotations

import pytest
from click.testing import CliRunner

from cvent.gaussian import SqueezerSpec
from tests.factories import make_calibrated_source


@pytest.fixture(scope="session")
def calibrated_source() -> SqueezerSpec:
    """Calibrated source, solved once per session."""
    return make_calibrated_source()


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()
