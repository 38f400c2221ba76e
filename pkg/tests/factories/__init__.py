"""Test data factories, organized by domain and re-exported for convenience."""

from tests.factories.config import *  # noqa: F403
from tests.factories.states import *  # noqa: F403
