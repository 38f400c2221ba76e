"""Tests for the ordered thread-pool map."""

from __future__ import annotations

import threading
import time

import pytest

from cvent.utils.parallel import ordered_map

pytestmark = pytest.mark.unit


class TestOrderedMap:
    def test_serial(self):
        assert ordered_map(lambda x: x * 2, [3, 1, 2]) == [6, 2, 4]

    def test_empty(self):
        assert ordered_map(lambda x: x, [], workers=4) == []

    def test_order_kept_when_late_items_finish_first(self):
        def slow_for_small(x: int) -> int:
            time.sleep(0.01 * (5 - x))
            return x

        assert ordered_map(slow_for_small, range(5), workers=5) == [0, 1, 2, 3, 4]

    def test_uses_several_threads(self):
        seen: set[int] = set()
        barrier = threading.Barrier(2, timeout=5)

        def record(_: int) -> None:
            seen.add(threading.get_ident())
            barrier.wait()

        ordered_map(record, range(2), workers=2)
        assert len(seen) == 2

    def test_accepts_generators(self):
        assert ordered_map(str, (i for i in range(3)), workers=2) == ["0", "1", "2"]

    def test_exception_propagates(self):
        def boom(x: int) -> int:
            if x == 2:
                raise RuntimeError("bad point")
            return x

        with pytest.raises(RuntimeError, match="bad point"):
            ordered_map(boom, range(4), workers=2)
