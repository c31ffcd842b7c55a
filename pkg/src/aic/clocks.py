"""Injectable clocks so timestamps are reproducible under test."""

from __future__ import annotations

import time


class SystemClock:
    def now(self) -> int:
        return int(time.time())


class ManualClock:
    """Clock that only moves when told to; `tick` advances and returns."""

    def __init__(self, start: int = 0):
        self._now = int(start)

    def now(self) -> int:
        return self._now

    def tick(self, seconds: int = 1) -> int:
        self._now += seconds
        return self._now
