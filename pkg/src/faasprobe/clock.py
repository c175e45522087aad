"""Clock abstraction: campaigns only ever need ``now`` and ``wait_until``.

The virtual clock compresses multi-hour campaigns into microseconds of wall
time and makes them fully deterministic; the wall clock schedules by absolute
target times so per-request skew never accumulates.
"""

from __future__ import annotations

import time
from typing import Protocol

from .lifecycle import Duration


class Clock(Protocol):
    def now(self) -> Duration: ...

    def wait_until(self, target: Duration) -> None: ...


class VirtualClock:
    """Simulation time source. Jumps instantly; never moves backwards."""

    def __init__(self, start: Duration = Duration(0)):
        self._now = start

    def now(self) -> Duration:
        return self._now

    def wait_until(self, target: Duration) -> None:
        # Waiting for a past instant is a no-op, not an error: campaigns may
        # schedule "immediately after" as the same timestamp.
        if target > self._now:
            self._now = target

    def advance(self, delta: Duration) -> None:
        self._now = self._now + delta


class WallClock:
    """Monotonic wall time, anchored at construction."""

    def __init__(self):
        self._anchor = time.monotonic()

    def now(self) -> Duration:
        return Duration(int((time.monotonic() - self._anchor) * 1_000))

    def wait_until(self, target: Duration) -> None:
        while True:
            remaining_s = target.ms / 1_000 - (time.monotonic() - self._anchor)
            if remaining_s <= 0:
                return
            time.sleep(remaining_s)
