"""Session clocks. The engine only ever asks "what time is it" and "wake me
at t", so a simulated clock makes every timing test instant and exact."""

from __future__ import annotations

import time
from typing import Protocol


class Clock(Protocol):
    def now_s(self) -> float: ...

    def sleep_until(self, t_s: float) -> None: ...


class WallClock:
    def __init__(self) -> None:
        self._start = time.monotonic()

    def now_s(self) -> float:
        return time.monotonic() - self._start

    def sleep_until(self, t_s: float) -> None:
        delay = t_s - self.now_s()
        if delay > 0:
            time.sleep(delay)


class SimulatedClock:
    """Jumps straight to whatever it is told to wait for."""

    def __init__(self, start_s: float = 0.0) -> None:
        self._now = start_s

    def now_s(self) -> float:
        return self._now

    def sleep_until(self, t_s: float) -> None:
        if t_s > self._now:
            self._now = t_s
