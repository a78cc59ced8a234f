"""Cooperative work budgets shared by the long-running pipelines.

A budget mixes a wall-clock limit with coarse work counters; the expensive
loops call tick()/charge() at safe points and a BudgetExceeded unwinds to the
caller, which reports a timeout outcome (never a wrong verdict).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field


class BudgetExceeded(Exception):
    pass


@dataclass
class Budget:
    ms: float | None = None
    work: int | None = None
    started: float = field(default_factory=time.monotonic)
    used: int = 0

    def tick(self, amount: int = 1):
        self.used += amount
        if self.work is not None and self.used > self.work:
            raise BudgetExceeded(f"work budget exhausted ({self.used} > {self.work})")
        if self.ms is not None and (time.monotonic() - self.started) * 1000.0 > self.ms:
            raise BudgetExceeded(f"time budget exhausted ({self.ms} ms)")

    @staticmethod
    def unlimited() -> "Budget":
        return Budget()
