"""Evaluation budgets and search traces shared by the QSO and SA solvers."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

TRACE_COLUMNS = ("evaluations", "elapsed", "current_cost", "best_cost", "event")


class Budget:
    """Counts cost evaluations; exhausted by an evaluation cap or a wall-clock cap."""

    def __init__(self, max_evaluations: int | None = None, max_seconds: float | None = None):
        if max_evaluations is None and max_seconds is None:
            raise ValueError("a budget needs max_evaluations or max_seconds")
        self.max_evaluations = max_evaluations
        self.max_seconds = max_seconds
        self.used = 0
        self._t0 = time.perf_counter()

    def charge(self, n: int = 1) -> None:
        self.used += int(n)

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self._t0

    def exhausted(self) -> bool:
        if self.max_evaluations is not None and self.used >= self.max_evaluations:
            return True
        return self.max_seconds is not None and self.elapsed >= self.max_seconds


@dataclass
class SearchTrace:
    """One row per search event.  ``best_cost`` is the running minimum."""

    evaluations: list = field(default_factory=list)
    elapsed: list = field(default_factory=list)
    current_cost: list = field(default_factory=list)
    best_cost: list = field(default_factory=list)
    event: list = field(default_factory=list)

    def record(self, budget: Budget, current, best, event: str) -> None:
        self.evaluations.append(budget.used)
        self.elapsed.append(budget.elapsed)
        self.current_cost.append(current)
        self.best_cost.append(best)
        self.event.append(event)

    def __len__(self):
        return len(self.event)

    @property
    def final_best(self):
        return self.best_cost[-1]

    @property
    def total_evaluations(self) -> int:
        return self.evaluations[-1]

    def best_at(self, evaluations: int):
        """Best cost known after ``evaluations`` evaluations (None before the first row)."""
        i = int(np.searchsorted(self.evaluations, evaluations, side="right"))
        return self.best_cost[i - 1] if i else None

    def rows(self, with_time: bool = True):
        for i in range(len(self)):
            yield (
                self.evaluations[i],
                self.elapsed[i] if with_time else "",
                self.current_cost[i],
                self.best_cost[i],
                self.event[i],
            )

    def to_csv(self, path=None, with_time: bool = True) -> str:
        """Serialize as CSV.  ``with_time=False`` blanks the elapsed column so the
        output is reproducible byte-for-byte."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        w.writerows(self.rows(with_time))
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def same_path(self, other: "SearchTrace") -> bool:
        """Equal up to wall-clock timings."""
        return (
            self.evaluations == other.evaluations
            and self.current_cost == other.current_cost
            and self.best_cost == other.best_cost
            and self.event == other.event
        )
