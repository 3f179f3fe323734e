"""Shared result containers for algorithm runs."""

from __future__ import annotations

from dataclasses import dataclass, field

from .partition import Hierarchy, Partition


@dataclass
class RunCounters:
    """Work counters; node visits are the portable performance metric."""

    local_visits: int = 0
    local_moves: int = 0
    refine_visits: int = 0
    refine_merges: int = 0
    levels: int = 0

    @property
    def total_visits(self) -> int:
        return self.local_visits + self.refine_visits

    def merged_into(self, other: "RunCounters") -> None:
        other.local_visits += self.local_visits
        other.local_moves += self.local_moves
        other.refine_visits += self.refine_visits
        other.refine_merges += self.refine_merges
        other.levels += self.levels


@dataclass
class RunResult:
    """One full algorithm iteration: flat output partition plus its hierarchy."""

    partition: Partition
    hierarchy: Hierarchy
    counters: RunCounters = field(default_factory=RunCounters)
