"""Search goals, their lifecycle, dependencies, and the archive.

A goal is either covering a method (invoking one event label) or producing
a counterexample to one mined property. Goals move through a small state
machine: untargeted goals become targeted once their prerequisites are
covered, targeted goals age while uncovered and are abandoned past a
threshold, and covered/abandoned are terminal. The archive keeps the
shortest known covering test per goal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .events import EventLabel
from .subjects import TestCase
from .temporal import PropertyKind, TemporalProperty


@dataclass(frozen=True, slots=True)
class MethodGoal:
    label: EventLabel

    def __str__(self) -> str:
        return f"Method({self.label})"

    def sort_key(self) -> tuple:
        return (0, self.label.sort_key())


@dataclass(frozen=True, slots=True)
class CounterexampleGoal:
    prop: TemporalProperty

    def __str__(self) -> str:
        return f"Counterexample({self.prop})"

    def sort_key(self) -> tuple:
        return (1, self.prop.sort_key())


SearchGoal = MethodGoal | CounterexampleGoal


class GoalState(enum.Enum):
    UNCOVERED_UNTARGETED = "uncovered-untargeted"
    UNCOVERED_TARGETED = "uncovered-targeted"
    COVERED = "covered"
    ABANDONED = "abandoned"


# Collateral coverage of a never-targeted goal jumps straight to COVERED.
LEGAL_TRANSITIONS = {
    (GoalState.UNCOVERED_UNTARGETED, GoalState.UNCOVERED_TARGETED),
    (GoalState.UNCOVERED_UNTARGETED, GoalState.COVERED),
    (GoalState.UNCOVERED_TARGETED, GoalState.COVERED),
    (GoalState.UNCOVERED_TARGETED, GoalState.ABANDONED),
}


@dataclass(frozen=True)
class GoalDependencyGraph:
    """Prerequisites per goal; a goal is targeted once all are covered."""

    edges: Mapping[SearchGoal, frozenset[SearchGoal]]

    def prerequisites(self, goal: SearchGoal) -> frozenset[SearchGoal]:
        return self.edges.get(goal, frozenset())


def build_goal_dependencies(properties: Iterable[TemporalProperty],
                            ) -> GoalDependencyGraph:
    """Dependency edges derived from the property set.

    Precedence properties also order method goals among themselves; cycles
    there (contradictory candidates can chain circularly) are broken by
    skipping the edge that arrives latest in sorted candidate order.
    """
    props = sorted(properties, key=TemporalProperty.sort_key)
    edges: dict[SearchGoal, set[SearchGoal]] = {}

    def add(goal: SearchGoal, prereq: SearchGoal) -> None:
        edges.setdefault(goal, set()).add(prereq)

    def method_reaches(start: SearchGoal, target: SearchGoal) -> bool:
        stack = [start]
        seen = set()
        while stack:
            node = stack.pop()
            if node == target:
                return True
            if node in seen:
                continue
            seen.add(node)
            stack.extend(edges.get(node, ()))
        return False

    for prop in props:
        ce = CounterexampleGoal(prop)
        if prop.kind in (PropertyKind.AP, PropertyKind.AIP):
            method_a, method_b = MethodGoal(prop.a), MethodGoal(prop.b)
            # Method(B) waits for Method(A) unless that closes a cycle.
            if method_a != method_b and not method_reaches(method_a, method_b):
                add(method_b, method_a)
            add(ce, method_b)
        else:
            add(ce, MethodGoal(prop.a))
    return GoalDependencyGraph({goal: frozenset(prereqs)
                                for goal, prereqs in edges.items()})


class GoalTracker:
    """Lifecycle bookkeeping for a fixed goal universe.

    Every transition is validated against the legal set and logged as
    ``(generation, goal, old, new)``.
    """

    def __init__(self, goals: Iterable[SearchGoal],
                 dependencies: GoalDependencyGraph,
                 abandon_age: int) -> None:
        self.goals = sorted(set(goals), key=lambda g: g.sort_key())
        self.dependencies = dependencies
        self.abandon_age = abandon_age
        self.state: dict[SearchGoal, GoalState] = {
            goal: GoalState.UNCOVERED_UNTARGETED for goal in self.goals}
        self.age: dict[SearchGoal, int] = {}
        self.log: list[tuple[int, SearchGoal, GoalState, GoalState]] = []

    def _move(self, goal: SearchGoal, new: GoalState, generation: int) -> None:
        old = self.state[goal]
        if (old, new) not in LEGAL_TRANSITIONS:
            raise ValueError(f"illegal goal transition {old} -> {new} for {goal}")
        self.state[goal] = new
        self.log.append((generation, goal, old, new))
        if new is GoalState.UNCOVERED_TARGETED:
            self.age[goal] = 0
        else:
            self.age.pop(goal, None)

    def targeted(self) -> list[SearchGoal]:
        return [g for g in self.goals
                if self.state[g] is GoalState.UNCOVERED_TARGETED]

    def active(self) -> list[SearchGoal]:
        """Goals whose fitness is still worth computing."""
        return [g for g in self.goals
                if self.state[g] in (GoalState.UNCOVERED_TARGETED,
                                     GoalState.UNCOVERED_UNTARGETED)]

    def covered(self) -> set[SearchGoal]:
        return {g for g in self.goals if self.state[g] is GoalState.COVERED}

    def cover(self, goal: SearchGoal, generation: int) -> None:
        if self.state[goal] in (GoalState.COVERED, GoalState.ABANDONED):
            return
        self._move(goal, GoalState.COVERED, generation)

    def refresh_targets(self, generation: int) -> None:
        """Promote untargeted goals whose prerequisites are all covered."""
        covered = self.covered()
        for goal in self.goals:
            if self.state[goal] is not GoalState.UNCOVERED_UNTARGETED:
                continue
            if self.dependencies.prerequisites(goal) <= covered:
                self._move(goal, GoalState.UNCOVERED_TARGETED, generation)

    def age_and_abandon(self, generation: int) -> list[SearchGoal]:
        """One stagnant generation for every goal still targeted."""
        abandoned = []
        for goal in self.targeted():
            self.age[goal] += 1
            if self.age[goal] > self.abandon_age:
                self._move(goal, GoalState.ABANDONED, generation)
                abandoned.append(goal)
        return abandoned

    def final_states(self) -> dict[SearchGoal, GoalState]:
        return dict(self.state)


class Archive:
    """Shortest covering test per goal."""

    def __init__(self) -> None:
        self.best: dict[SearchGoal, TestCase] = {}

    def offer(self, goal: SearchGoal, test: TestCase) -> bool:
        """Store the test if it is the first or a strictly shorter cover."""
        incumbent = self.best.get(goal)
        if incumbent is None or len(test) < len(incumbent):
            self.best[goal] = test
            return incumbent is None
        return False

    def covered_properties(self) -> set[TemporalProperty]:
        return {goal.prop for goal in self.best
                if isinstance(goal, CounterexampleGoal)}

    def counterexample_tests(self) -> list[tuple[CounterexampleGoal, TestCase]]:
        items = [(g, t) for g, t in self.best.items()
                 if isinstance(g, CounterexampleGoal)]
        return sorted(items, key=lambda item: item[0].sort_key())

    def __len__(self) -> int:
        return len(self.best)

    def __contains__(self, goal: SearchGoal) -> bool:
        return goal in self.best
