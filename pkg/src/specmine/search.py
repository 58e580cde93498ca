"""Many-objective evolutionary search for property counterexamples.

Each generation breeds offspring by tournament selection, single-point
crossover and per-invocation mutation, executes and sanitizes them, updates
the archive and the goal lifecycle, and keeps the preference-front ranking
of the offspring as the next population. Goals unlock dynamically as their
prerequisites are covered; hopeless goals are abandoned; a stagnant
population is reinitialized wholesale.
"""

from __future__ import annotations

import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .events import EventLabel, Trace
from .fitness import best_over_traces, method_fitness, trace_fitness
from .goals import (Archive, CounterexampleGoal, GoalState, GoalTracker,
                    MethodGoal, SearchGoal, build_goal_dependencies)
from .subjects import Invocation, Subject, TestCase, execute, random_test, sanitize
from .temporal import MinedPropertySet, TemporalProperty


@dataclass(frozen=True)
class SearchConfig:
    population_size: int = 50
    crossover_rate: float = 0.75
    tournament_size: int = 10
    abandon_age: int = 100
    reset_stagnation: int = 100
    max_generations: int | None = None
    max_seconds: float | None = None
    rng_seed: int = 0
    min_test_len: int = 2
    max_test_len: int = 10
    workers: int = 1

    def validate(self) -> None:
        if self.max_generations is None and self.max_seconds is None:
            raise ValueError("search budget required: generations or seconds")
        if self.max_generations is not None and self.max_generations <= 0:
            raise ValueError("generation budget must be positive")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("time budget must be positive")
        for name in ("population_size", "tournament_size", "abandon_age",
                     "reset_stagnation"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def _dominates(u: tuple, v: tuple) -> bool:
    return all(a <= b for a, b in zip(u, v)) and any(a < b for a, b in zip(u, v))


def rank(population: Sequence[TestCase], targeted: Sequence[SearchGoal],
         fitness: Mapping[SearchGoal, Sequence[float]]) -> list[list[int]]:
    """Preference-front ranking; returns fronts of population indices.

    Front 0 holds, per targeted goal, the test with minimal fitness (ties
    broken by shorter length, then position). The rest are nondominated-
    sorted on the targeted-goal objective vectors.
    """
    n = len(population)
    if n == 0:
        return []
    goals = sorted(targeted, key=lambda g: g.sort_key())
    if not goals:
        return [list(range(n))]
    lengths = [len(t) for t in population]
    chosen: set[int] = set()
    for goal in goals:
        vec = fitness[goal]
        best = min(range(n), key=lambda i: (vec[i], lengths[i], i))
        chosen.add(best)
    fronts = [sorted(chosen)]
    remaining = [i for i in range(n) if i not in chosen]
    vectors = {i: tuple(fitness[g][i] for g in goals) for i in remaining}
    while remaining:
        nondominated = [i for i in remaining
                        if not any(_dominates(vectors[j], vectors[i])
                                   for j in remaining if j != i)]
        fronts.append(nondominated)
        dropped = set(nondominated)
        remaining = [i for i in remaining if i not in dropped]
    return fronts


# ---------------------------------------------------------------------------
# Variation operators
# ---------------------------------------------------------------------------


def normalize(subject: Subject, invocations: Sequence[Invocation]) -> TestCase:
    """Repair a raw invocation list into a well-formed test case.

    Guarantees constructor-first per instance, drops re-constructions, and
    renumbers instances densely by first appearance.
    """
    ctor = subject.constructors()[0].action
    constructed: set[int] = set()
    repaired: list[Invocation] = []
    for inv in invocations:
        is_ctor = subject.descriptor(inv.action).is_constructor
        if is_ctor:
            if inv.instance in constructed:
                continue
            constructed.add(inv.instance)
            repaired.append(inv)
        else:
            if inv.instance not in constructed:
                constructed.add(inv.instance)
                repaired.append(Invocation(inv.instance, ctor, inv.arg_seed))
            repaired.append(inv)
    if not repaired:
        repaired = [Invocation(0, ctor, 0)]
    renumber: dict[int, int] = {}
    dense: list[Invocation] = []
    for inv in repaired:
        if inv.instance not in renumber:
            renumber[inv.instance] = len(renumber)
        dense.append(Invocation(renumber[inv.instance], inv.action, inv.arg_seed))
    return TestCase(tuple(dense))


def crossover(rng: random.Random, left: TestCase, right: TestCase,
              ) -> tuple[list[Invocation], list[Invocation]]:
    """Single-point crossover at a shared relative position."""
    alpha = rng.random()
    cut_l = max(1, round(alpha * len(left)))
    cut_r = max(1, round(alpha * len(right)))
    first = list(left.invocations[:cut_l]) + list(right.invocations[cut_r:])
    second = list(right.invocations[:cut_r]) + list(left.invocations[cut_l:])
    return first, second


_MUTATIONS = ("delete", "replace", "perturb", "insert")


def mutate(rng: random.Random, subject: Subject,
           invocations: Sequence[Invocation]) -> list[Invocation]:
    """Each invocation mutates with probability 1/length.

    Operators: delete it, replace its action, perturb its argument seed, or
    insert a fresh invocation after it; a whole extra instance is appended
    with the same per-test probability.
    """
    actions = [a for a in subject.actions if not a.is_constructor]
    ctor = subject.constructors()[0].action
    rate = 1.0 / max(1, len(invocations))
    out: list[Invocation] = []
    for inv in invocations:
        if rng.random() >= rate:
            out.append(inv)
            continue
        op = _MUTATIONS[rng.randrange(len(_MUTATIONS))]
        if op == "delete":
            continue
        if op == "replace" and actions:
            pick = actions[rng.randrange(len(actions))]
            out.append(Invocation(inv.instance, pick.action, inv.arg_seed))
        elif op == "perturb":
            out.append(Invocation(inv.instance, inv.action, rng.randrange(8)))
        elif actions:  # insert
            out.append(inv)
            pick = actions[rng.randrange(len(actions))]
            out.append(Invocation(inv.instance, pick.action, rng.randrange(8)))
        else:
            out.append(inv)
    if rng.random() < rate and actions:
        fresh = (max((inv.instance for inv in out), default=-1)) + 1
        out.append(Invocation(fresh, ctor, rng.randrange(8)))
        for _ in range(rng.randrange(1, 3)):
            pick = actions[rng.randrange(len(actions))]
            out.append(Invocation(fresh, pick.action, rng.randrange(8)))
    return out


# ---------------------------------------------------------------------------
# The generational loop
# ---------------------------------------------------------------------------


@dataclass
class GenerationStats:
    generation: int
    covered: int
    newly_covered: int
    targeted: int
    abandoned: int
    reset: bool = False


@dataclass
class SearchReport:
    seed: int
    generations: list[GenerationStats] = field(default_factory=list)
    goal_states: dict[str, str] = field(default_factory=dict)
    resets: list[int] = field(default_factory=list)
    total_generations: int = 0
    wall_seconds: float = 0.0

    def to_doc(self) -> dict:
        return {
            "seed": self.seed,
            "total_generations": self.total_generations,
            "wall_seconds": round(self.wall_seconds, 3),
            "resets": self.resets,
            "goal_states": self.goal_states,
            "generations": [vars(g) for g in self.generations],
        }


@dataclass
class EvolveResult:
    survivors: MinedPropertySet
    counterexample_traces: list[Trace]
    report: SearchReport
    archive: Archive
    lifecycle_log: list = field(default_factory=list)


class _Evaluated:
    __slots__ = ("test", "traces", "fitness")

    def __init__(self, test: TestCase, traces: list[Trace],
                 fitness: dict[SearchGoal, float]) -> None:
        self.test = test
        self.traces = traces
        self.fitness = fitness


def _goal_universe(subject: Subject,
                   properties: MinedPropertySet) -> list[SearchGoal]:
    labels = set(subject.event_labels())
    for prop in properties:
        labels.add(prop.a)
        labels.add(prop.b)
    goals: list[SearchGoal] = [MethodGoal(l) for l in
                               sorted(labels, key=EventLabel.sort_key)]
    goals.extend(CounterexampleGoal(p) for p in properties)
    return goals


def evolve(subject: Subject, properties: MinedPropertySet,
           config: SearchConfig) -> EvolveResult:
    """Run the counterexample search and report the surviving properties."""
    config.validate()
    purity = subject.purity()
    rng = random.Random(config.rng_seed)
    exec_seed = config.rng_seed
    tracker = GoalTracker(_goal_universe(subject, properties),
                          build_goal_dependencies(properties),
                          config.abandon_age)
    archive = Archive()
    report = SearchReport(seed=config.rng_seed)
    start = time.monotonic()

    def evaluate(tests: Sequence[TestCase]) -> list[_Evaluated]:
        goals = tracker.active()

        def one(test: TestCase) -> _Evaluated:
            traces = sanitize([execute(subject, test, exec_seed)])
            fitness = {}
            for goal in goals:
                if isinstance(goal, MethodGoal):
                    fitness[goal] = best_over_traces(
                        traces, lambda tr: method_fitness(tr, goal.label))
                else:
                    fitness[goal] = best_over_traces(
                        traces, lambda tr: trace_fitness(tr, goal.prop, purity))
            return _Evaluated(test, traces, fitness)

        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                return list(pool.map(one, tests))
        return [one(test) for test in tests]

    def record_coverage(evaluated: Sequence[_Evaluated], generation: int) -> int:
        newly = 0
        for item in evaluated:
            for goal, value in item.fitness.items():
                if value == 0.0:
                    if tracker.state[goal] in (GoalState.UNCOVERED_TARGETED,
                                               GoalState.UNCOVERED_UNTARGETED):
                        newly += 1
                    tracker.cover(goal, generation)
                    archive.offer(goal, item.test)
        return newly

    def fresh_population() -> list[_Evaluated]:
        tests = [normalize(subject, random_test(
            subject, rng, config.min_test_len, config.max_test_len).invocations)
            for _ in range(config.population_size)]
        return evaluate(tests)

    population = fresh_population()
    record_coverage(population, 0)
    tracker.refresh_targets(0)

    def fitness_table(evaluated: Sequence[_Evaluated],
                      goals: Sequence[SearchGoal]) -> dict[SearchGoal, list[float]]:
        return {g: [item.fitness.get(g, 1.0) for item in evaluated]
                for g in goals}

    def budget_left(generation: int) -> bool:
        if not tracker.active():
            # every goal is covered or abandoned; nothing left to search for
            return False
        if config.max_generations is not None \
                and generation >= config.max_generations:
            return False
        if config.max_seconds is not None \
                and time.monotonic() - start >= config.max_seconds:
            return False
        return True

    generation = 0
    last_cover = 0
    while budget_left(generation):
        generation += 1
        targeted = tracker.targeted()
        fronts = rank([item.test for item in population], targeted,
                      fitness_table(population, targeted))
        front_of = {}
        for depth, front in enumerate(fronts):
            for idx in front:
                front_of[idx] = depth

        def tournament() -> TestCase:
            best = None
            best_key = None
            for _ in range(config.tournament_size):
                idx = rng.randrange(len(population))
                key = (front_of.get(idx, len(fronts)), len(population[idx].test),
                       idx)
                if best_key is None or key < best_key:
                    best, best_key = population[idx].test, key
            return best

        children: list[TestCase] = []
        while len(children) < config.population_size:
            left, right = tournament(), tournament()
            if rng.random() < config.crossover_rate:
                raw_l, raw_r = crossover(rng, left, right)
            else:
                raw_l = list(left.invocations)
                raw_r = list(right.invocations)
            for raw in (raw_l, raw_r):
                if len(children) < config.population_size:
                    children.append(
                        normalize(subject, mutate(rng, subject, raw)))

        offspring = evaluate(children)
        newly = record_coverage(offspring, generation)
        tracker.refresh_targets(generation)
        targeted = tracker.targeted()
        fronts = rank([item.test for item in offspring], targeted,
                      fitness_table(offspring, targeted))
        survivors: list[_Evaluated] = []
        for front in fronts:
            for idx in front:
                if len(survivors) < config.population_size:
                    survivors.append(offspring[idx])
        population = survivors or population

        tracker.age_and_abandon(generation)
        if newly:
            last_cover = generation
        did_reset = False
        if generation - last_cover >= config.reset_stagnation:
            population = fresh_population()
            newly_reset = record_coverage(population, generation)
            tracker.refresh_targets(generation)
            report.resets.append(generation)
            last_cover = generation
            did_reset = True
            newly += newly_reset
        report.generations.append(GenerationStats(
            generation=generation,
            covered=len(tracker.covered()),
            newly_covered=newly,
            targeted=len(tracker.targeted()),
            abandoned=sum(1 for s in tracker.state.values()
                          if s is GoalState.ABANDONED),
            reset=did_reset,
        ))

    report.total_generations = generation
    report.wall_seconds = time.monotonic() - start
    report.goal_states = {str(goal): state.value
                          for goal, state in tracker.final_states().items()}

    removed = archive.covered_properties()
    survivors_set = properties.without(removed)
    counterexample_traces: list[Trace] = []
    for _, test in archive.counterexample_tests():
        counterexample_traces.extend(sanitize([execute(subject, test, exec_seed)]))
    return EvolveResult(survivors_set, counterexample_traces, report, archive,
                        lifecycle_log=list(tracker.log))
