import random

import pytest

from specmine.events import EventLabel, PuritySet, Trace
from specmine.fitness import trace_fitness
from specmine.goals import (Archive, CounterexampleGoal, GoalState,
                            LEGAL_TRANSITIONS, MethodGoal)
from specmine.search import (SearchConfig, crossover, evolve, mutate,
                             normalize, rank)
from specmine.subjects import (CONSTRUCTOR, Invocation, TestCase, execute,
                               get_subject, sanitize)
from specmine.temporal import MinedPropertySet, PropertyKind, TemporalProperty

from conftest import make_datastore_subject


def prop(kind, a, b):
    return TemporalProperty(PropertyKind(kind), a, b)


def label(text):
    from specmine.events import parse_event
    return parse_event(text)


# --- the worked example: three falsifiable goals on the data store ---------

GOAL1 = prop("AP", label("isEmpty:FALSE"), label("add:TRUE"))
GOAL2 = prop("AIF", label("clear"), label("isEmpty:TRUE"))
GOAL3 = prop("AF", label("clear"), label("isEmpty:TRUE"))
WALKTHROUGH_PURITY = PuritySet({"isEmpty"})


def _as_test(trace):
    return TestCase(tuple(Invocation(0, ev.action, 0) for ev in trace.body()))


def _fitness_table(traces, goals):
    return {CounterexampleGoal(p): [trace_fitness(t, p, WALKTHROUGH_PURITY)
                                    for t in traces]
            for p in goals}


def test_replay_offspring_ranking():
    """The starred offspring of the worked first generation fill front 0."""
    offspring = [
        Trace.of("clear", "getAll", "isEmpty:TRUE", "getAll"),
        Trace.of("clear", "isEmpty:TRUE", "add:TRUE", "isEmpty:FALSE"),
        Trace.of("add:TRUE", "clear", "isEmpty:TRUE", "getAll"),
        Trace.of("getAll", "isEmpty:TRUE", "add:TRUE", "getAll"),
        Trace.of("getAll", "add:TRUE", "get"),
    ]
    table = _fitness_table(offspring, [GOAL1, GOAL2, GOAL3])
    # the published objective vectors, goal by goal
    assert table[CounterexampleGoal(GOAL1)] == [1.0, 0.33, 0.66, 0.66, 0.66]
    assert table[CounterexampleGoal(GOAL2)] == [0.0, 0.33, 0.33, 0.66, 1.0]
    assert table[CounterexampleGoal(GOAL3)] == [0.33, 0.33, 0.33, 0.66, 1.0]

    tests = [_as_test(t) for t in offspring]
    targeted = [CounterexampleGoal(p) for p in (GOAL1, GOAL2, GOAL3)]
    fronts = rank(tests, targeted, table)
    assert fronts[0] == [0, 1]          # exactly the starred tests
    assert fronts[1:] == [[2], [3], [4]]  # then the dominance chain


def test_replay_archive_covers_all_goals():
    generations = [
        [Trace.of("clear", "isEmpty:TRUE", "getAll"),
         Trace.of("getAll", "add:FALSE")],
        [Trace.of("clear", "getAll", "isEmpty:TRUE", "getAll"),
         Trace.of("clear", "isEmpty:TRUE", "add:TRUE", "isEmpty:FALSE"),
         Trace.of("add:TRUE", "clear", "isEmpty:TRUE", "getAll"),
         Trace.of("getAll", "isEmpty:TRUE", "add:TRUE", "getAll"),
         Trace.of("getAll", "add:TRUE", "get")],
        [Trace.of("clear", "isEmpty:TRUE", "addAll:TRUE", "isEmpty:FALSE"),
         Trace.of("clear", "clear", "getAll"),
         Trace.of("clear", "getAll", "isEmpty:TRUE", "add:TRUE", "getAll"),
         Trace.of("clear", "isEmpty:TRUE", "isEmpty:TRUE", "add:TRUE", "getAll")],
    ]
    archive = Archive()
    for traces in generations:
        for trace in traces:
            for p in (GOAL1, GOAL2, GOAL3):
                if trace_fitness(trace, p, WALKTHROUGH_PURITY) == 0.0:
                    archive.offer(CounterexampleGoal(p), _as_test(trace))
    assert archive.covered_properties() == {GOAL1, GOAL2, GOAL3}


def test_rank_single_goal_degenerates_to_sort():
    goal = CounterexampleGoal(GOAL3)
    tests = [_as_test(Trace.of(*["clear"] * n)) for n in (3, 1, 2)]
    table = {goal: [0.33, 0.33, 0.0]}
    fronts = rank(tests, [goal], table)
    assert fronts[0] == [2]
    # remaining tie on fitness: both nondominated, single front
    assert fronts[1] == [0, 1]


def test_rank_without_goals():
    tests = [_as_test(Trace.of("clear"))] * 3
    assert rank(tests, [], {}) == [[0, 1, 2]]
    assert rank([], [], {}) == []


def test_walkthrough_evolve_covers_all_three(datastore_subject):
    properties = MinedPropertySet({GOAL1: 1, GOAL2: 1, GOAL3: 1})
    config = SearchConfig(max_generations=60, rng_seed=2, population_size=30)
    result = evolve(datastore_subject, properties, config)
    assert len(result.survivors) == 0
    states = result.report.goal_states
    for p in (GOAL1, GOAL2, GOAL3):
        assert states[str(CounterexampleGoal(p))] == "covered"
    assert result.counterexample_traces
    # every removed property has a replayable falsifying trace
    for p in (GOAL1, GOAL2, GOAL3):
        assert any(trace_fitness(t, p, WALKTHROUGH_PURITY) == 0.0
                   for t in result.counterexample_traces)


def test_unfalsifiable_goal_abandoned():
    subject = get_subject("Tokenizer")
    true_prop = prop("AP", label("nextToken"), label("<init>"))
    properties = MinedPropertySet({true_prop: 1})
    config = SearchConfig(max_generations=30, rng_seed=0, abandon_age=5,
                          population_size=20)
    result = evolve(subject, properties, config)
    assert true_prop in result.survivors
    state = result.report.goal_states[str(CounterexampleGoal(true_prop))]
    assert state == "abandoned"


def test_zero_properties_covers_methods_only():
    subject = get_subject("Tokenizer")
    config = SearchConfig(max_generations=15, rng_seed=1, population_size=20)
    result = evolve(subject, MinedPropertySet({}), config)
    assert len(result.survivors) == 0
    assert result.counterexample_traces == []
    states = result.report.goal_states
    assert set(states) == {str(MethodGoal(l))
                           for l in subject.event_labels()}
    assert states[str(MethodGoal(label("nextToken")))] == "covered"


def test_budget_validation():
    subject = get_subject("Tokenizer")
    with pytest.raises(ValueError):
        evolve(subject, MinedPropertySet({}), SearchConfig())
    with pytest.raises(ValueError):
        evolve(subject, MinedPropertySet({}),
               SearchConfig(max_generations=-1))
    with pytest.raises(ValueError):
        evolve(subject, MinedPropertySet({}),
               SearchConfig(max_seconds=0.0))


def test_evolve_reproducible_and_parallel_identical():
    subject = get_subject("KeyedStore")
    from specmine.temporal import mine
    from specmine.subjects import random_suite
    traces = sanitize([execute(subject, t, 3)
                       for t in random_suite(subject, 20, 3)])
    properties = mine(traces, subject.purity())
    base = SearchConfig(max_generations=25, rng_seed=7, population_size=25)
    first = evolve(subject, properties, base)
    second = evolve(subject, properties, base)
    assert [str(t) for t in first.counterexample_traces] == \
        [str(t) for t in second.counterexample_traces]
    assert first.report.goal_states == second.report.goal_states

    import dataclasses
    parallel = dataclasses.replace(base, workers=4)
    third = evolve(subject, properties, parallel)
    assert [str(t) for t in first.counterexample_traces] == \
        [str(t) for t in third.counterexample_traces]
    assert first.report.goal_states == third.report.goal_states


def test_lifecycle_log_is_legal(datastore_subject):
    properties = MinedPropertySet({GOAL1: 1, GOAL2: 1, GOAL3: 1})
    config = SearchConfig(max_generations=40, rng_seed=5, population_size=20,
                          abandon_age=8)
    result = evolve(datastore_subject, properties, config)
    assert result.lifecycle_log
    seen = {}
    for generation, goal, old, new in result.lifecycle_log:
        assert (old, new) in LEGAL_TRANSITIONS
        assert seen.get(goal, -1) <= generation  # log ordered per goal
        seen[goal] = generation
    terminal = {GoalState.COVERED, GoalState.ABANDONED}
    finished = {goal for _, goal, _, new in result.lifecycle_log
                if new in terminal}
    for generation, goal, old, new in result.lifecycle_log:
        if old in terminal:
            raise AssertionError("transition out of a terminal state")
    assert finished


def test_population_reset_on_stagnation():
    subject = get_subject("Tokenizer")
    impossible = prop("AP", label("nextToken"), label("<init>"))
    properties = MinedPropertySet({impossible: 1})
    config = SearchConfig(max_generations=30, rng_seed=0, population_size=10,
                          reset_stagnation=6, abandon_age=100)
    result = evolve(subject, properties, config)
    assert result.report.resets, "stagnant run should have reset"
    gens = {g.generation for g in result.report.generations if g.reset}
    assert set(result.report.resets) == gens


def test_normalize_repairs_tests():
    subject = get_subject("BoundedStack")
    raw = [Invocation(3, "push", 1), Invocation(3, CONSTRUCTOR, 0),
           Invocation(9, "pop", 2)]
    fixed = normalize(subject, raw)
    assert fixed.invocations[0] == Invocation(0, CONSTRUCTOR, 1)
    assert fixed.invocations[1] == Invocation(0, "push", 1)
    # the stray re-construction was dropped, second instance repaired
    assert fixed.invocations[2] == Invocation(1, CONSTRUCTOR, 2)
    assert fixed.invocations[3] == Invocation(1, "pop", 2)
    assert normalize(subject, []).invocations == \
        (Invocation(0, CONSTRUCTOR, 0),)


def test_variation_operators_produce_wellformed_tests():
    subject = get_subject("Connection")
    rng = random.Random(3)
    tests = [normalize(subject, [Invocation(0, CONSTRUCTOR, 0),
                                 Invocation(0, "connect", 0),
                                 Invocation(0, "close", 0)])]
    for _ in range(300):
        left = tests[rng.randrange(len(tests))]
        right = tests[rng.randrange(len(tests))]
        raw_l, raw_r = crossover(rng, left, right)
        child = normalize(subject, mutate(rng, subject, raw_l))
        execute(subject, child, 0)   # must not raise ConfigurationError
        tests.append(child)
        tests = tests[-10:]
