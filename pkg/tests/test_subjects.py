import itertools
import json

import pytest

from specmine.events import EventLabel, Trace
from specmine.subjects import (CONSTRUCTOR, ConfigurationError, Invocation,
                               Subject, TestCase, builtin_names, execute,
                               get_subject, random_suite, random_test,
                               sanitize)


def inv(instance, action, seed=0):
    return Invocation(instance, action, seed)


def test_builtin_names():
    assert builtin_names() == ["BoundedStack", "Connection", "KeyedStore",
                               "Tokenizer"]


def test_unknown_subject():
    with pytest.raises(ConfigurationError):
        get_subject("Nope")


def test_bounded_stack_example():
    subject = get_subject("BoundedStack")
    test = TestCase((inv(0, CONSTRUCTOR), inv(0, "push"), inv(0, "isEmpty")))
    result = execute(subject, test, 0)
    assert str(result.traces[0]) == "<init> push:TRUE isEmpty:FALSE END"
    assert result.raised == ("normal", "normal", "normal")
    assert result.leaked == 0


def test_tokenizer_truncation():
    subject = get_subject("Tokenizer")
    test = TestCase((inv(0, CONSTRUCTOR, 1), inv(0, "nextToken"),
                     inv(0, "nextToken")))
    result = execute(subject, test, 0)
    assert str(result.traces[0]) == "<init> nextToken"
    assert not result.traces[0].complete
    assert result.raised == ("normal", "normal", "NoSuchElement")
    [trace] = sanitize([result])
    assert str(trace) == "<init> nextToken END"


def test_invocations_after_exception_are_skipped():
    subject = get_subject("BoundedStack")
    test = TestCase((inv(0, CONSTRUCTOR, 0), inv(0, "pop"), inv(0, "push"),
                     inv(0, "push")))
    result = execute(subject, test, 0)
    assert result.raised == ("normal", "StackEmpty", "skipped", "skipped")
    assert str(result.traces[0]) == "<init>"


def test_unknown_action_is_configuration_error():
    subject = get_subject("BoundedStack")
    with pytest.raises(ConfigurationError):
        execute(subject, TestCase((inv(0, CONSTRUCTOR), inv(0, "nope"))), 0)
    with pytest.raises(ConfigurationError):
        execute(subject, TestCase((inv(0, "push"),)), 0)


def test_empty_alphabet_subject_rejected():
    with pytest.raises(ConfigurationError):
        Subject("Empty", [], lambda: None)


def test_execute_deterministic():
    subject = get_subject("KeyedStore")
    rngs = [random_test(subject, __import__("random").Random(s)) for s in range(20)]
    for test in rngs:
        assert execute(subject, test, 3) == execute(subject, test, 3)


def test_seed_shifts_argument_pools():
    subject = get_subject("Tokenizer")
    test = TestCase((inv(0, CONSTRUCTOR, 0), inv(0, "hasMoreTokens")))
    with_empty = execute(subject, test, 0)   # pool entry "" -> no tokens
    with_one = execute(subject, test, 1)     # shifted to "a"
    assert str(with_empty.traces[0]) == "<init> hasMoreTokens:FALSE END"
    assert str(with_one.traces[0]) == "<init> hasMoreTokens:TRUE END"


def test_leak_drops_all_traces_of_test():
    subject = get_subject("Connection")
    test = TestCase((inv(0, CONSTRUCTOR), inv(1, CONSTRUCTOR),
                     inv(0, "connect"), inv(1, "connect"),
                     inv(1, "close")))
    result = execute(subject, test, 0)
    assert result.leaked == 1
    assert sanitize([result]) == []      # both instances dropped
    closed = TestCase((inv(0, CONSTRUCTOR), inv(0, "connect"),
                       inv(0, "close")))
    ok = execute(subject, closed, 0)
    assert ok.leaked == 0
    assert len(sanitize([ok])) == 1


def test_sanitize_passthrough_identity():
    subject = get_subject("KeyedStore")
    test = TestCase((inv(0, CONSTRUCTOR), inv(0, "put"), inv(0, "get")))
    result = execute(subject, test, 0)
    [trace] = sanitize([result])
    assert trace == result.traces[0]


def test_connection_close_rules():
    subject = get_subject("Connection")
    test = TestCase((inv(0, CONSTRUCTOR), inv(0, "connect"), inv(0, "close"),
                     inv(0, "close")))
    result = execute(subject, test, 0)
    assert result.raised[-1] == "AlreadyClosed"
    test2 = TestCase((inv(0, CONSTRUCTOR), inv(0, "send")))
    assert execute(subject, test2, 0).raised[-1] == "NotConnected"


def test_metadata_export():
    subject = get_subject("BoundedStack")
    doc = json.loads(subject.metadata_json())
    assert doc["name"] == "BoundedStack"
    by_name = {a["action"]: a for a in doc["actions"]}
    assert by_name[CONSTRUCTOR]["constructor"]
    assert by_name["isEmpty"]["pure"] and by_name["isEmpty"]["returns_bool"]
    assert not by_name["pop"]["pure"]
    assert doc["has_ground_truth"]


def test_multi_instance_traces():
    subject = get_subject("BoundedStack")
    test = TestCase((inv(0, CONSTRUCTOR), inv(1, CONSTRUCTOR),
                     inv(1, "push"), inv(0, "isEmpty")))
    result = execute(subject, test, 0)
    assert len(result.traces) == 2
    assert str(result.traces[0]) == "<init> isEmpty:TRUE END"
    assert str(result.traces[1]) == "<init> push:TRUE END"


def _symbols(subject):
    """Every (action, arg_seed) pair that is distinguishable in behavior."""
    symbols = []
    for action in subject.actions:
        if action.is_constructor:
            continue
        seeds = range(max(1, len(action.arg_pool)))
        symbols.extend((action.action, seed) for seed in seeds)
    return symbols


@pytest.mark.parametrize("name", builtin_names())
def test_ground_truth_consistency_exhaustive(name):
    """Sanitized traces of every single-instance test of length <= 6 are
    accepted by the bundled ground truth.

    Instances never interact, so single-instance tests cover every trace a
    longer multi-instance test could contribute.
    """
    subject = get_subject(name)
    truth = subject.ground_truth
    ctor = subject.constructors()[0]
    ctor_seeds = range(max(1, len(ctor.arg_pool)))
    symbols = _symbols(subject)
    checked = 0
    for ctor_seed in ctor_seeds:
        for length in range(6):
            for combo in itertools.product(symbols, repeat=length):
                invocations = [inv(0, ctor.action, ctor_seed)]
                invocations += [inv(0, action, seed) for action, seed in combo]
                result = execute(subject, TestCase(tuple(invocations)), 0)
                for trace in sanitize([result]):
                    checked += 1
                    assert truth.accepts(trace), f"{name} rejects {trace}"
    assert checked > 0


def test_random_suite_deterministic():
    subject = get_subject("Tokenizer")
    assert random_suite(subject, 10, seed=4) == random_suite(subject, 10, seed=4)
    assert random_suite(subject, 10, seed=4) != random_suite(subject, 10, seed=5)


def test_random_tests_are_constructor_first():
    import random as _random
    subject = get_subject("Connection")
    rng = _random.Random(0)
    for _ in range(200):
        test = random_test(subject, rng)
        seen = set()
        for invocation in test.invocations:
            desc = subject.descriptor(invocation.action)
            if invocation.instance not in seen:
                assert desc.is_constructor
                seen.add(invocation.instance)
