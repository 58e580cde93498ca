"""In-process stateful subjects that execute invocation plans into traces.

A subject declares an alphabet of actions (with purity, constructor flags,
and tiny fixed argument pools) and knows how to instantiate itself. The
execution harness runs a test case deterministically, records one trace per
object instance, treats subject-raised exceptions as ordinary data, and
counts leaked resources. Four built-in subjects ship with hand-written
ground-truth automata.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .automata import Automaton
from .events import (END, ActionDescriptor, EventLabel, PuritySet, Trace,
                     heuristic_purity)

CONSTRUCTOR = "<init>"


class ConfigurationError(Exception):
    """A malformed plan or unknown subject; distinct from subject exceptions."""


class SubjectException(Exception):
    """Raised by subject instances; recorded in results, never propagated."""

    def __init__(self, kind: str) -> None:
        super().__init__(kind)
        self.kind = kind


@dataclass(frozen=True, slots=True)
class Invocation:
    instance: int
    action: str
    arg_seed: int = 0


@dataclass(frozen=True, slots=True)
class TestCase:
    __test__ = False  # not a pytest class despite the name

    invocations: tuple[Invocation, ...]

    def __post_init__(self) -> None:
        if not self.invocations:
            raise ValueError("a test case has at least one invocation")

    def __len__(self) -> int:
        return len(self.invocations)


@dataclass(frozen=True)
class ExecutionResult:
    traces: tuple[Trace, ...]
    raised: tuple[str, ...]
    leaked: int


class Subject:
    """A named alphabet plus instantiation behavior.

    ``factory`` builds a fresh instance object from the constructor's pooled
    argument; instance objects expose one method per non-constructor action.
    Purity left undeclared (None) falls back to the name heuristic.
    """

    def __init__(self, name: str, actions: Sequence[ActionDescriptor],
                 factory: Callable[..., object],
                 ground_truth: Automaton | None = None) -> None:
        names = [a.action for a in actions]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate action names in {name}")
        if not any(a.is_constructor for a in actions):
            raise ConfigurationError(f"subject {name} declares no constructor")
        self.name = name
        self.actions = tuple(actions)
        self.factory = factory
        self.ground_truth = ground_truth
        self._by_name = {a.action: a for a in self.actions}

    def descriptor(self, action: str) -> ActionDescriptor:
        try:
            return self._by_name[action]
        except KeyError:
            raise ConfigurationError(
                f"unknown action {action!r} for subject {self.name}") from None

    def constructors(self) -> tuple[ActionDescriptor, ...]:
        return tuple(a for a in self.actions if a.is_constructor)

    def purity(self) -> PuritySet:
        return PuritySet.from_actions(self.actions)

    def event_labels(self) -> list[EventLabel]:
        """Every label the subject can emit, END excluded."""
        labels = [l for a in self.actions for l in a.labels()]
        return sorted(set(labels), key=EventLabel.sort_key)

    def metadata(self) -> dict:
        return {
            "name": self.name,
            "actions": [
                {
                    "action": a.action,
                    "pure": a.is_pure,
                    "constructor": a.is_constructor,
                    "arg_arity": a.arg_arity,
                    "returns_bool": a.returns_bool,
                    "arg_pool": list(a.arg_pool),
                }
                for a in self.actions
            ],
            "has_ground_truth": self.ground_truth is not None,
        }

    def metadata_json(self) -> str:
        return json.dumps(self.metadata(), indent=2, sort_keys=True)


def _pool_value(desc: ActionDescriptor, arg_seed: int, seed: int):
    if desc.arg_arity == 0:
        return None
    return desc.arg_pool[(arg_seed + seed) % len(desc.arg_pool)]


def execute(subject: Subject, test: TestCase, seed: int = 0) -> ExecutionResult:
    """Run a test case; deterministic given (test, seed).

    Each invocation maps its arg_seed (offset by the run seed) through the
    action's argument pool. Boolean returns are abstracted into the event
    label. An exception on an instance ends that instance's trace; later
    invocations on it are skipped.
    """
    instances: dict[int, object] = {}
    events: dict[int, list[EventLabel]] = {}
    dead: set[int] = set()
    raised: list[str] = []

    for inv in test.invocations:
        desc = subject.descriptor(inv.action)
        if inv.instance in dead:
            raised.append("skipped")
            continue
        if desc.is_constructor:
            if inv.instance in instances:
                raise ConfigurationError(
                    f"instance {inv.instance} constructed twice")
        elif inv.instance not in instances:
            raise ConfigurationError(
                f"instance {inv.instance} used before construction")
        arg = _pool_value(desc, inv.arg_seed, seed)
        try:
            if desc.is_constructor:
                obj = subject.factory(arg) if desc.arg_arity else subject.factory()
                instances[inv.instance] = obj
                events[inv.instance] = []
                result = None
            else:
                method = getattr(instances[inv.instance], desc.action)
                result = method(arg) if desc.arg_arity else method()
        except SubjectException as exc:
            raised.append(exc.kind)
            dead.add(inv.instance)
            continue
        raised.append("normal")
        if desc.returns_bool:
            events[inv.instance].append(EventLabel(desc.action, bool(result)))
        else:
            events[inv.instance].append(EventLabel(desc.action))

    leaked = sum(1 for obj in instances.values()
                 if getattr(obj, "leaked", lambda: False)())
    traces = []
    for idx in sorted(events):
        seq = tuple(events[idx])
        if idx not in dead:
            seq = seq + (END,)
        traces.append(Trace(seq))
    return ExecutionResult(tuple(traces), tuple(raised), leaked)


def sanitize(results: Iterable[ExecutionResult]) -> list[Trace]:
    """Keep only trustworthy traces.

    Exceptional suffixes were already cut by execution; each surviving trace
    is END-terminated here. Every trace of a test that leaked a resource is
    dropped, as is any empty trace.
    """
    kept: list[Trace] = []
    for result in results:
        if result.leaked > 0:
            continue
        for trace in result.traces:
            if not trace.body():
                continue
            kept.append(trace.completed())
    return kept


def random_test(subject: Subject, rng: random.Random,
                min_len: int = 2, max_len: int = 10) -> TestCase:
    """One random constructor-first invocation plan.

    Usually a single instance; occasionally two, interleaved, to exercise
    multi-instance traces.
    """
    length = rng.randint(min_len, max_len)
    two = length >= 4 and rng.random() < 0.2
    ctor = rng.choice(subject.constructors())
    other = [a for a in subject.actions if not a.is_constructor]
    invocations = [Invocation(0, ctor.action, rng.randrange(8))]
    second_born = False
    for _ in range(length - 1):
        if two and not second_born and rng.random() < 0.3:
            invocations.append(Invocation(1, ctor.action, rng.randrange(8)))
            second_born = True
            continue
        inst = rng.choice([0, 1]) if second_born else 0
        action = rng.choice(other) if other else ctor
        invocations.append(Invocation(inst, action.action, rng.randrange(8)))
    return TestCase(tuple(invocations))


def random_suite(subject: Subject, count: int, seed: int,
                 min_len: int = 2, max_len: int = 10) -> list[TestCase]:
    rng = random.Random(seed)
    return [random_test(subject, rng, min_len, max_len) for _ in range(count)]


# ---------------------------------------------------------------------------
# Built-in subjects
# ---------------------------------------------------------------------------


class _BoundedStack:
    def __init__(self, capacity: int) -> None:
        self.capacity = capacity
        self.size = 0

    def push(self, _arg) -> bool:
        if self.size >= self.capacity:
            raise SubjectException("StackFull")
        self.size += 1
        return True

    def pop(self) -> None:
        if self.size == 0:
            raise SubjectException("StackEmpty")
        self.size -= 1

    def top(self) -> None:
        if self.size == 0:
            raise SubjectException("StackEmpty")

    def isEmpty(self) -> bool:
        return self.size == 0

    def isFull(self) -> bool:
        return self.size == self.capacity

    def makeEmpty(self) -> None:
        self.size = 0


def _bounded_stack_truth() -> Automaton:
    # States: (capacity, size) for capacity 1..3, plus root 0 and END sink 1.
    ids: dict[tuple[int, int], int] = {}
    next_id = 2
    for cap in (1, 2, 3):
        for size in range(cap + 1):
            ids[(cap, size)] = next_id
            next_id += 1
    t: list[tuple[int, EventLabel, int]] = []
    sink = 1
    for cap in (1, 2, 3):
        t.append((0, EventLabel(CONSTRUCTOR), ids[(cap, 0)]))
        for size in range(cap + 1):
            s = ids[(cap, size)]
            t.append((s, END, sink))
            t.append((s, EventLabel("isEmpty", size == 0), s))
            t.append((s, EventLabel("isFull", size == cap), s))
            t.append((s, EventLabel("makeEmpty"), ids[(cap, 0)]))
            if size < cap:
                t.append((s, EventLabel("push", True), ids[(cap, size + 1)]))
            if size > 0:
                t.append((s, EventLabel("pop"), ids[(cap, size - 1)]))
                t.append((s, EventLabel("top"), s))
    return Automaton.build(0, t, [sink])


class _Tokenizer:
    def __init__(self, text: str) -> None:
        self.remaining = len(text.split())

    def hasMoreTokens(self) -> bool:
        return self.remaining > 0

    def nextToken(self) -> None:
        if self.remaining == 0:
            raise SubjectException("NoSuchElement")
        self.remaining -= 1


def _tokenizer_truth() -> Automaton:
    # States: remaining token count 0..3, plus root 0 and END sink 1.
    t: list[tuple[int, EventLabel, int]] = []
    sink = 1
    ids = {n: n + 2 for n in range(4)}
    for n in range(4):
        s = ids[n]
        t.append((0, EventLabel(CONSTRUCTOR), s))
        t.append((s, END, sink))
        t.append((s, EventLabel("hasMoreTokens", n > 0), s))
        if n > 0:
            t.append((s, EventLabel("nextToken"), ids[n - 1]))
    return Automaton.build(0, t, [sink])


class _KeyedStore:
    def __init__(self) -> None:
        self.keys: set[str] = set()

    def put(self, key: str) -> None:
        self.keys.add(key)

    def get(self, key: str) -> bool:
        return key in self.keys

    def remove(self, key: str) -> bool:
        if key in self.keys:
            self.keys.remove(key)
            return True
        return False

    def isEmpty(self) -> bool:
        return not self.keys

    def clear(self) -> None:
        self.keys.clear()


def _keyed_store_truth() -> Automaton:
    # States by number of distinct keys present (two-key pool): 0, 1, 2.
    t: list[tuple[int, EventLabel, int]] = []
    sink = 1
    ids = {0: 2, 1: 3, 2: 4}
    t.append((0, EventLabel(CONSTRUCTOR), ids[0]))
    for n in (0, 1, 2):
        s = ids[n]
        t.append((s, END, sink))
        t.append((s, EventLabel("isEmpty", n == 0), s))
        t.append((s, EventLabel("clear"), ids[0]))
        if n > 0:
            t.append((s, EventLabel("get", True), s))
            t.append((s, EventLabel("remove", True), ids[n - 1]))
        if n < 2:
            t.append((s, EventLabel("get", False), s))
            t.append((s, EventLabel("remove", False), s))
            t.append((s, EventLabel("put"), ids[n + 1]))
        if n > 0:
            t.append((s, EventLabel("put"), s))
    return Automaton.build(0, t, [sink])


class _Connection:
    def __init__(self) -> None:
        self.state = "fresh"

    def connect(self) -> None:
        if self.state != "fresh":
            raise SubjectException("AlreadyUsed")
        self.state = "open"

    def send(self, _arg) -> None:
        if self.state != "open":
            raise SubjectException("NotConnected")

    def close(self) -> None:
        if self.state == "closed":
            raise SubjectException("AlreadyClosed")
        self.state = "closed"

    def isConnected(self) -> bool:
        return self.state == "open"

    def leaked(self) -> bool:
        return self.state == "open"


def _connection_truth() -> Automaton:
    # 2=fresh, 3=open, 4=closed; no END while open: that would be a leak.
    t = [
        (0, EventLabel(CONSTRUCTOR), 2),
        (2, END, 1),
        (2, EventLabel("isConnected", False), 2),
        (2, EventLabel("connect"), 3),
        (2, EventLabel("close"), 4),
        (3, EventLabel("isConnected", True), 3),
        (3, EventLabel("send"), 3),
        (3, EventLabel("close"), 4),
        (4, EventLabel("isConnected", False), 4),
        (4, END, 1),
    ]
    return Automaton.build(0, t, [1])


def _declared(action: str, **kwargs) -> ActionDescriptor:
    kwargs.setdefault("is_pure", heuristic_purity(action))
    return ActionDescriptor(action, **kwargs)


def _make_bounded_stack() -> Subject:
    actions = [
        _declared(CONSTRUCTOR, is_constructor=True, arg_arity=1,
                  arg_pool=(1, 2, 3)),
        _declared("push", arg_arity=1, returns_bool=True, arg_pool=(0, 1)),
        _declared("pop"),
        _declared("top", is_pure=True),
        _declared("isEmpty", returns_bool=True),
        _declared("isFull", returns_bool=True),
        _declared("makeEmpty"),
    ]
    return Subject("BoundedStack", actions, _BoundedStack,
                   _bounded_stack_truth())


def _make_tokenizer() -> Subject:
    actions = [
        _declared(CONSTRUCTOR, is_constructor=True, arg_arity=1,
                  arg_pool=("", "a", "a b", "a b c")),
        _declared("hasMoreTokens", returns_bool=True),
        _declared("nextToken"),
    ]
    return Subject("Tokenizer", actions, _Tokenizer, _tokenizer_truth())


def _make_keyed_store() -> Subject:
    keys = ("k0", "k1")
    actions = [
        _declared(CONSTRUCTOR, is_constructor=True),
        _declared("put", arg_arity=1, arg_pool=keys),
        _declared("get", is_pure=True, arg_arity=1, returns_bool=True,
                  arg_pool=keys),
        _declared("remove", arg_arity=1, returns_bool=True, arg_pool=keys),
        _declared("isEmpty", returns_bool=True),
        _declared("clear"),
    ]
    return Subject("KeyedStore", actions, _KeyedStore, _keyed_store_truth())


def _make_connection() -> Subject:
    actions = [
        _declared(CONSTRUCTOR, is_constructor=True),
        _declared("connect"),
        _declared("send", arg_arity=1, arg_pool=(b"ping", b"data")),
        _declared("close"),
        _declared("isConnected", returns_bool=True),
    ]
    return Subject("Connection", actions, _Connection, _connection_truth())


_BUILTINS: dict[str, Callable[[], Subject]] = {
    "BoundedStack": _make_bounded_stack,
    "Tokenizer": _make_tokenizer,
    "KeyedStore": _make_keyed_store,
    "Connection": _make_connection,
}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def get_subject(name: str) -> Subject:
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise ConfigurationError(
            f"unknown subject {name!r}; built-ins: {', '.join(builtin_names())}"
        ) from None
