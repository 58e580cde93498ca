"""Event labels, traces, action metadata, and purity.

Every other module shares the vocabulary defined here: an event is one
abstract method invocation, a trace is the ordered event sequence observed
on a single object instance, and purity marks events that cannot change
object state.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

END_TOKEN = "END"

_ACTION_RE = re.compile(r"[^\s:]+")


class ParseError(ValueError):
    """Raised for text that does not match the label or trace grammar."""


@dataclass(frozen=True, slots=True)
class EventLabel:
    """One event: an action name plus an optional boolean-return abstraction.

    Rendered forms are ``action``, ``action:TRUE``, ``action:FALSE``, or the
    literal ``END`` sentinel that terminates complete traces.
    """

    action: str
    return_abs: bool | None = None
    is_end: bool = False

    def __post_init__(self) -> None:
        if self.is_end and self.return_abs is not None:
            raise ValueError("END carries no return abstraction")

    def __str__(self) -> str:
        if self.is_end:
            return END_TOKEN
        if self.return_abs is None:
            return self.action
        return f"{self.action}:{'TRUE' if self.return_abs else 'FALSE'}"

    def sort_key(self) -> tuple:
        return (self.is_end, self.action, self.return_abs is not None,
                bool(self.return_abs))


END = EventLabel(action=END_TOKEN, is_end=True)


def parse_event(text: str) -> EventLabel:
    """Parse one rendered event label.

    ``format(parse_event(t)) == t`` for every canonical label. Malformed
    text (empty, stray whitespace, or an unknown return abstraction such as
    ``a:MAYBE``) raises :class:`ParseError` naming the offending token.
    """
    if not text:
        raise ParseError("empty event label")
    if text == END_TOKEN:
        return END
    action, sep, ret = text.partition(":")
    if not _ACTION_RE.fullmatch(action):
        raise ParseError(f"malformed action name: {text!r}")
    if not sep:
        return EventLabel(action)
    if ret == "TRUE":
        return EventLabel(action, True)
    if ret == "FALSE":
        return EventLabel(action, False)
    raise ParseError(f"unknown return abstraction {ret!r} in {text!r}")


def format_event(label: EventLabel) -> str:
    return str(label)


def heuristic_purity(action: str) -> bool:
    """Guess purity from the action name alone.

    Names starting with ``is`` or ``has`` followed by an uppercase letter
    (or nothing at all) are treated as getters. Used only as a fallback for
    actions whose subject does not declare purity.
    """
    for prefix in ("is", "has"):
        if action == prefix:
            return True
        if action.startswith(prefix) and action[len(prefix)].isupper():
            return True
    return False


@dataclass(frozen=True, slots=True)
class ActionDescriptor:
    """Metadata for one action of a subject's alphabet.

    ``arg_pool`` holds the fixed table of argument values an invocation's
    ``arg_seed`` indexes into; ``returns_bool`` marks actions whose events
    carry a TRUE/FALSE abstraction.
    """

    action: str
    is_pure: bool = False
    is_constructor: bool = False
    arg_arity: int = 0
    returns_bool: bool = False
    arg_pool: tuple = ()

    def __post_init__(self) -> None:
        if self.arg_arity < 0:
            raise ValueError("arg_arity must be >= 0")
        if self.arg_arity > 0 and not self.arg_pool:
            raise ValueError(f"action {self.action!r} takes arguments but has"
                             " an empty pool")

    def labels(self) -> tuple[EventLabel, ...]:
        """All event labels this action can emit."""
        if self.returns_bool:
            return (EventLabel(self.action, True), EventLabel(self.action, False))
        return (EventLabel(self.action),)


class PuritySet:
    """The set of side-effect-free events, keyed by action name.

    Membership is closed under return abstraction: if ``isEmpty`` is pure
    then both ``isEmpty:TRUE`` and ``isEmpty:FALSE`` are members. END is
    never pure.
    """

    __slots__ = ("pure_actions",)

    def __init__(self, pure_actions: Iterable[str] = ()) -> None:
        self.pure_actions = frozenset(pure_actions)

    @classmethod
    def from_actions(cls, actions: Iterable[ActionDescriptor]) -> "PuritySet":
        return cls(a.action for a in actions if a.is_pure)

    @classmethod
    def from_labels(cls, labels: Iterable[EventLabel]) -> "PuritySet":
        return cls(l.action for l in labels if not l.is_end)

    def is_pure(self, event: EventLabel) -> bool:
        return not event.is_end and event.action in self.pure_actions

    def pure_events(self, alphabet: Iterable[EventLabel]) -> frozenset[EventLabel]:
        return frozenset(l for l in alphabet if self.is_pure(l))

    def __contains__(self, event: EventLabel) -> bool:
        return self.is_pure(event)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PuritySet) and self.pure_actions == other.pure_actions

    def __hash__(self) -> int:
        return hash(self.pure_actions)

    def __repr__(self) -> str:
        return f"PuritySet({sorted(self.pure_actions)!r})"


EMPTY_PURITY = PuritySet()


@dataclass(frozen=True, slots=True)
class Trace:
    """Ordered events observed on one object instance.

    A complete trace ends with the END sentinel; END appears nowhere else.
    """

    events: tuple[EventLabel, ...]

    def __post_init__(self) -> None:
        for i, ev in enumerate(self.events):
            if ev.is_end and i != len(self.events) - 1:
                raise ValueError("END may only appear at the final position")

    @classmethod
    def of(cls, *labels: str | EventLabel) -> "Trace":
        events = tuple(l if isinstance(l, EventLabel) else parse_event(l)
                       for l in labels)
        return cls(events)

    @property
    def complete(self) -> bool:
        return bool(self.events) and self.events[-1].is_end

    def body(self) -> tuple[EventLabel, ...]:
        """Events without the END sentinel."""
        if self.complete:
            return self.events[:-1]
        return self.events

    def completed(self) -> "Trace":
        """This trace, END-terminated."""
        if self.complete:
            return self
        return Trace(self.events + (END,))

    def reversed(self) -> "Trace":
        """Body events in reverse order; the END sentinel is dropped."""
        return Trace(tuple(reversed(self.body())))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[EventLabel]:
        return iter(self.events)

    def __str__(self) -> str:
        return " ".join(str(ev) for ev in self.events)


def parse_trace(line: str) -> Trace:
    tokens = line.split()
    if not tokens:
        raise ParseError("empty trace line")
    return Trace(tuple(parse_event(tok) for tok in tokens))


def read_traces(path) -> list[Trace]:
    """Read a trace file: one trace per line, ``#`` lines are comments."""
    traces = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                traces.append(parse_trace(line))
            except ParseError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return traces


def write_traces(path, traces: Sequence[Trace]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trace in traces:
            fh.write(str(trace) + "\n")
