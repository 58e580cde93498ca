"""Temporal-property templates over finite traces, and the trace miner.

Six two-event templates are supported. The three "immediately" variants
(AIF, NIF, AIP) skip side-effect-free events when judging adjacency, so a
purity set is part of every evaluation. The trigger and target occurrences
themselves are always matched literally, even when pure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .events import EventLabel, ParseError, PuritySet, Trace, parse_event


class PropertyKind(enum.Enum):
    AF = "AF"    # a is always eventually followed by b
    NF = "NF"    # a is never followed by b
    AP = "AP"    # a is always preceded by b
    AIF = "AIF"  # a is always immediately followed by b, modulo pure events
    NIF = "NIF"  # a is never immediately followed by b, modulo pure events
    AIP = "AIP"  # a is always immediately preceded by b, modulo pure events

    def __str__(self) -> str:
        return self.value


KIND_ORDER = tuple(PropertyKind)


@dataclass(frozen=True, slots=True)
class TemporalProperty:
    kind: PropertyKind
    a: EventLabel
    b: EventLabel

    def __post_init__(self) -> None:
        if self.a.is_end or self.b.is_end:
            raise ValueError("temporal properties may not reference END")

    def __str__(self) -> str:
        return f"{self.kind} {self.a} {self.b}"

    def sort_key(self) -> tuple:
        return (KIND_ORDER.index(self.kind), self.a.sort_key(), self.b.sort_key())


@dataclass(frozen=True, slots=True)
class PropertyVerdict:
    """Outcome of checking one property against one trace.

    A trace may contain both supporting and falsifying occurrences; the
    falsification dominates, so ``supported`` is true only when the trigger
    occurred and nothing falsified.
    """

    falsified: bool
    supported: bool
    trigger_seen: bool


def _pure_gap(events: Sequence[EventLabel], i: int, j: int, purity: PuritySet) -> bool:
    """True when every event strictly between positions i and j is pure."""
    return all(purity.is_pure(events[k]) for k in range(i + 1, j))


def check(prop: TemporalProperty, trace: Trace, purity: PuritySet) -> PropertyVerdict:
    """Evaluate one property on one finite trace.

    The END sentinel never matches the property's events; it only ends the
    scan. Each template is applied at every occurrence of its trigger.
    """
    events = trace.body()
    a, b = prop.a, prop.b
    a_positions = [i for i, ev in enumerate(events) if ev == a]
    b_positions = [i for i, ev in enumerate(events) if ev == b]
    trigger_seen = bool(a_positions)
    kind = prop.kind

    if kind is PropertyKind.AF:
        falsified = any(not any(j > i for j in b_positions) for i in a_positions)
    elif kind is PropertyKind.NF:
        falsified = any(any(j > i for j in b_positions) for i in a_positions)
    elif kind is PropertyKind.AP:
        # weak-until reading: some b with no a strictly before it discharges
        # every later a; when a == b the first occurrence is that b
        clean_b = any(not any(k < j for k in a_positions) for j in b_positions)
        falsified = bool(a_positions) and not clean_b
    elif kind is PropertyKind.AIF:
        falsified = any(
            not any(j > i and _pure_gap(events, i, j, purity) for j in b_positions)
            for i in a_positions)
    elif kind is PropertyKind.NIF:
        falsified = any(
            any(j > i and _pure_gap(events, i, j, purity) for j in b_positions)
            for i in a_positions)
    elif kind is PropertyKind.AIP:
        falsified = any(
            not any(j < i and _pure_gap(events, j, i, purity) for j in b_positions)
            for i in a_positions)
    else:  # pragma: no cover - enum is exhaustive
        raise AssertionError(kind)

    return PropertyVerdict(falsified=falsified,
                           supported=trigger_seen and not falsified,
                           trigger_seen=trigger_seen)


def contains_either(prop: TemporalProperty, trace: Trace) -> bool:
    body = trace.body()
    return prop.a in body or prop.b in body


def enumerate_candidates(alphabet: Iterable[EventLabel]) -> list[TemporalProperty]:
    """All template instances over ordered event pairs, a == b included.

    Yields ``6 * n**2`` candidates for an n-label alphabet, in a fixed
    sorted order.
    """
    labels = sorted(set(alphabet), key=EventLabel.sort_key)
    for label in labels:
        if label.is_end:
            raise ValueError("candidate alphabet may not include END")
    return [TemporalProperty(kind, a, b)
            for kind in KIND_ORDER for a in labels for b in labels]


@dataclass(frozen=True)
class MinedPropertySet:
    """Properties that survived mining, with their per-trace support counts."""

    support: Mapping[TemporalProperty, int]

    @property
    def properties(self) -> frozenset[TemporalProperty]:
        return frozenset(self.support)

    def sorted(self) -> list[TemporalProperty]:
        return sorted(self.support, key=TemporalProperty.sort_key)

    def of_kind(self, *kinds: PropertyKind) -> list[TemporalProperty]:
        return [p for p in self.sorted() if p.kind in kinds]

    def without(self, dropped: Iterable[TemporalProperty]) -> "MinedPropertySet":
        gone = set(dropped)
        return MinedPropertySet({p: n for p, n in self.support.items()
                                 if p not in gone})

    def __len__(self) -> int:
        return len(self.support)

    def __iter__(self):
        return iter(self.sorted())

    def __contains__(self, prop: TemporalProperty) -> bool:
        return prop in self.support


def alphabet_of(traces: Iterable[Trace]) -> list[EventLabel]:
    labels = {ev for trace in traces for ev in trace.body()}
    return sorted(labels, key=EventLabel.sort_key)


def mine(traces: Sequence[Trace], purity: PuritySet,
         candidates: Sequence[TemporalProperty] | None = None) -> MinedPropertySet:
    """Mine every candidate property that no trace falsifies.

    Admission needs a support of at least one (some trace where the trigger
    occurred and the property held) and a confidence of exactly 1.0 (no
    falsifying trace at all).
    """
    if not traces:
        raise ValueError("cannot mine from an empty trace corpus")
    if candidates is None:
        candidates = enumerate_candidates(alphabet_of(traces))
    support: dict[TemporalProperty, int] = {}
    for prop in candidates:
        count = 0
        falsified = False
        for trace in traces:
            verdict = check(prop, trace, purity)
            if verdict.falsified:
                falsified = True
                break
            if verdict.supported:
                count += 1
        if not falsified and count > 0:
            support[prop] = count
    return MinedPropertySet(support)


def parse_property(line: str) -> TemporalProperty:
    tokens = line.split()
    if len(tokens) != 3:
        raise ParseError(f"expected 'KIND a b', got {line!r}")
    kind_text, a_text, b_text = tokens
    try:
        kind = PropertyKind(kind_text)
    except ValueError:
        raise ParseError(f"unknown property kind {kind_text!r}") from None
    return TemporalProperty(kind, parse_event(a_text), parse_event(b_text))


def read_properties(path) -> list[TemporalProperty]:
    """Read a property file: one ``KIND a b`` line per property."""
    props = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                props.append(parse_property(line))
            except (ParseError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return props


def write_properties(path, props: Iterable[TemporalProperty]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for prop in sorted(props, key=TemporalProperty.sort_key):
            fh.write(f"{prop}\n")
