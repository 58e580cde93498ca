"""Nondeterministic finite automata over event labels.

States are small integers. Accepting states are exactly those entered by an
END transition, and every END transition leads to a sink with no outgoing
edges, so acceptance of a complete trace reduces to consuming all of its
events (END included) via subset simulation.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from .events import END, EventLabel, PuritySet, Trace, parse_event
from .temporal import PropertyKind, TemporalProperty

Transition = tuple[int, EventLabel, int]


@dataclass(frozen=True)
class Automaton:
    states: frozenset[int]
    initial: int
    transitions: frozenset[Transition]
    accepting: frozenset[int]

    def __post_init__(self) -> None:
        if self.initial not in self.states:
            raise ValueError("initial state missing from state set")
        for src, _, dst in self.transitions:
            if src not in self.states or dst not in self.states:
                raise ValueError("transition endpoints missing from state set")

    @classmethod
    def build(cls, initial: int, transitions: Iterable[Transition],
              accepting: Iterable[int], states: Iterable[int] = ()) -> "Automaton":
        transitions = frozenset(transitions)
        all_states = {initial, *states, *(s for s, _, _ in transitions),
                      *(d for _, _, d in transitions)}
        return cls(frozenset(all_states), initial, transitions,
                   frozenset(accepting))

    def labels(self) -> frozenset[EventLabel]:
        return frozenset(label for _, label, _ in self.transitions)

    def outgoing(self) -> dict[int, list[Transition]]:
        out: dict[int, list[Transition]] = {s: [] for s in self.states}
        for tr in sorted(self.transitions,
                         key=lambda t: (t[0], t[1].sort_key(), t[2])):
            out[tr[0]].append(tr)
        return out

    def step(self, current: frozenset[int], label: EventLabel) -> frozenset[int]:
        return frozenset(dst for src, lab, dst in self.transitions
                         if src in current and lab == label)

    def accepts(self, trace: Trace) -> bool:
        """Subset simulation of a complete (END-terminated) trace."""
        if not trace.complete:
            raise ValueError("acceptance is defined on END-terminated traces")
        current = frozenset([self.initial])
        for event in trace.events:
            current = self.step(current, event)
            if not current:
                return False
        return bool(current & self.accepting)

    def reachable(self) -> frozenset[int]:
        seen = {self.initial}
        queue = deque([self.initial])
        out = self.outgoing()
        while queue:
            state = queue.popleft()
            for _, _, dst in out[state]:
                if dst not in seen:
                    seen.add(dst)
                    queue.append(dst)
        return frozenset(seen)

    def renumbered(self) -> "Automaton":
        """Canonical form: states renumbered 0.. in BFS order from initial."""
        order: dict[int, int] = {self.initial: 0}
        queue = deque([self.initial])
        out = self.outgoing()
        while queue:
            state = queue.popleft()
            for _, _, dst in out[state]:
                if dst not in order:
                    order[dst] = len(order)
                    queue.append(dst)
        for state in sorted(self.states):
            if state not in order:
                order[state] = len(order)
        return Automaton(
            frozenset(order.values()),
            order[self.initial],
            frozenset((order[s], l, order[d]) for s, l, d in self.transitions),
            frozenset(order[s] for s in self.accepting),
        )

    def to_json(self) -> str:
        auto = self.renumbered()
        doc = {
            "states": sorted(auto.states),
            "initial": auto.initial,
            "accepting": sorted(auto.accepting),
            "transitions": [[s, str(l), d] for s, l, d in
                            sorted(auto.transitions,
                                   key=lambda t: (t[0], t[1].sort_key(), t[2]))],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Automaton":
        doc = json.loads(text)
        return cls(
            frozenset(doc["states"]),
            doc["initial"],
            frozenset((s, parse_event(l), d) for s, l, d in doc["transitions"]),
            frozenset(doc["accepting"]),
        )

    def to_dot(self, name: str = "model") -> str:
        auto = self.renumbered()
        lines = [f"digraph {name} {{", "  rankdir=LR;",
                 '  __start [shape=point, label=""];']
        for state in sorted(auto.states):
            shape = "doublecircle" if state in auto.accepting else "circle"
            lines.append(f'  {state} [shape={shape}];')
        lines.append(f"  __start -> {auto.initial};")
        for src, label, dst in sorted(auto.transitions,
                                      key=lambda t: (t[0], t[1].sort_key(), t[2])):
            lines.append(f'  {src} -> {dst} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def save_automaton(path, automaton: Automaton) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(automaton.to_json() + "\n")


def load_automaton(path) -> Automaton:
    with open(path, encoding="utf-8") as fh:
        return Automaton.from_json(fh.read())


def chain_automaton(trace: Trace) -> Automaton:
    """Linear automaton accepting exactly the given complete trace."""
    events = trace.completed().events
    transitions = [(i, ev, i + 1) for i, ev in enumerate(events)]
    return Automaton.build(0, transitions, [len(events)])


# ---------------------------------------------------------------------------
# Finite-trace monitors and the violation check.
#
# Each property kind compiles to a small deterministic monitor over event
# labels. Running a monitor along a complete word and asking its final
# verdict agrees with temporal.check(); the product of an automaton with a
# monitor therefore decides by plain reachability whether some accepted word
# falsifies the property. Self-loop revisits are naturally bounded because a
# (state, monitor-state) pair is never expanded twice.
# ---------------------------------------------------------------------------

_DEAD = "dead"


class _Monitor:
    """Deterministic finite-trace monitor for one property."""

    __slots__ = ("prop", "purity")

    def __init__(self, prop: TemporalProperty, purity: PuritySet) -> None:
        self.prop = prop
        self.purity = purity

    def start(self) -> str:
        return "idle"

    def step(self, state: str, event: EventLabel) -> str:
        # When a == b one occurrence is both a target for earlier triggers
        # and a fresh trigger itself; the branch order below encodes that.
        if state == _DEAD:
            return _DEAD
        a, b, kind = self.prop.a, self.prop.b, self.prop.kind
        pure = self.purity.is_pure(event)
        if kind is PropertyKind.AF:
            # wait: some a still awaits a later b
            if event == a:
                return "wait"
            if event == b:
                return "idle"
            return state
        if kind is PropertyKind.NF:
            if state == "seen" and event == b:
                return _DEAD
            return "seen" if event == a else state
        if kind is PropertyKind.AP:
            # idle: no b yet; safe: a b occurred, everything later is fine.
            # The b branch wins when a == b (weak-until discharge).
            if state == "idle":
                if event == b:
                    return "safe"
                if event == a:
                    return _DEAD
            return state
        if kind is PropertyKind.AIF:
            # wait: only pure events are allowed until the next b
            if state == "wait":
                if event == b:
                    return "wait" if event == a else "idle"
                return "wait" if pure else _DEAD
            return "wait" if event == a else "idle"
        if kind is PropertyKind.NIF:
            # hot: an a is still adjacent modulo pure events
            if state == "hot":
                if event == b:
                    return _DEAD
                if event == a or pure:
                    return "hot"
                return "idle"
            return "hot" if event == a else "idle"
        if kind is PropertyKind.AIP:
            # gap: a b occurred and only pure events have followed it
            if event == a and state != "gap":
                return _DEAD
            if event == b:
                return "gap"
            if state == "gap" and pure:
                return "gap"
            return "idle"
        raise AssertionError(kind)  # pragma: no cover

    def falsified_at_end(self, state: str) -> bool:
        if state == _DEAD:
            return True
        if self.prop.kind in (PropertyKind.AF, PropertyKind.AIF):
            return state == "wait"
        return False


def monitor_verdict(prop: TemporalProperty, trace: Trace, purity: PuritySet) -> bool:
    """True when the complete trace falsifies the property (monitor route)."""
    monitor = _Monitor(prop, purity)
    state = monitor.start()
    for event in trace.body():
        state = monitor.step(state, event)
    return monitor.falsified_at_end(state)


def automaton_violates(automaton: Automaton, prop: TemporalProperty,
                       purity: PuritySet) -> bool:
    """Whether some accepted word of the automaton falsifies the property.

    Decided by reachability on the product with the property's monitor:
    search for an END transition whose monitor state ends falsified.
    """
    monitor = _Monitor(prop, purity)
    out = automaton.outgoing()
    start = (automaton.initial, monitor.start())
    seen = {start}
    queue = deque([start])
    while queue:
        state, mstate = queue.popleft()
        for _, label, dst in out[state]:
            if label.is_end:
                if dst in automaton.accepting and monitor.falsified_at_end(mstate):
                    return True
                continue
            nxt = (dst, monitor.step(mstate, label))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False
