"""Fitness of traces and tests with respect to counterexample search goals.

A goal is covered at fitness 0, i.e. when a trace falsifies the targeted
property. The "always" templates use four evenly spaced cost buckets that
order traces by how many edits away from a counterexample they are; NIF
gets a finer distance-based cost. A test scores the best (minimum) fitness
over the traces it produced.
"""

from __future__ import annotations

from typing import Sequence

from .events import EventLabel, PuritySet, Trace
from .temporal import PropertyKind, TemporalProperty, check, contains_either

FALSIFIED = 0.0
SUPPORTED = 0.33
TOUCHED = 0.66
IRRELEVANT = 1.0


def always_property_fitness(trace: Trace, prop: TemporalProperty,
                            purity: PuritySet) -> float:
    """Bucketed cost for every template except NIF.

    0.0 falsifying, 0.33 supporting, 0.66 when either event occurs without
    support, 1.0 otherwise. Scoring the forward-looking templates equals
    scoring their precedence duals on the reversed trace, except that the
    weak-until discharge makes AP(a, a) unfalsifiable; evaluating the
    template directly covers that corner as well.
    """
    if prop.kind is PropertyKind.NIF:
        raise ValueError("NIF goals use nif_fitness")
    verdict = check(prop, trace, purity)
    if verdict.falsified:
        return FALSIFIED
    if verdict.supported:
        return SUPPORTED
    if contains_either(prop, trace):
        return TOUCHED
    return IRRELEVANT


def nif_fitness(trace: Trace, prop: TemporalProperty, purity: PuritySet) -> float:
    """Distance-based cost for NIF goals.

    One pass records, for each occurrence of b, the number of impure events
    since the latest a. Distance zero covers the goal; a trace without a is
    irrelevant; otherwise the cost is the distance over the trace length,
    clamped into [0, 1].
    """
    if prop.kind is not PropertyKind.NIF:
        raise ValueError("nif_fitness only scores NIF goals")
    events = trace.body()
    a, b = prop.a, prop.b
    seen_a = False
    counter = 0
    distance: float = float("inf")
    for event in events:
        if seen_a and event == b:
            distance = min(distance, counter)
        if event == a:
            seen_a = True
            counter = 0
            continue
        if seen_a and not purity.is_pure(event):
            counter += 1
    if distance == 0:
        return 0.0
    if not seen_a:
        return 1.0
    if distance == float("inf"):
        return 1.0
    return min(1.0, distance / len(events))


def trace_fitness(trace: Trace, prop: TemporalProperty, purity: PuritySet) -> float:
    if prop.kind is PropertyKind.NIF:
        return nif_fitness(trace, prop, purity)
    return always_property_fitness(trace, prop, purity)


def method_fitness(trace: Trace, label: EventLabel) -> float:
    """Binary cost of a method-coverage goal on one trace."""
    return 0.0 if label in trace.body() else 1.0


def best_over_traces(traces: Sequence[Trace], score) -> float:
    """Minimum score over a test's traces; worst case when none survived."""
    if not traces:
        return 1.0
    return min(score(trace) for trace in traces)
