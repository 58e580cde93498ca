"""Independent brute-force evaluators used as oracles by the tests.

These deliberately take a different route from the library: the three
classic templates and the immediate-follow variant are evaluated by a tiny
recursive LTL interpreter over the END-terminated word, while the
immediate-never/immediate-precede variants use explicit window scans. None
of this code shares logic with specmine.temporal or specmine.fitness.
"""

from __future__ import annotations

from specmine.events import EventLabel, PuritySet, Trace
from specmine.temporal import PropertyKind, TemporalProperty

# --- formula interpreter ---------------------------------------------------
# Formulas are tuples: ("atom", label) | ("not", f) | ("or", f, g) |
# ("next", f) | ("finally", f) | ("globally", f) | ("until", f, g) |
# ("implies", f, g)


def _holds(formula, word, i, purity):
    op = formula[0]
    if op == "atom":
        return i < len(word) and word[i] == formula[1]
    if op == "pure":
        return i < len(word) and purity.is_pure(word[i])
    if op == "not":
        return not _holds(formula[1], word, i, purity)
    if op == "or":
        return _holds(formula[1], word, i, purity) or \
            _holds(formula[2], word, i, purity)
    if op == "implies":
        return (not _holds(formula[1], word, i, purity)) or \
            _holds(formula[2], word, i, purity)
    if op == "next":
        return i + 1 < len(word) and _holds(formula[1], word, i + 1, purity)
    if op == "finally":
        return any(_holds(formula[1], word, j, purity)
                   for j in range(i, len(word)))
    if op == "globally":
        return all(_holds(formula[1], word, j, purity)
                   for j in range(i, len(word)))
    if op == "until":
        for j in range(i, len(word)):
            if _holds(formula[2], word, j, purity):
                return all(_holds(formula[1], word, k, purity)
                           for k in range(i, j))
        return False
    raise AssertionError(op)


def _formula(kind: PropertyKind, a: EventLabel, b: EventLabel):
    atom_a = ("atom", a)
    atom_b = ("atom", b)
    if kind is PropertyKind.AF:
        return ("globally", ("implies", atom_a, ("next", ("finally", atom_b))))
    if kind is PropertyKind.NF:
        return ("globally",
                ("implies", atom_a, ("next", ("globally", ("not", atom_b)))))
    if kind is PropertyKind.AP:
        # weak until: (not a) U b, or globally not a
        return ("or", ("until", ("not", atom_a), atom_b),
                ("globally", ("not", atom_a)))
    if kind is PropertyKind.AIF:
        return ("globally",
                ("implies", atom_a, ("next", ("until", ("pure",), atom_b))))
    raise AssertionError(kind)


def brute_falsified(prop: TemporalProperty, trace: Trace,
                    purity: PuritySet) -> bool:
    """Ground truth for 'this complete trace falsifies the property'."""
    word = list(trace.completed().events)  # END included as a plain event
    kind, a, b = prop.kind, prop.a, prop.b
    if kind in (PropertyKind.AF, PropertyKind.NF, PropertyKind.AP,
                PropertyKind.AIF):
        return not _holds(_formula(kind, a, b), word, 0, purity)
    if kind is PropertyKind.NIF:
        # falsified when b occurs after a with only pure events between
        for i in range(len(word)):
            if word[i] != a:
                continue
            for j in range(i + 1, len(word)):
                if word[j] == b and all(purity.is_pure(word[k])
                                        for k in range(i + 1, j)):
                    return True
        return False
    if kind is PropertyKind.AIP:
        # every a needs an earlier b with only pure events between
        for i in range(len(word)):
            if word[i] != a:
                continue
            if not any(word[j] == b and all(purity.is_pure(word[k])
                                            for k in range(j + 1, i))
                       for j in range(i)):
                return True
        return False
    raise AssertionError(kind)


def brute_verdict(prop: TemporalProperty, trace: Trace, purity: PuritySet):
    falsified = brute_falsified(prop, trace, purity)
    trigger = prop.a in trace.body()
    return falsified, trigger and not falsified, trigger


def brute_always_fitness(trace: Trace, prop: TemporalProperty,
                         purity: PuritySet) -> float:
    falsified, supported, _ = brute_verdict(prop, trace, purity)
    if falsified:
        return 0.0
    if supported:
        return 0.33
    body = trace.body()
    if prop.a in body or prop.b in body:
        return 0.66
    return 1.0


def brute_nif_fitness(trace: Trace, prop: TemporalProperty,
                      purity: PuritySet) -> float:
    """Window enumeration: the smallest impure count over all (a, b) windows
    where every event between the window's a and b is pure-or-counted."""
    events = list(trace.body())
    a, b = prop.a, prop.b
    if a not in events:
        return 1.0
    best = None
    for j, ev in enumerate(events):
        if ev != b:
            continue
        # the window pairs this b with the latest a before it
        starts = [i for i in range(j) if events[i] == a]
        if not starts:
            continue
        i = max(starts)
        impure = sum(1 for k in range(i + 1, j)
                     if not purity.is_pure(events[k]))
        if best is None or impure < best:
            best = impure
    if best == 0:
        return 0.0
    if best is None:
        return 1.0
    return min(1.0, best / len(events))
