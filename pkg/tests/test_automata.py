import pytest

from specmine.automata import (Automaton, automaton_violates, chain_automaton,
                               load_automaton, monitor_verdict, save_automaton)
from specmine.events import END, EventLabel, PuritySet, Trace
from specmine.temporal import (PropertyKind, TemporalProperty, check,
                               enumerate_candidates)

from conftest import all_traces

A, B, P = EventLabel("a"), EventLabel("b"), EventLabel("p")


def prop(kind, a, b):
    return TemporalProperty(PropertyKind(kind), a, b)


def fig7_model():
    """The looping tokenizer shape: one busy state, one exhausted state."""
    t = [
        (0, EventLabel("StringTokenizer"), 1),
        (0, EventLabel("StringTokenizer"), 2),
        (1, EventLabel("hasMoreTokens", True), 1),
        (1, EventLabel("nextToken"), 1),
        (1, EventLabel("nextToken"), 2),
        (1, END, 3),
        (2, EventLabel("hasMoreTokens", False), 2),
        (2, END, 3),
    ]
    return Automaton.build(0, t, [3])


def test_accepts_fig7_walks():
    model = fig7_model()
    assert model.accepts(Trace.of("StringTokenizer", "hasMoreTokens:TRUE",
                                  "nextToken", "hasMoreTokens:FALSE", "END"))
    assert model.accepts(Trace.of("StringTokenizer", "hasMoreTokens:FALSE",
                                  "END"))
    assert not model.accepts(Trace.of("StringTokenizer", "nextToken",
                                      "StringTokenizer", "END"))


def test_chain_accepts_only_itself():
    chain = chain_automaton(Trace.of("a", "END"))
    assert chain.accepts(Trace.of("a", "END"))
    assert not chain.accepts(Trace.of("b", "END"))
    assert not chain.accepts(Trace.of("a", "a", "END"))


def test_accepts_requires_complete_trace():
    with pytest.raises(ValueError):
        fig7_model().accepts(Trace.of("StringTokenizer"))


def test_pure_permutation_acceptance():
    """Self-loops accept reordered adjacent pure events."""
    from specmine.inference import build_acceptor
    purity = PuritySet({"hasMoreTokens", "hasMoreElements"})
    observed = Trace.of("<init>", "hasMoreTokens:TRUE", "hasMoreElements:TRUE",
                        "END")
    model = build_acceptor([observed], [], purity)
    permuted = Trace.of("<init>", "hasMoreElements:TRUE", "hasMoreTokens:TRUE",
                        "END")
    assert model.accepts(observed)
    assert model.accepts(permuted)


def test_json_roundtrip(tmp_path):
    model = fig7_model()
    path = tmp_path / "model.json"
    save_automaton(path, model)
    loaded = load_automaton(path)
    assert loaded.to_json() == model.to_json()
    for trace in (Trace.of("StringTokenizer", "hasMoreTokens:FALSE", "END"),
                  Trace.of("StringTokenizer", "END")):
        assert loaded.accepts(trace) == model.accepts(trace)


def test_dot_export():
    dot = fig7_model().to_dot()
    assert dot.startswith("digraph")
    assert "doublecircle" in dot
    assert '__start ->' in dot
    assert 'label="hasMoreTokens:TRUE"' in dot


def test_renumbered_is_canonical():
    model = fig7_model()
    shifted = Automaton.build(
        100, [(s + 100, l, d + 100) for s, l, d in model.transitions],
        [s + 100 for s in model.accepting])
    assert shifted.to_json() == model.to_json()


def test_monitor_agrees_with_check(tiny_alphabet, tiny_purity):
    """The monitor route and the scanning route agree on falsification."""
    for trace in all_traces(tiny_alphabet, 4):
        for cand in enumerate_candidates(tiny_alphabet):
            assert monitor_verdict(cand, trace, tiny_purity) == \
                check(cand, trace, tiny_purity).falsified, (cand, trace)


def test_chain_violates_iff_trace_falsifies(tiny_alphabet, tiny_purity):
    """On a single-trace chain, violation equals trace falsification."""
    for trace in all_traces(tiny_alphabet, 3):
        chain = chain_automaton(trace)
        for cand in enumerate_candidates(tiny_alphabet):
            assert automaton_violates(chain, cand, tiny_purity) == \
                check(cand, trace, tiny_purity).falsified


def test_violates_reachability_fixture():
    # a -> x -> b chain: NF(a, b) violated, NF(b, a) not
    model = chain_automaton(Trace.of("a", "x", "b", "END"))
    none = PuritySet()
    assert automaton_violates(model, prop("NF", A, B), none)
    assert not automaton_violates(model, prop("NF", B, A), none)


def test_violates_selfloop_unrolling():
    # the looping exhausted state admits nextToken after hasMore:FALSE only
    # if such an edge exists; with it, the never-follow property is violated
    bad = Automaton.build(0, [
        (0, EventLabel("It"), 1),
        (1, EventLabel("hasMore", False), 1),
        (1, EventLabel("nextToken"), 1),
        (1, END, 2),
    ], [2])
    purity = PuritySet({"hasMore"})
    violated = prop("NIF", EventLabel("hasMore", False), EventLabel("nextToken"))
    assert automaton_violates(bad, violated, purity)
    # a single self-loop must be traversable twice: NF(p, p) over loop p
    loopy = Automaton.build(0, [(0, P, 0), (0, END, 1)], [1])
    assert automaton_violates(loopy, prop("NF", P, P), PuritySet({"p"}))
