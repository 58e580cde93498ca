"""Two-step automaton inference from sanitized traces.

Step one builds an acceptor of every input trace. Two constraints shape it:
pure events become self-loops instead of fresh states (constraint A), and a
transition is never added where the mined never-followed properties say the
resulting state could accept a forbidden event sequence (constraint B);
incompatible additions branch off from an earlier state instead, which is
where the nondeterminism of the model comes from. Step two merges states
whose enabledness signatures agree, vetoing any merge that would newly let
the automaton accept a word falsifying a mined property.
"""

from __future__ import annotations

import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .automata import Automaton, Transition, automaton_violates
from .events import END, EventLabel, PuritySet, Trace
from .temporal import MinedPropertySet, PropertyKind, TemporalProperty

log = logging.getLogger(__name__)

SINK = 1


class _Rules:
    """Index of the mined NF/NIF pairs consulted during construction."""

    def __init__(self, properties: Iterable[TemporalProperty], purity: PuritySet):
        self.purity = purity
        self.nf: set[tuple[EventLabel, EventLabel]] = set()
        self.nif: set[tuple[EventLabel, EventLabel]] = set()
        for prop in properties:
            if prop.kind is PropertyKind.NF:
                self.nf.add((prop.a, prop.b))
            elif prop.kind is PropertyKind.NIF:
                self.nif.add((prop.a, prop.b))

    def self_forbidden(self, event: EventLabel) -> bool:
        """A self-loop on this label would admit event-after-event itself."""
        pair = (event, event)
        return pair in self.nf or pair in self.nif

    def nif_blocks(self, preds: Iterable[EventLabel], event: EventLabel) -> bool:
        return any((p, event) in self.nif for p in preds)

    def nf_blocks(self, prefix: Iterable[EventLabel], event: EventLabel) -> bool:
        return any((x, event) in self.nf for x in prefix)

    def nif_blocks_after(self, event: EventLabel,
                         succs: Iterable[EventLabel]) -> bool:
        return any((event, y) in self.nif for y in succs)

    def nf_blocks_after(self, event: EventLabel,
                        below: Iterable[EventLabel]) -> bool:
        return any((event, y) in self.nf for y in below)


@dataclass
class AcceptorState:
    """A state of the working acceptor.

    Ancestry is tree-shaped: apart from self-loops, every state has at most
    one incoming transition from another state, so prefixes are well-defined.
    """

    sid: int
    parent: "AcceptorState | None" = None
    parent_label: EventLabel | None = None
    selfloops: set[EventLabel] = field(default_factory=set)
    children: list[tuple[EventLabel, "AcceptorState"]] = field(default_factory=list)
    has_end: bool = False

    @property
    def incoming(self) -> set[EventLabel]:
        labels = set(self.selfloops)
        if self.parent_label is not None:
            labels.add(self.parent_label)
        return labels

    @property
    def prefix(self) -> list[EventLabel]:
        """Ancestor-trail labels; self-loops come before each outgoing step."""
        trail: list[EventLabel] = sorted(self.selfloops, key=EventLabel.sort_key)
        node = self
        while node.parent is not None:
            head = sorted(node.parent.selfloops, key=EventLabel.sort_key)
            head.append(node.parent_label)
            trail = head + trail
            node = node.parent
        return trail

    def out_labels(self) -> set[EventLabel]:
        return self.selfloops | {label for label, _ in self.children}


def _nif_preds(node: AcceptorState, purity: PuritySet) -> set[EventLabel]:
    """Labels that can immediately precede a new event here, modulo pures.

    Self-loops are pure by construction; a pure incoming chain edge (possible
    when constraint A is off or the label was demoted) extends the walk up.
    """
    preds: set[EventLabel] = set()
    current: AcceptorState | None = node
    while current is not None:
        preds |= current.selfloops
        if current.parent_label is None:
            break
        preds.add(current.parent_label)
        if not purity.is_pure(current.parent_label):
            break
        current = current.parent
    return preds


def _nif_succs(node: AcceptorState, purity: PuritySet) -> set[EventLabel]:
    succs: set[EventLabel] = set(node.selfloops)
    stack = [node]
    while stack:
        current = stack.pop()
        for label, child in current.children:
            succs.add(label)
            if purity.is_pure(label):
                succs |= child.selfloops
                stack.append(child)
    return succs


def _subtree_labels(node: AcceptorState) -> set[EventLabel]:
    labels: set[EventLabel] = set(node.selfloops)
    stack = list(node.children)
    while stack:
        label, child = stack.pop()
        labels.add(label)
        labels |= child.selfloops
        stack.extend(child.children)
    return labels


def has_incompatible_transition(state: AcceptorState, event: EventLabel,
                                properties: Iterable[TemporalProperty],
                                purity: PuritySet) -> bool:
    """Whether a fresh outgoing transition on ``event`` is forbidden here.

    True when some NIF(t, event) holds for a label t that can immediately
    precede the new edge, or some NF(x, event) holds for an x in the state's
    prefix.
    """
    rules = properties if isinstance(properties, _Rules) else _Rules(properties, purity)
    return (rules.nif_blocks(_nif_preds(state, purity), event)
            or rules.nf_blocks(set(state.prefix), event))


def _loop_incompatible(node: AcceptorState, event: EventLabel,
                       rules: _Rules) -> bool:
    """Full check for adding a pure self-loop, descendants included.

    Unlike a fresh chain edge, a self-loop also becomes a possible
    predecessor of everything already reachable from the state, so the
    forward direction is checked too.
    """
    purity = rules.purity
    if rules.self_forbidden(event):
        return True
    if rules.nif_blocks(_nif_preds(node, purity), event):
        return True
    if rules.nf_blocks(set(node.prefix), event):
        return True
    if rules.nif_blocks_after(event, _nif_succs(node, purity)):
        return True
    if rules.nf_blocks_after(event, _subtree_labels(node)):
        return True
    return False


def demoted_pure_labels(properties: Iterable[TemporalProperty],
                        purity: PuritySet) -> set[EventLabel]:
    """Pure labels that cannot self-loop without violating a mined property.

    A mined NF(e, e) or NIF(e, e) makes a self-loop on e self-violating (the
    loop taken twice yields e after e), so such labels are demoted to
    ordinary chain edges during construction.
    """
    rules = _Rules(properties, purity)
    return {a for a, b in rules.nf | rules.nif
            if a == b and purity.is_pure(a)}


class _Builder:
    def __init__(self, rules: _Rules, constraint_a: bool, constraint_b: bool):
        self.rules = rules
        self.purity = rules.purity
        self.constraint_a = constraint_a
        self.constraint_b = constraint_b
        self.root = AcceptorState(0)
        self.nodes = [self.root]
        self.next_sid = 2  # 1 is reserved for the END sink
        self.skipped: list[Trace] = []

    def _new_node(self, parent: AcceptorState, label: EventLabel) -> AcceptorState:
        node = AcceptorState(self.next_sid, parent=parent, parent_label=label)
        self.next_sid += 1
        parent.children.append((label, node))
        self.nodes.append(node)
        return node

    def _wants_loop(self, event: EventLabel) -> bool:
        if not self.constraint_a or not self.purity.is_pure(event):
            return False
        if self.constraint_b and self.rules.self_forbidden(event):
            return False
        return True

    def _follow(self, node: AcceptorState, event: EventLabel) -> AcceptorState | None:
        if event in node.selfloops:
            return node
        best: AcceptorState | None = None
        for label, child in node.children:
            if label == event and (best is None or child.sid > best.sid):
                best = child
        return best

    def _extension_mode(self, node: AcceptorState,
                        event: EventLabel) -> str | None:
        """How a fresh ``event`` may attach here: self-loop, chain edge,
        or not at all.

        A pure event whose self-loop would be incompatible is demoted to a
        chain edge when that edge itself is compatible; the chain edge only
        admits the one observed ordering, which the loop cannot express.
        """
        if self._wants_loop(event):
            if not self.constraint_b \
                    or not _loop_incompatible(node, event, self.rules):
                return "loop"
        elif not self.constraint_b:
            return "edge"
        if not has_incompatible_transition(node, event, self.rules,
                                           self.purity):
            return "edge"
        return None

    def _replay(self, anchor: AcceptorState, events: Sequence[EventLabel],
                commit: bool) -> list[AcceptorState] | None:
        """Append a fresh chain for ``events`` at ``anchor`` (or dry-run it).

        The chain starts at the real anchor state; once the first chain edge
        is laid down the remaining checks run against virtual state sets.
        Returns the node visited after each event, or None when some event
        cannot attach compatibly.
        """
        preds = _nif_preds(anchor, self.purity)
        prefix = set(anchor.prefix)
        at_anchor = True
        loops: set[EventLabel] = set()
        plan: list[tuple[str, EventLabel]] = []
        for event in events:
            mode: str | None = None
            if self._wants_loop(event):
                if at_anchor:
                    if event in anchor.selfloops \
                            or not self.constraint_b \
                            or not _loop_incompatible(anchor, event, self.rules):
                        mode = "loop"
                elif not self.constraint_b or not (
                        self.rules.nif_blocks(preds, event)
                        or self.rules.nf_blocks(prefix, event)
                        or self.rules.nif_blocks_after(event, loops)
                        or self.rules.nf_blocks_after(event, loops)):
                    mode = "loop"
            if mode is None:
                # chain-edge fallback; preds/prefix already cover the anchor
                if self.constraint_b and (
                        self.rules.nif_blocks(preds, event)
                        or self.rules.nf_blocks(prefix, event)):
                    return None
                mode = "edge"
            plan.append((mode, event))
            if mode == "loop":
                loops.add(event)
                preds.add(event)
                prefix.add(event)
                continue
            at_anchor = False
            loops = set()
            prefix.add(event)
            if self.purity.is_pure(event):
                preds.add(event)
            else:
                preds = {event}
        if not commit:
            return []
        node = anchor
        visited = []
        for mode, event in plan:
            if mode == "loop":
                node.selfloops.add(event)
            else:
                node = self._new_node(node, event)
            visited.append(node)
        return visited

    def _branch(self, path: list[AcceptorState], events: Sequence[EventLabel],
                idx: int) -> list[AcceptorState] | None:
        """Deepest earlier point whose fresh chain can host the rest.

        The replay repeats the events this trace actually consumed after the
        anchor (pure ones as self-loops where possible), so the trace stays
        accepted.
        """
        for k in range(idx - 1, -1, -1):
            anchor = path[k]
            replay = list(events[k:idx + 1])
            if self._replay(anchor, replay, commit=False) is not None:
                return path[:k + 1] + self._replay(anchor, replay, commit=True)
        return None

    def add_trace(self, trace: Trace) -> bool:
        events = trace.body()
        path = [self.root]  # path[i] is the state after consuming events[:i]
        for idx, event in enumerate(events):
            node = path[-1]
            nxt = self._follow(node, event)
            if nxt is None:
                mode = self._extension_mode(node, event)
                if mode is None:
                    branched = self._branch(path, events, idx)
                    if branched is None:
                        self.skipped.append(trace)
                        log.warning("no compatible attachment point; trace "
                                    "skipped: %s", trace)
                        return False
                    path = branched
                    continue
                if mode == "loop":
                    node.selfloops.add(event)
                    nxt = node
                else:
                    nxt = self._new_node(node, event)
            path.append(nxt)
        path[-1].has_end = True
        return True

    def automaton(self) -> Automaton:
        transitions: list[Transition] = []
        for node in self.nodes:
            for label in node.selfloops:
                transitions.append((node.sid, label, node.sid))
            for label, child in node.children:
                transitions.append((node.sid, label, child.sid))
            if node.has_end:
                transitions.append((node.sid, END, SINK))
        return Automaton.build(0, transitions, [SINK], states=[0, SINK])


def find_branch_ancestor(state: AcceptorState, event: EventLabel,
                         properties: Iterable[TemporalProperty],
                         purity: PuritySet,
                         constraint_a: bool = True,
                         ) -> tuple[AcceptorState, list[EventLabel]]:
    """Walk parent links until suffix + event fit as a fresh chain.

    Returns the state to branch from and the collected chain labels. Raises
    when even the root cannot host the chain.
    """
    builder = _Builder(_Rules(properties, purity), constraint_a, True)
    suffix: list[EventLabel] = []
    node: AcceptorState | None = state
    while node is not None:
        if builder._replay(node, suffix + [event], commit=False) is not None:
            return node, suffix
        if node.parent is None:
            break
        suffix.insert(0, node.parent_label)
        node = node.parent
    raise ValueError(f"no compatible attachment point for {event}")


def build_acceptor(traces: Sequence[Trace],
                   properties: Iterable[TemporalProperty],
                   purity: PuritySet,
                   constraint_a: bool = True,
                   constraint_b: bool = True) -> Automaton:
    """Construct the first-step acceptor of every input trace.

    With both constraints off this is a plain prefix tree acceptor. The
    result accepts every input trace; with constraint B on it additionally
    admits no word falsifying a mined NF or NIF property.
    """
    trace_list = list(traces)
    if not trace_list:
        raise ValueError("cannot build an acceptor from zero traces")
    for trace in trace_list:
        if not trace.complete:
            raise ValueError(f"acceptor input must be END-terminated: {trace}")
    builder = _Builder(_Rules(properties, purity), constraint_a, constraint_b)
    for trace in trace_list:
        builder.add_trace(trace)
    return builder.automaton()


# ---------------------------------------------------------------------------
# Second step: enabledness-signature merging
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateContext:
    prefix: frozenset[EventLabel]
    incoming: frozenset[EventLabel]
    outgoing: frozenset[EventLabel]


def state_contexts(automaton: Automaton) -> dict[int, StateContext]:
    """Prefix/incoming/outgoing label sets for every state.

    On general graphs the prefix of a state is the set of labels occurring
    on some path from the initial state to it, self-loops included.
    """
    incoming: dict[int, set[EventLabel]] = {s: set() for s in automaton.states}
    outgoing: dict[int, set[EventLabel]] = {s: set() for s in automaton.states}
    forward: dict[int, list[tuple[EventLabel, int]]] = {s: [] for s in automaton.states}
    for src, label, dst in automaton.transitions:
        outgoing[src].add(label)
        incoming[dst].add(label)
        forward[src].append((label, dst))
    prefix: dict[int, set[EventLabel]] = {s: set() for s in automaton.states}
    queue = deque([automaton.initial])
    while queue:
        state = queue.popleft()
        for label, dst in forward[state]:
            want = prefix[state] | {label}
            if not want <= prefix[dst]:
                prefix[dst] |= want
                queue.append(dst)
    return {s: StateContext(frozenset(prefix[s]), frozenset(incoming[s]),
                            frozenset(outgoing[s]))
            for s in automaton.states}


def disabled_events(context: StateContext,
                    properties: Iterable[TemporalProperty],
                    purity: PuritySet,
                    alphabet: Iterable[EventLabel]) -> set[EventLabel]:
    """Events the mined never-properties rule out at a state."""
    rules = properties if isinstance(properties, _Rules) else _Rules(properties, purity)
    disabled = set()
    for event in alphabet:
        if event.is_end:
            continue
        if rules.nf_blocks(context.prefix, event) \
                or rules.nif_blocks(context.incoming, event) \
                or (purity.is_pure(event)
                    and rules.nif_blocks_after(event, context.outgoing)):
            disabled.add(event)
    return disabled


def enabled_signature(context: StateContext,
                      properties: Iterable[TemporalProperty],
                      purity: PuritySet,
                      alphabet: Sequence[EventLabel]) -> tuple:
    """The merge key: property-enabled events plus END capability.

    No property can mention END, so END enabledness is read off the state's
    actual transitions instead.
    """
    disabled = disabled_events(context, properties, purity, alphabet)
    enabled = frozenset(l for l in alphabet if not l.is_end) - disabled
    return (enabled, END in context.outgoing)


class _MaskEngine:
    """Bitmask version of contexts and signatures used by the merge loop."""

    def __init__(self, labels: Sequence[EventLabel],
                 properties: Sequence[TemporalProperty],
                 purity: PuritySet) -> None:
        self.labels = [l for l in sorted(set(labels), key=EventLabel.sort_key)
                       if not l.is_end]
        self.bit = {l: 1 << i for i, l in enumerate(self.labels)}
        self.end_bit = 1 << len(self.labels)
        self.bit[END] = self.end_bit
        self.purity = purity
        nf_trig: dict[EventLabel, int] = defaultdict(int)
        nif_trig: dict[EventLabel, int] = defaultdict(int)
        nif_after: dict[EventLabel, int] = defaultdict(int)
        for prop in properties:
            if prop.a not in self.bit or prop.b not in self.bit:
                continue
            if prop.kind is PropertyKind.NF:
                nf_trig[prop.b] |= self.bit[prop.a]
            elif prop.kind is PropertyKind.NIF:
                nif_trig[prop.b] |= self.bit[prop.a]
                nif_after[prop.a] |= self.bit[prop.b]
        self.nf_trig = dict(nf_trig)
        self.nif_trig = dict(nif_trig)
        self.nif_after = dict(nif_after)

    def masks(self, transitions: Iterable[Transition], initial: int,
              states: Iterable[int]):
        """(prefix, suffix, incoming, outgoing) label masks per state."""
        states = list(states)
        forward: dict[int, list[tuple[int, int]]] = {s: [] for s in states}
        backward: dict[int, list[tuple[int, int]]] = {s: [] for s in states}
        inc = {s: 0 for s in states}
        out = {s: 0 for s in states}
        for src, label, dst in transitions:
            b = self.bit[label]
            forward[src].append((b, dst))
            backward[dst].append((b, src))
            out[src] |= b
            inc[dst] |= b
        prefix = {s: 0 for s in states}
        queue = deque([initial])
        while queue:
            state = queue.popleft()
            base = prefix[state]
            for b, dst in forward[state]:
                want = base | b
                if want | prefix[dst] != prefix[dst]:
                    prefix[dst] |= want
                    queue.append(dst)
        suffix = {s: 0 for s in states}
        queue = deque(states)
        while queue:
            state = queue.popleft()
            base = suffix[state]
            for b, src in backward[state]:
                want = base | b
                if want | suffix[src] != suffix[src]:
                    suffix[src] |= want
                    queue.append(src)
        return prefix, suffix, inc, out

    def signature(self, prefix: int, inc: int, out: int) -> tuple[int, bool]:
        enabled = 0
        for label in self.labels:
            b = self.bit[label]
            if self.nf_trig.get(label, 0) & prefix:
                continue
            if self.nif_trig.get(label, 0) & inc:
                continue
            if self.purity.is_pure(label) and self.nif_after.get(label, 0) & out:
                continue
            enabled |= b
        return (enabled, bool(out & self.end_bit))

    def mask_to_labels(self, mask: int) -> frozenset[EventLabel]:
        return frozenset(l for l in self.labels if self.bit[l] & mask)


def _merge_pair(automaton: Automaton, a: int, b: int) -> Automaton:
    fresh = max(automaton.states) + 1
    remap = {a: fresh, b: fresh}
    transitions = frozenset((remap.get(s, s), l, remap.get(d, d))
                            for s, l, d in automaton.transitions)
    states = frozenset(remap.get(s, s) for s in automaton.states)
    accepting = frozenset(remap.get(s, s) for s in automaton.accepting)
    initial = remap.get(automaton.initial, automaton.initial)
    return Automaton(states, initial, transitions, accepting)


def _maybe_violated(prop: TemporalProperty, before: frozenset[EventLabel],
                    after: frozenset[EventLabel]) -> bool:
    """Could merging introduce a new violation of this property?

    A word newly accepted after a merge must route through the merged state,
    so a fresh falsification needs the property's trigger pattern to straddle
    it; anything else was already accepted (and clean) beforehand.
    """
    kind = prop.kind
    if kind in (PropertyKind.NF, PropertyKind.NIF):
        return prop.a in before and prop.b in after
    if kind in (PropertyKind.AF, PropertyKind.AIF):
        return prop.a in before
    return prop.a in after  # AP / AIP


def merge(automaton: Automaton,
          properties: Iterable[TemporalProperty],
          purity: PuritySet) -> Automaton:
    """Merge equal-signature states to a fixpoint.

    Candidate pairs are tried in ascending state-id order; a merge is
    skipped when it would newly let the automaton accept a word falsifying
    any mined property. Acceptance of the input traces is preserved because
    merging only ever grows the accepted language.
    """
    props = list(properties)
    engine = _MaskEngine(sorted(automaton.labels(), key=EventLabel.sort_key),
                         props, purity)
    current = automaton
    end_sinks = {d for _, l, d in current.transitions if l.is_end}
    vetoed: set[tuple[int, int]] = set()
    violated_cache: dict[TemporalProperty, bool] = {}

    def becomes_violated(candidate: Automaton, u_prefix: frozenset,
                         u_suffix: frozenset) -> bool:
        for prop in props:
            if not _maybe_violated(prop, u_prefix, u_suffix):
                continue
            if prop not in violated_cache:
                violated_cache[prop] = automaton_violates(current, prop, purity)
            if violated_cache[prop]:
                continue
            if automaton_violates(candidate, prop, purity):
                return True
        return False

    while True:
        states = sorted(current.states)
        prefix, suffix, inc, out = engine.masks(current.transitions,
                                                current.initial, states)
        sig: dict[int, tuple[int, bool]] = {}
        groups: dict[tuple[int, bool], list[int]] = defaultdict(list)
        for state in states:
            if state in end_sinks:
                continue
            key = engine.signature(prefix[state], inc[state], out[state])
            sig[state] = key
            groups[key].append(state)
        merged = None
        for state in states:
            if state in end_sinks:
                continue
            peers = groups[sig[state]]
            for other in peers:
                if other <= state or (state, other) in vetoed:
                    continue
                candidate = _merge_pair(current, state, other)
                cp, cs, _, _ = engine.masks(candidate.transitions,
                                            candidate.initial, candidate.states)
                u = max(candidate.states)
                u_prefix = engine.mask_to_labels(cp[u])
                u_suffix = engine.mask_to_labels(cs[u])
                if becomes_violated(candidate, u_prefix, u_suffix):
                    vetoed.add((state, other))
                    continue
                merged = candidate
                break
            if merged is not None:
                break
        if merged is None:
            return current
        current = merged
