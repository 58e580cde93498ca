"""Random-walk scoring of an inferred automaton against a ground truth.

Both models emit sample traces by uniform random edge walks; precision is
the fraction of inferred-model samples the truth accepts, recall the
fraction of truth samples the inferred model accepts, combined by the
harmonic mean.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .automata import Automaton
from .events import EventLabel, Trace


@dataclass(frozen=True)
class EvalConfig:
    samples_per_side: int = 500
    max_walk_length: int = 50
    rng_seed: int = 0

    def validate(self) -> None:
        if self.samples_per_side <= 0 or self.max_walk_length <= 0:
            raise ValueError("sample counts must be positive")


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f_measure: float
    inferred_samples: int
    truth_samples: int
    seed: int

    def summary(self) -> str:
        return (f"P={self.precision:.3f} R={self.recall:.3f} "
                f"F={self.f_measure:.3f}")

    def to_json(self) -> str:
        return json.dumps({
            "precision": round(self.precision, 6),
            "recall": round(self.recall, 6),
            "f_measure": round(self.f_measure, 6),
            "inferred_samples": self.inferred_samples,
            "truth_samples": self.truth_samples,
            "seed": self.seed,
        }, indent=2, sort_keys=True)


def f_measure(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def sample_traces(model: Automaton, config: EvalConfig) -> list[Trace]:
    """Uniform out-edge walks from the initial state until END is taken.

    Walks that fail to terminate within the length bound are rejected and
    resampled, with a retry budget to keep pathological models from spinning
    forever.
    """
    config.validate()
    out = {state: sorted(edges, key=lambda t: (t[1].sort_key(), t[2]))
           for state, edges in model.outgoing().items()}
    if not _accepting_reachable(model):
        raise ValueError("model has no reachable accepting path to sample")
    rng = random.Random(config.rng_seed)
    samples: list[Trace] = []
    attempts = 0
    budget = config.samples_per_side * 1000
    while len(samples) < config.samples_per_side:
        attempts += 1
        if attempts > budget:
            raise RuntimeError("sampling retry budget exhausted")
        state = model.initial
        events: list[EventLabel] = []
        for _ in range(config.max_walk_length):
            edges = out[state]
            if not edges:
                break
            _, label, dst = edges[rng.randrange(len(edges))]
            events.append(label)
            state = dst
            if label.is_end:
                break
        if events and events[-1].is_end and state in model.accepting:
            samples.append(Trace(tuple(events)))
    return samples


def _accepting_reachable(model: Automaton) -> bool:
    reachable = model.reachable()
    return any((s in reachable and label.is_end and d in model.accepting)
               for s, label, d in model.transitions)


def evaluate(inferred: Automaton, truth: Automaton,
             config: EvalConfig) -> EvalReport:
    """Cross-acceptance scores between the two models under one seed."""
    inferred_samples = sample_traces(inferred, config)
    truth_samples = sample_traces(truth, config)
    accepted_by_truth = sum(1 for t in inferred_samples if truth.accepts(t))
    accepted_by_inferred = sum(1 for t in truth_samples if inferred.accepts(t))
    precision = accepted_by_truth / len(inferred_samples)
    recall = accepted_by_inferred / len(truth_samples)
    return EvalReport(
        precision=precision,
        recall=recall,
        f_measure=f_measure(precision, recall),
        inferred_samples=len(inferred_samples),
        truth_samples=len(truth_samples),
        seed=config.rng_seed,
    )
