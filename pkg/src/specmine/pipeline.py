"""End-to-end orchestration: mine, falsify, infer, score.

The pipeline exercises a generated initial suite, mines temporal properties
from the sanitized traces, searches for counterexamples to prune spurious
properties, feeds the enlarged trace set and the survivors into the
automaton inference, and scores the result against the subject's bundled
ground truth when one exists.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .automata import Automaton
from .events import Trace
from .inference import build_acceptor, merge
from .scoring import EvalConfig, EvalReport, evaluate
from .search import EvolveResult, SearchConfig, SearchReport, evolve
from .subjects import Subject, execute, get_subject, random_suite, sanitize
from .temporal import MinedPropertySet, mine


class PhaseError(Exception):
    """A pipeline phase failed; carries the phase name."""

    def __init__(self, phase: str, cause: Exception) -> None:
        super().__init__(f"[{phase}] {cause}")
        self.phase = phase
        self.cause = cause


@dataclass(frozen=True)
class PipelineConfig:
    subject: str
    initial_tests: int = 50
    generator_seed: int = 0
    subset_fraction: float = 1.0
    search: SearchConfig = field(default_factory=lambda: SearchConfig(
        max_seconds=120.0))
    constraint_a: bool = True
    constraint_b: bool = True
    eval_config: EvalConfig = field(default_factory=EvalConfig)
    remine: bool = False

    def validate(self) -> None:
        if not 0.0 < self.subset_fraction <= 1.0:
            raise ValueError("subset fraction must be in (0, 1]")
        if self.initial_tests <= 0:
            raise ValueError("initial test count must be positive")


@dataclass
class PipelineResult:
    subject: str
    automaton: Automaton
    first_step: Automaton
    mined: MinedPropertySet
    survivors: MinedPropertySet
    initial_traces: list[Trace]
    all_traces: list[Trace]
    search_report: SearchReport | None
    eval_report: EvalReport | None
    phase_stats: dict

    def report_doc(self) -> dict:
        doc = {
            "subject": self.subject,
            "phases": self.phase_stats,
            "mined_properties": len(self.mined),
            "surviving_properties": len(self.survivors),
            "initial_traces": len(self.initial_traces),
            "total_traces": len(self.all_traces),
            "states": len(self.automaton.reachable()),
        }
        if self.search_report is not None:
            doc["search"] = self.search_report.to_doc()
        if self.eval_report is not None:
            doc["eval"] = {
                "precision": round(self.eval_report.precision, 6),
                "recall": round(self.eval_report.recall, 6),
                "f_measure": round(self.eval_report.f_measure, 6),
                "seed": self.eval_report.seed,
            }
        return doc


def _phase(name: str):
    def wrap(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as exc:
            raise PhaseError(name, exc) from exc
    return wrap


def initial_trace_corpus(subject: Subject, config: PipelineConfig) -> list[Trace]:
    suite = random_suite(subject, config.initial_tests, config.generator_seed)
    keep = math.ceil(len(suite) * config.subset_fraction)
    results = [execute(subject, test, config.generator_seed)
               for test in suite[:keep]]
    return sanitize(results)


def run_pipeline(config: PipelineConfig,
                 subject: Subject | None = None) -> PipelineResult:
    """Run all phases for one subject under one configuration."""
    config.validate()
    stats: dict[str, dict] = {}
    if subject is None:
        subject = _phase("setup")(get_subject, config.subject)
    purity = subject.purity()

    t0 = time.monotonic()
    initial_traces = _phase("execute-initial")(initial_trace_corpus,
                                               subject, config)
    if not initial_traces:
        raise PhaseError("execute-initial",
                         ValueError("initial suite produced no usable traces"))
    stats["execute-initial"] = {"traces": len(initial_traces),
                                "seconds": round(time.monotonic() - t0, 3)}

    t0 = time.monotonic()
    mined = _phase("mine")(mine, initial_traces, purity)
    stats["mine"] = {"properties": len(mined),
                     "seconds": round(time.monotonic() - t0, 3)}

    search_report: SearchReport | None = None
    survivors = mined
    extra_traces: list[Trace] = []
    if config.search.max_generations == 0:
        stats["search"] = {"skipped": True}
    else:
        t0 = time.monotonic()
        outcome: EvolveResult = _phase("search")(evolve, subject, mined,
                                                 config.search)
        survivors = outcome.survivors
        extra_traces = outcome.counterexample_traces
        search_report = outcome.report
        stats["search"] = {
            "falsified": len(mined) - len(survivors),
            "counterexample_traces": len(extra_traces),
            "generations": search_report.total_generations,
            "seconds": round(time.monotonic() - t0, 3),
        }

    all_traces = initial_traces + extra_traces
    if config.remine:
        survivors = _phase("remine")(mine, all_traces, purity)
        stats["remine"] = {"properties": len(survivors)}

    t0 = time.monotonic()
    first_step = _phase("infer")(build_acceptor, all_traces, survivors, purity,
                                 config.constraint_a, config.constraint_b)
    merged = _phase("infer")(merge, first_step, survivors, purity)
    stats["infer"] = {
        "first_step_states": len(first_step.states),
        "merged_states": len(merged.reachable()),
        "seconds": round(time.monotonic() - t0, 3),
    }

    eval_report: EvalReport | None = None
    if subject.ground_truth is not None:
        t0 = time.monotonic()
        eval_report = _phase("eval")(evaluate, merged, subject.ground_truth,
                                     config.eval_config)
        stats["eval"] = {"f_measure": round(eval_report.f_measure, 6),
                         "seconds": round(time.monotonic() - t0, 3)}

    return PipelineResult(
        subject=subject.name,
        automaton=merged,
        first_step=first_step,
        mined=mined,
        survivors=survivors,
        initial_traces=initial_traces,
        all_traces=all_traces,
        search_report=search_report,
        eval_report=eval_report,
        phase_stats=stats,
    )
