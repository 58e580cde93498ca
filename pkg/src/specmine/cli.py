"""Command-line interface.

Subcommands mirror the pipeline phases (mine, test, infer, eval, export-dot,
pipeline) plus subject inspection. Exit codes: 0 on success, 2 for
configuration problems (bad flags, unknown subjects, malformed files), 1 for
runtime failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .automata import load_automaton, save_automaton
from .events import (ParseError, PuritySet, heuristic_purity, read_traces,
                     write_traces)
from .inference import build_acceptor, merge
from .pipeline import PhaseError, PipelineConfig, run_pipeline
from .scoring import EvalConfig, evaluate
from .search import SearchConfig, evolve
from .subjects import ConfigurationError, builtin_names, get_subject
from .temporal import (MinedPropertySet, enumerate_candidates, mine,
                       read_properties, write_properties)


def _purity_for(args, labels=None) -> PuritySet:
    """Declared purity when a subject is named, the name heuristic otherwise."""
    if getattr(args, "subject", None):
        return get_subject(args.subject).purity()
    pure = set(getattr(args, "pure", None) or ())
    if labels is not None:
        pure |= {l.action for l in labels
                 if not l.is_end and heuristic_purity(l.action)}
    return PuritySet(pure)


def _cmd_subjects(args) -> int:
    for name in builtin_names():
        print(name)
    return 0


def _cmd_subject_info(args) -> int:
    subject = get_subject(args.subject)
    print(subject.metadata_json())
    if args.out_truth:
        if subject.ground_truth is None:
            raise ConfigurationError(f"{subject.name} has no ground truth")
        save_automaton(args.out_truth, subject.ground_truth)
    return 0


def _cmd_mine(args) -> int:
    traces = read_traces(args.traces)
    labels = {ev for tr in traces for ev in tr.body()}
    purity = _purity_for(args, labels)
    mined = mine([t.completed() for t in traces], purity)
    write_properties(args.out, mined.sorted())
    print(f"mined {len(mined)} properties from {len(traces)} traces")
    return 0


def _cmd_test(args) -> int:
    subject = get_subject(args.subject)
    if args.enumerate_all:
        candidates = enumerate_candidates(subject.event_labels())
        properties = MinedPropertySet({p: 1 for p in candidates})
    else:
        if not args.properties:
            raise ConfigurationError("either --properties or --enumerate-all "
                                     "is required")
        props = read_properties(args.properties)
        properties = MinedPropertySet({p: 1 for p in props})
    config = SearchConfig(
        max_generations=args.budget,
        max_seconds=args.budget_seconds,
        rng_seed=args.seed,
        population_size=args.population,
        workers=args.workers,
    )
    result = evolve(subject, properties, config)
    write_traces(args.out_traces, result.counterexample_traces)
    write_properties(args.out_survivors, result.survivors.sorted())
    falsified = len(properties) - len(result.survivors)
    print(f"falsified {falsified}/{len(properties)} properties; "
          f"{len(result.counterexample_traces)} counterexample traces")
    if args.report_dir:
        from .report import write_search_report
        for path in write_search_report(result.report, Path(args.report_dir)):
            print(f"wrote {path}")
    return 0


def _cmd_infer(args) -> int:
    traces = [t.completed() for t in read_traces(args.traces)]
    props = read_properties(args.properties) if args.properties else []
    labels = {ev for tr in traces for ev in tr.body()}
    purity = _purity_for(args, labels)
    first = build_acceptor(traces, props, purity,
                           constraint_a=not args.no_constraint_a,
                           constraint_b=not args.no_constraint_b)
    merged = merge(first, props, purity)
    save_automaton(args.out_fsa, merged)
    if args.out_first_step:
        save_automaton(args.out_first_step, first)
    print(f"inferred {len(merged.reachable())} states "
          f"from {len(traces)} traces and {len(props)} properties")
    return 0


def _cmd_eval(args) -> int:
    inferred = load_automaton(args.fsa)
    truth = load_automaton(args.truth)
    config = EvalConfig(samples_per_side=args.samples,
                        max_walk_length=args.max_walk,
                        rng_seed=args.seed)
    report = evaluate(inferred, truth, config)
    print(report.summary())
    if args.report_dir:
        from .report import write_eval_report
        for path in write_eval_report(report, Path(args.report_dir)):
            print(f"wrote {path}")
    return 0


def _cmd_export_dot(args) -> int:
    automaton = load_automaton(args.fsa)
    Path(args.out).write_text(automaton.to_dot(), encoding="utf-8")
    print(f"wrote {args.out}")
    return 0


def _cmd_pipeline(args) -> int:
    config = PipelineConfig(
        subject=args.subject,
        initial_tests=args.initial_tests,
        generator_seed=args.generator_seed,
        subset_fraction=args.subset,
        search=SearchConfig(
            max_generations=args.budget,
            max_seconds=args.budget_seconds,
            rng_seed=args.seed,
            population_size=args.population,
            workers=args.workers,
        ),
        constraint_a=not args.no_constraint_a,
        constraint_b=not args.no_constraint_b,
        eval_config=EvalConfig(samples_per_side=args.samples,
                               rng_seed=args.eval_seed),
        remine=args.remine,
    )
    result = run_pipeline(config)
    if args.out_fsa:
        save_automaton(args.out_fsa, result.automaton)
    if args.out_traces:
        write_traces(args.out_traces, result.all_traces)
    if args.out_survivors:
        write_properties(args.out_survivors, result.survivors.sorted())
    if result.eval_report is not None:
        print(result.eval_report.summary())
    print(f"mined={len(result.mined)} survivors={len(result.survivors)} "
          f"states={len(result.automaton.reachable())}")
    if args.report_dir:
        from .report import write_pipeline_report
        for path in write_pipeline_report(result, Path(args.report_dir)):
            print(f"wrote {path}")
    return 0


def _add_purity_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--subject", help="take purity from this subject")
    parser.add_argument("--pure", action="append", metavar="ACTION",
                        help="declare an action pure (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specmine",
        description="Mine automaton specifications from stateful components "
                    "by adversarial trace generation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("subjects", help="list built-in subjects")
    p.set_defaults(fn=_cmd_subjects)

    p = sub.add_parser("subject-info", help="print subject metadata as JSON")
    p.add_argument("--subject", required=True)
    p.add_argument("--out-truth", help="also write the ground-truth automaton")
    p.set_defaults(fn=_cmd_subject_info)

    p = sub.add_parser("mine", help="mine temporal properties from traces")
    p.add_argument("--traces", required=True)
    p.add_argument("--out", required=True)
    _add_purity_flags(p)
    p.set_defaults(fn=_cmd_mine)

    p = sub.add_parser("test", help="search for property counterexamples")
    p.add_argument("--subject", required=True)
    p.add_argument("--properties")
    p.add_argument("--enumerate-all", action="store_true",
                   help="target every template instance over the alphabet")
    p.add_argument("--budget", type=int, default=None,
                   help="generation budget")
    p.add_argument("--budget-seconds", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=50)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-traces", required=True)
    p.add_argument("--out-survivors", required=True)
    p.add_argument("--report-dir")
    p.set_defaults(fn=_cmd_test)

    p = sub.add_parser("infer", help="infer an automaton from traces")
    p.add_argument("--traces", required=True)
    p.add_argument("--properties")
    p.add_argument("--no-constraint-a", action="store_true",
                   help="do not force pure events onto self-loops")
    p.add_argument("--no-constraint-b", action="store_true",
                   help="do not split states on incompatible transitions")
    p.add_argument("--out-fsa", required=True)
    p.add_argument("--out-first-step")
    _add_purity_flags(p)
    p.set_defaults(fn=_cmd_infer)

    p = sub.add_parser("eval", help="score an automaton against a truth")
    p.add_argument("--fsa", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--max-walk", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report-dir")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("export-dot", help="render an automaton to DOT")
    p.add_argument("--fsa", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_export_dot)

    p = sub.add_parser("pipeline", help="run every phase end to end")
    p.add_argument("--subject", required=True)
    p.add_argument("--subset", type=float, default=1.0)
    p.add_argument("--initial-tests", type=int, default=50)
    p.add_argument("--generator-seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--budget-seconds", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=50)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--eval-seed", type=int, default=0)
    p.add_argument("--remine", action="store_true",
                   help="re-mine once over the enlarged trace set")
    p.add_argument("--no-constraint-a", action="store_true")
    p.add_argument("--no-constraint-b", action="store_true")
    p.add_argument("--out-fsa")
    p.add_argument("--out-traces")
    p.add_argument("--out-survivors")
    p.add_argument("--report-dir")
    p.set_defaults(fn=_cmd_pipeline)
    return parser


_CONFIG_ERRORS = (ConfigurationError, ParseError, ValueError,
                  FileNotFoundError, IsADirectoryError, PermissionError)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "budget", "absent") is None \
            and getattr(args, "budget_seconds", "absent") is None \
            and args.command in ("test", "pipeline"):
        # default budgets: the desk-scale wall clock
        args.budget_seconds = 120.0
    try:
        return args.fn(args)
    except PhaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc.cause, _CONFIG_ERRORS) else 1
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
