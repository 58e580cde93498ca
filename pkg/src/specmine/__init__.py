"""Adversarial mining of finite-state-automaton specifications.

The toolkit mines two-event temporal properties from execution traces of a
stateful component, evolves test cases toward counterexamples that prune
spurious properties, infers a purity-aware nondeterministic automaton from
the enlarged trace set, and scores it against a ground-truth model.
"""

from .automata import (Automaton, automaton_violates, chain_automaton,
                       load_automaton, save_automaton)
from .events import (END, ActionDescriptor, EventLabel, ParseError, PuritySet,
                     Trace, format_event, heuristic_purity, parse_event,
                     parse_trace, read_traces, write_traces)
from .fitness import always_property_fitness, nif_fitness, trace_fitness
from .goals import (Archive, CounterexampleGoal, GoalDependencyGraph,
                    GoalState, GoalTracker, MethodGoal, SearchGoal,
                    build_goal_dependencies)
from .inference import (AcceptorState, StateContext, build_acceptor,
                        disabled_events, enabled_signature,
                        find_branch_ancestor, has_incompatible_transition,
                        merge, state_contexts)
from .pipeline import PhaseError, PipelineConfig, PipelineResult, run_pipeline
from .scoring import EvalConfig, EvalReport, evaluate, sample_traces
from .search import EvolveResult, SearchConfig, evolve, rank
from .subjects import (ConfigurationError, ExecutionResult, Invocation,
                       Subject, SubjectException, TestCase, builtin_names,
                       execute, get_subject, random_suite, sanitize)
from .temporal import (MinedPropertySet, PropertyKind, PropertyVerdict,
                       TemporalProperty, check, enumerate_candidates, mine,
                       read_properties, write_properties)

__version__ = "0.1.0"
