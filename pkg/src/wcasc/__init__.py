"""Worst-case adaptive submodular cover and budgeted maximization over enumerated realizations."""
from .errors import (
    Infeasible,
    InconsistentObservation,
    InputError,
    MalformedPolicy,
    MinimalDependencyRequired,
    MissingTableEntry,
    ParseError,
    TooLarge,
)
from .model import (
    Coverage,
    Identification,
    Instance,
    Item,
    Modular,
    PartialRealization,
    Realization,
    Table,
    Truncated,
    conditional_expected_utility,
    consistent,
    evaluate_ground,
    is_subrealization,
    possible_states,
    truncate_utility,
    worst_case_marginal,
)
from .policies import (
    STOP,
    Select,
    Stop,
    best_singleton,
    budget_greedy,
    combined_max_policy,
    cover_greedy,
    run_policy,
    truncated_trace_value,
    worst_case_cost,
    worst_case_value,
)

__version__ = "0.1.0"

__all__ = [
    "Infeasible",
    "InconsistentObservation",
    "InputError",
    "MalformedPolicy",
    "MinimalDependencyRequired",
    "MissingTableEntry",
    "ParseError",
    "TooLarge",
    "Coverage",
    "Identification",
    "Instance",
    "Item",
    "Modular",
    "PartialRealization",
    "Realization",
    "Table",
    "Truncated",
    "conditional_expected_utility",
    "consistent",
    "evaluate_ground",
    "is_subrealization",
    "possible_states",
    "truncate_utility",
    "worst_case_marginal",
    "STOP",
    "Select",
    "Stop",
    "best_singleton",
    "budget_greedy",
    "combined_max_policy",
    "cover_greedy",
    "run_policy",
    "truncated_trace_value",
    "worst_case_cost",
    "worst_case_value",
]
