"""Adaptive policies as materialized decision trees, and their evaluation.

Trees are built by recursing over every observation branch that some
realization in U+ can actually produce.  Greedy choices compare densities
exactly and break ties by the lexicographically smallest item id.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple, Union

from .errors import Infeasible, InputError, MalformedPolicy
from .model import (
    EMPTY,
    Instance,
    PartialRealization,
    Realization,
    as_rational,
    conditional_expected_utility,
    evaluate_ground,
    max_ground_values,
    possible_states,
    truncate_utility,
    worst_case_marginal,
)


@dataclass(frozen=True)
class Stop:
    def __str__(self) -> str:
        return "Stop"


STOP = Stop()


@dataclass(frozen=True)
class Select:
    """Select ``item`` and continue in the branch keyed by its observed state.

    ``fallback`` marks a node where no item had positive worst-case density
    and the cover policy fell back to the smallest unselected id.
    """

    item: str
    branches: Mapping[str, "PolicyTree"]
    fallback: bool = False
    __hash__ = None

    def __post_init__(self):
        object.__setattr__(self, "branches", dict(sorted(self.branches.items())))


PolicyTree = Union[Stop, Select]


@dataclass(frozen=True)
class Step:
    item: str
    state: str
    value: Fraction  # f(psi_t) after this step
    cost: Fraction


@dataclass(frozen=True)
class Trace:
    realization_id: str
    steps: Tuple[Step, ...]
    zero_density_fallback_used: bool = False

    @property
    def items(self) -> Tuple[str, ...]:
        return tuple(s.item for s in self.steps)

    @property
    def total_cost(self) -> Fraction:
        return sum((s.cost for s in self.steps), Fraction(0))

    @property
    def final_value(self) -> Fraction:
        return self.steps[-1].value if self.steps else Fraction(0)

    @property
    def partial(self) -> PartialRealization:
        return PartialRealization(tuple((s.item, s.state) for s in self.steps))


@dataclass(frozen=True)
class MaximizeResult:
    greedy_value: Fraction
    relaxed_value: Fraction
    singleton: Tuple[str, Fraction]
    combined_value: Fraction
    greedy_tree: PolicyTree
    relaxed_tree: PolicyTree
    pruned_items: FrozenSet[str]
    instance: Instance = field(repr=False, compare=False)
    __hash__ = None


# --- running and aggregating ------------------------------------------------


def run_policy(instance: Instance, tree: PolicyTree, phi: Realization) -> Trace:
    psi = EMPTY
    steps = []
    fallback = False
    node = tree
    while isinstance(node, Select):
        state = phi[node.item]
        if node.item in psi.dom:
            raise MalformedPolicy(f"item {node.item} selected twice on realization {phi.id}")
        psi = psi.extend(node.item, state)
        steps.append(Step(node.item, state, conditional_expected_utility(instance, psi), instance.cost(node.item)))
        fallback = fallback or node.fallback
        try:
            node = node.branches[state]
        except KeyError:
            raise MalformedPolicy(f"no branch for state {state} of item {node.item}") from None
    return Trace(phi.id, tuple(steps), fallback)


def traces(instance: Instance, tree: PolicyTree) -> Dict[str, Trace]:
    return {phi.id: run_policy(instance, tree, phi) for phi in instance.realizations}


def worst_case_value(instance: Instance, tree: PolicyTree) -> Tuple[Fraction, str]:
    """min over U+ of f(E(pi, phi), phi), with the first attaining realization id."""
    best = None
    for phi in instance.realizations:  # already sorted by id
        selected = run_policy(instance, tree, phi).items
        value = evaluate_ground(instance, selected, phi)
        if best is None or value < best[0]:
            best = (value, phi.id)
    return best


def worst_case_cost(instance: Instance, tree: PolicyTree) -> Fraction:
    return max(run_policy(instance, tree, phi).total_cost for phi in instance.realizations)


def worst_case_cost_realization(instance: Instance, tree: PolicyTree) -> str:
    best = None
    for phi in instance.realizations:
        cost = run_policy(instance, tree, phi).total_cost
        if best is None or cost > best[0]:
            best = (cost, phi.id)
    return best[1]


# --- greedy policies --------------------------------------------------------


def density_argmax(instance: Instance, psi: PartialRealization, candidates: Iterable[str]) -> Tuple[str, Fraction]:
    """Item maximizing worst-case marginal / cost; ties go to the smallest id."""
    best = None
    for e in sorted(candidates):
        d = worst_case_marginal(instance, e, psi) / instance.cost(e)
        if best is None or d > best[1]:
            best = (e, d)
    return best


def prepare_cover_instance(instance: Instance, goal) -> Tuple[Instance, Fraction]:
    """Validate a cover goal; truncate f at the goal when some f(E, phi) exceeds it."""
    goal = as_rational(goal)
    if goal <= 0:
        raise InputError(f"goal must be positive, got {goal}")
    full = max_ground_values(instance)
    short = sorted(rid for rid, v in full.items() if v < goal)
    if short:
        raise Infeasible(f"goal {goal} unreachable under realizations {short}")
    if any(v > goal for v in full.values()):
        instance = instance.with_utility(truncate_utility(instance.utility, goal))
    return instance, goal


def cover_greedy(instance: Instance, goal) -> PolicyTree:
    """Worst-case density-greedy cover policy, materialized as a tree."""
    instance, goal = prepare_cover_instance(instance, goal)
    items = frozenset(instance.item_ids)

    def grow(psi: PartialRealization) -> PolicyTree:
        remaining = items - psi.dom
        if conditional_expected_utility(instance, psi) >= goal or not remaining:
            return STOP
        e, density = density_argmax(instance, psi, remaining)
        fallback = density == 0
        if fallback:
            e = min(remaining)
        return Select(e, {o: grow(psi.extend(e, o)) for o in possible_states(instance, e, psi)}, fallback)

    return grow(EMPTY)


def budget_greedy(instance: Instance, budget, relaxed: bool = False) -> PolicyTree:
    """Budgeted density greedy.

    Stops at the first chosen item that no longer fits; with ``relaxed`` that
    item is still selected before stopping.
    """
    budget = as_rational(budget)
    if budget <= 0:
        raise InputError(f"budget must be positive, got {budget}")
    items = frozenset(instance.item_ids)

    def grow(psi: PartialRealization, left: Fraction) -> PolicyTree:
        remaining = items - psi.dom
        if not remaining:
            return STOP
        e, _ = density_argmax(instance, psi, remaining)
        left -= instance.cost(e)
        states = possible_states(instance, e, psi)
        if left >= 0:
            return Select(e, {o: grow(psi.extend(e, o), left) for o in states})
        if relaxed:
            return Select(e, {o: STOP for o in states})
        return STOP

    return grow(EMPTY, budget)


def best_singleton(instance: Instance, candidates: Optional[Iterable[str]] = None) -> Tuple[str, Fraction]:
    """Item with the largest worst-case marginal on the empty observation."""
    pool = instance.item_ids if candidates is None else sorted(candidates)
    best = None
    for e in sorted(pool):
        gain = worst_case_marginal(instance, e, EMPTY)
        if best is None or gain > best[1]:
            best = (e, gain)
    if best is None:
        raise InputError("no candidate items")
    return best


def combined_max_policy(instance: Instance, budget) -> MaximizeResult:
    """Better of budgeted greedy and the best affordable singleton."""
    budget = as_rational(budget)
    if budget <= 0:
        raise InputError(f"budget must be positive, got {budget}")
    keep = [i.id for i in instance.items if i.cost <= budget]
    if not keep:
        raise Infeasible(f"every item costs more than the budget {budget}")
    pruned = frozenset(instance.item_ids) - set(keep)
    sub = instance.restricted(keep) if pruned else instance
    greedy = budget_greedy(sub, budget, relaxed=False)
    relaxed = budget_greedy(sub, budget, relaxed=True)
    greedy_value, _ = worst_case_value(sub, greedy)
    relaxed_value, _ = worst_case_value(sub, relaxed)
    singleton = best_singleton(sub)
    return MaximizeResult(
        greedy_value=greedy_value,
        relaxed_value=relaxed_value,
        singleton=singleton,
        combined_value=max(greedy_value, singleton[1]),
        greedy_tree=greedy,
        relaxed_tree=relaxed,
        pruned_items=pruned,
        instance=sub,
    )


# --- virtual-slot truncation --------------------------------------------------


def scale_trace(trace: Trace, factor: int) -> Trace:
    """Multiply every step cost by ``factor`` (used to make costs integral)."""
    return Trace(
        trace.realization_id,
        tuple(Step(s.item, s.state, s.value, s.cost * factor) for s in trace.steps),
        trace.zero_density_fallback_used,
    )


def cost_scale(instance: Instance) -> int:
    """Least common denominator of all item costs."""
    return lcm(*(i.cost.denominator for i in instance.items))


def truncated_trace_value(trace: Trace, level: int) -> Tuple[int, Fraction]:
    """(t_l, h) for the level-``level`` truncation of a trace with integer costs.

    t_l is the number of items with positive selection probability after
    ``level`` unit slots; h interpolates the utility of the in-progress item.
    """
    if any(s.cost.denominator != 1 or s.cost <= 0 for s in trace.steps):
        raise InputError("truncated_trace_value needs positive integer step costs")
    if isinstance(level, bool) or int(level) != level:
        raise InputError(f"level must be an integer, got {level!r}")
    level = int(level)
    total = trace.total_cost
    if not 1 <= level <= total:
        raise InputError(f"level {level} outside [1, {total}]")
    spent = Fraction(0)
    before = Fraction(0)
    for t, step in enumerate(trace.steps, start=1):
        if spent + step.cost >= level:
            h = before + (level - spent) / step.cost * (step.value - before)
            return t, h
        spent += step.cost
        before = step.value
    raise AssertionError("unreachable: level <= total cost")


# --- rendering ----------------------------------------------------------------


def render_tree(tree: PolicyTree, indent: str = "") -> str:
    if isinstance(tree, Stop):
        return indent + "stop"
    lines = [indent + f"select {tree.item}" + (" (fallback)" if tree.fallback else "")]
    for state, child in tree.branches.items():
        lines.append(indent + f"  [{state}]")
        lines.append(render_tree(child, indent + "    "))
    return "\n".join(lines)


def tree_items(tree: PolicyTree) -> FrozenSet[str]:
    if isinstance(tree, Stop):
        return frozenset()
    out = {tree.item}
    for child in tree.branches.values():
        out |= tree_items(child)
    return frozenset(out)
