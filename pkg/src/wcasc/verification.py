"""Exhaustive property checkers, brute-force optimal policies and ratio reports.

Everything here enumerates explicitly and is meant for desk-scale instances.
Exact rationals are used throughout except for the transcendental bounds
(ln, exp), which are computed as floats and then given a 1e-9 relative
slack in the direction that favours the bound.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from .errors import InputError, MinimalDependencyRequired, TooLarge
from .model import (
    EMPTY,
    Instance,
    PartialRealization,
    as_rational,
    conditional_expected_utility,
    consistent_realizations,
    evaluate_ground,
    possible_states,
    truncate_utility,
    worst_case_marginal,
)
from .policies import (
    STOP,
    MaximizeResult,
    PolicyTree,
    Select,
    Trace,
    combined_max_policy,
    cost_scale,
    cover_greedy,
    prepare_cover_instance,
    run_policy,
    scale_trace,
    traces,
    truncated_trace_value,
    worst_case_cost,
    worst_case_value,
)

DEFAULT_CAP = 200_000
MAX_ORACLE_ITEMS = 8
MAX_POINTWISE_ITEMS = 12
MAX_ETA_ITEMS = 20
REL_SLACK = 1e-9

MONOTONE = "worst-case-monotone"
SUBMODULAR = "worst-case-submodular"
MINIMAL_DEPENDENCY = "minimal-dependency"
POINTWISE = "pointwise-submodular"


@dataclass(frozen=True)
class Witness:
    item: Optional[str]
    lhs: Fraction
    rhs: Fraction
    psi: PartialRealization = EMPTY
    psi2: Optional[PartialRealization] = None
    realization_id: Optional[str] = None
    states: Tuple[str, ...] = ()

    def describe(self) -> str:
        parts = [f"psi={self.psi}"]
        if self.psi2 is not None:
            parts.append(f"psi'={self.psi2}")
        if self.item is not None:
            parts.append(f"item={self.item}")
        if self.realization_id is not None:
            parts.append(f"realization={self.realization_id}")
        if self.states:
            parts.append("states=" + ",".join(self.states))
        parts.append(f"lhs={self.lhs} rhs={self.rhs}")
        return " ".join(parts)


@dataclass(frozen=True)
class PropertyReport:
    property: str
    passed: bool
    witness: Optional[Witness]
    checked_count: int


@dataclass(frozen=True)
class RatioReport:
    mode: str
    greedy_metric: Fraction
    oracle_metric: Fraction
    ratio: Fraction
    eta: Optional[Fraction]
    bound: float
    bound_satisfied: bool
    properties_hold: bool
    properties: Tuple[PropertyReport, ...] = ()
    # maximize only
    relaxed_value: Optional[Fraction] = None
    relaxed_bound: Optional[float] = None
    relaxed_bound_satisfied: Optional[bool] = None
    singleton_inequality_holds: Optional[bool] = None

    @property
    def failed_properties(self) -> List[str]:
        return [p.property for p in self.properties if not p.passed]


# --- enumeration ----------------------------------------------------------------


def consistent_partials(instance: Instance, cap: int = DEFAULT_CAP) -> List[PartialRealization]:
    """Every restriction of a realization in U+ to an item subset, deduplicated.

    Sorted by size, then by canonical (item, state) key.
    """
    n = len(instance.items)
    if len(instance.realizations) << n > cap:
        raise TooLarge(f"{len(instance.realizations)} realizations x 2^{n} subsets exceeds cap {cap}")
    memo = instance._memo
    hit = memo.get(("partials",))
    if hit is not None:
        return hit
    seen = {}
    ids = instance.item_ids
    for phi in instance.realizations:
        for k in range(n + 1):
            for subset in combinations(ids, k):
                key = tuple((e, phi[e]) for e in subset)
                if key not in seen:
                    seen[key] = PartialRealization(key)
    out = [seen[k] for k in sorted(seen, key=lambda k: (len(k), k))]
    memo[("partials",)] = out
    return out


# --- property checkers ---------------------------------------------------------


def check_worst_case_monotone(instance: Instance, cap: int = DEFAULT_CAP) -> PropertyReport:
    partials = consistent_partials(instance, cap)
    n = len(instance.items)
    pairs = sum(n - len(p) for p in partials)
    if pairs > cap:
        raise TooLarge(f"{pairs} (psi, item) pairs exceeds cap {cap}")
    count = 0
    for psi in partials:
        for e in instance.item_ids:
            if e in psi.dom:
                continue
            count += 1
            gain = worst_case_marginal(instance, e, psi)
            if gain < 0:
                states = tuple(sorted(possible_states(instance, e, psi)))
                return PropertyReport(MONOTONE, False, Witness(e, gain, Fraction(0), psi, states=states), count)
    return PropertyReport(MONOTONE, True, None, count)


def check_worst_case_submodular(instance: Instance, cap: int = DEFAULT_CAP) -> PropertyReport:
    """Diminishing worst-case marginals over every consistent pair psi < psi'.

    Iteration order (psi, item, psi') fixes which witness is reported first.
    """
    partials = consistent_partials(instance, cap)
    n = len(instance.items)
    triples = sum(((1 << len(p)) - 1) * (n - len(p)) for p in partials)
    if triples > cap:
        raise TooLarge(f"{triples} (psi, psi', item) triples exceeds cap {cap}")
    index = {p.key: i for i, p in enumerate(partials)}
    supersets = defaultdict(list)
    for j, bigger in enumerate(partials):
        obs = bigger.key
        k = len(obs)
        for mask in range((1 << k) - 1):
            sub = tuple(obs[b] for b in range(k) if mask >> b & 1)
            supersets[index[sub]].append(j)
    count = 0
    for i, psi in enumerate(partials):
        above = supersets.get(i, ())
        for e in instance.item_ids:
            if e in psi.dom:
                continue
            lhs = worst_case_marginal(instance, e, psi)
            for j in above:
                psi2 = partials[j]
                if e in psi2.dom:
                    continue
                count += 1
                rhs = worst_case_marginal(instance, e, psi2)
                if lhs < rhs:
                    states = tuple(sorted(possible_states(instance, e, psi)))
                    return PropertyReport(SUBMODULAR, False, Witness(e, lhs, rhs, psi, psi2, states=states), count)
    return PropertyReport(SUBMODULAR, True, None, count)


def check_minimal_dependency(instance: Instance, cap: int = DEFAULT_CAP) -> PropertyReport:
    count = 0
    for psi in consistent_partials(instance, cap):
        expected = conditional_expected_utility(instance, psi)
        for phi in consistent_realizations(instance, psi):
            count += 1
            value = evaluate_ground(instance, psi.dom, phi)
            if value != expected:
                return PropertyReport(
                    MINIMAL_DEPENDENCY, False, Witness(None, value, expected, psi, realization_id=phi.id), count
                )
    return PropertyReport(MINIMAL_DEPENDENCY, True, None, count)


def check_pointwise_submodular(instance: Instance, max_items: int = MAX_POINTWISE_ITEMS) -> PropertyReport:
    ids = instance.item_ids
    n = len(ids)
    if n > max_items:
        raise TooLarge(f"pointwise check enumerates 3^n subsets; n={n} > {max_items}")
    full = (1 << n) - 1
    count = 0
    for phi in instance.realizations:
        value = [
            evaluate_ground(instance, [ids[b] for b in range(n) if mask >> b & 1], phi)
            for mask in range(1 << n)
        ]
        for small in range(1 << n):
            for b in range(n):
                bit = 1 << b
                if small & bit:
                    continue
                gain_small = value[small | bit] - value[small]
                # every superset of `small` that excludes b
                free = full & ~small & ~bit
                extra = free
                while True:
                    big = small | extra
                    if big != small:
                        count += 1
                        gain_big = value[big | bit] - value[big]
                        if gain_small < gain_big:
                            witness = Witness(
                                ids[b],
                                gain_small,
                                gain_big,
                                phi.restrict(ids[c] for c in range(n) if small >> c & 1),
                                phi.restrict(ids[c] for c in range(n) if big >> c & 1),
                                realization_id=phi.id,
                            )
                            return PropertyReport(POINTWISE, False, witness, count)
                    if extra == 0:
                        break
                    extra = (extra - 1) & free
    return PropertyReport(POINTWISE, True, None, count)


def check_properties(instance: Instance, cap: int = DEFAULT_CAP) -> Tuple[PropertyReport, PropertyReport, PropertyReport]:
    """The three properties the approximation guarantees assume."""
    return (
        check_worst_case_monotone(instance, cap),
        check_worst_case_submodular(instance, cap),
        check_minimal_dependency(instance, cap),
    )


def properties_hold(instance: Instance, cap: int = DEFAULT_CAP) -> bool:
    return all(r.passed for r in check_properties(instance, cap))


def _require_minimal_dependency(instance: Instance) -> None:
    report = check_minimal_dependency(instance)
    if not report.passed:
        raise MinimalDependencyRequired(f"utility is not minimal dependent: {report.witness.describe()}")


# --- eta ---------------------------------------------------------------------


def compute_eta(instance: Instance, goal, max_items: int = MAX_ETA_ITEMS) -> Fraction:
    """Gap between the goal and the largest attainable value below it (f truncated at goal)."""
    goal = as_rational(goal)
    ids = instance.item_ids
    if len(ids) > max_items:
        raise TooLarge(f"eta enumerates 2^n subsets; n={len(ids)} > {max_items}")
    truncated = instance.with_utility(truncate_utility(instance.utility, goal))
    below = None
    for phi in instance.realizations:
        for k in range(len(ids) + 1):
            for subset in combinations(ids, k):
                v = evaluate_ground(truncated, subset, phi)
                if v < goal and (below is None or v > below):
                    below = v
    return goal if below is None else goal - below


# --- brute-force oracles ----------------------------------------------------------


def optimal_cover_cost(instance: Instance, goal, max_items: int = MAX_ORACLE_ITEMS) -> Tuple[Fraction, PolicyTree]:
    """Minimum worst-case cost of any policy reaching ``goal`` on every realization."""
    goal = as_rational(goal)
    if goal < 0:
        raise InputError(f"goal must be nonnegative, got {goal}")
    if len(instance.items) > max_items:
        raise TooLarge(f"cover oracle limited to {max_items} items, got {len(instance.items)}")
    _require_minimal_dependency(instance)
    if goal == 0:
        return Fraction(0), STOP
    inst, goal = prepare_cover_instance(instance, goal)
    items = frozenset(inst.item_ids)
    memo: Dict[tuple, Tuple[Optional[Fraction], PolicyTree]] = {}

    def solve(psi: PartialRealization) -> Tuple[Optional[Fraction], PolicyTree]:
        hit = memo.get(psi.key)
        if hit is not None:
            return hit
        if conditional_expected_utility(inst, psi) >= goal:
            best = (Fraction(0), STOP)
        else:
            best = (None, STOP)
            for e in sorted(items - psi.dom):
                children = {o: solve(psi.extend(e, o)) for o in sorted(possible_states(inst, e, psi))}
                if any(c is None for c, _ in children.values()):
                    continue
                cost = inst.cost(e) + max(c for c, _ in children.values())
                if best[0] is None or cost < best[0]:
                    best = (cost, Select(e, {o: t for o, (_, t) in children.items()}))
        memo[psi.key] = best
        return best

    cost, tree = solve(EMPTY)
    return cost, tree


def optimal_budgeted_value(instance: Instance, budget, max_items: int = MAX_ORACLE_ITEMS) -> Tuple[Fraction, PolicyTree]:
    """Maximum worst-case utility of any policy whose worst-case cost is within ``budget``."""
    budget = as_rational(budget)
    if budget < 0:
        raise InputError(f"budget must be nonnegative, got {budget}")
    if len(instance.items) > max_items:
        raise TooLarge(f"budget oracle limited to {max_items} items, got {len(instance.items)}")
    _require_minimal_dependency(instance)
    items = frozenset(instance.item_ids)
    memo: Dict[tuple, Tuple[Fraction, PolicyTree]] = {}

    def solve(psi: PartialRealization, left: Fraction) -> Tuple[Fraction, PolicyTree]:
        k = (psi.key, left)
        hit = memo.get(k)
        if hit is not None:
            return hit
        best = (conditional_expected_utility(instance, psi), STOP)
        for e in sorted(items - psi.dom):
            c = instance.cost(e)
            if c > left:
                continue
            children = {o: solve(psi.extend(e, o), left - c) for o in sorted(possible_states(instance, e, psi))}
            value = min(v for v, _ in children.values())
            if value > best[0]:
                best = (value, Select(e, {o: t for o, (_, t) in children.items()}))
        memo[k] = best
        return best

    return solve(EMPTY, budget)


# --- ratio reports ------------------------------------------------------------------


def _at_most(exact: Fraction, bound: float, scale: Fraction) -> bool:
    return exact <= Fraction(bound * (1 + REL_SLACK)) * scale


def _at_least(exact: Fraction, bound: float, scale: Fraction) -> bool:
    return exact >= Fraction(bound * (1 - REL_SLACK)) * scale


def cover_ratio_report(instance: Instance, goal, cap: int = DEFAULT_CAP) -> RatioReport:
    goal = as_rational(goal)
    if goal < 0:
        raise InputError(f"goal must be nonnegative, got {goal}")
    props = check_properties(instance, cap)
    hold = all(p.passed for p in props)
    if goal == 0:
        # nothing to cover: both policies stop at once
        return RatioReport("cover", Fraction(0), Fraction(0), Fraction(1), Fraction(0), 1.0, True, hold, props)
    tree = cover_greedy(instance, goal)
    prepared, _ = prepare_cover_instance(instance, goal)
    greedy_cost = worst_case_cost(prepared, tree)
    best_cost, _ = optimal_cover_cost(instance, goal)
    eta = compute_eta(instance, goal)
    bound = math.log(goal / eta) + 1
    ratio = greedy_cost / best_cost if best_cost else Fraction(1)
    return RatioReport(
        "cover", greedy_cost, best_cost, ratio, eta, bound, _at_most(greedy_cost, bound, best_cost), hold, props
    )


def singleton_inequality(result: MaximizeResult) -> Tuple[bool, Optional[str], Fraction, Fraction]:
    """Check f_wc(greedy) + worst-case gain of the relaxed policy's extra item >= f_wc(relaxed).

    The extra item is the one the relaxed policy adds on the greedy policy's
    worst-case realization.  Returns (holds, extra item, lhs, rhs).
    """
    sub = result.instance
    value, rid = worst_case_value(sub, result.greedy_tree)
    phi = sub.realization(rid)
    plain = run_policy(sub, result.greedy_tree, phi).items
    relaxed = run_policy(sub, result.relaxed_tree, phi).items
    extra = [e for e in relaxed if e not in plain]
    gain = worst_case_marginal(sub, extra[0], EMPTY) if extra else Fraction(0)
    lhs = value + gain
    return lhs >= result.relaxed_value, (extra[0] if extra else None), lhs, result.relaxed_value


def max_ratio_report(instance: Instance, budget, cap: int = DEFAULT_CAP) -> RatioReport:
    budget = as_rational(budget)
    props = check_properties(instance, cap)
    hold = all(p.passed for p in props)
    result = combined_max_policy(instance, budget)
    best, _ = optimal_budgeted_value(instance, budget)
    factor = 1 - math.exp(-1)
    bound = factor / 2
    ratio = result.combined_value / best if best else Fraction(1)
    holds, _, _, _ = singleton_inequality(result)
    return RatioReport(
        "maximize",
        result.combined_value,
        best,
        ratio,
        None,
        bound,
        _at_least(result.combined_value, bound, best),
        hold,
        props,
        relaxed_value=result.relaxed_value,
        relaxed_bound=factor,
        relaxed_bound_satisfied=_at_least(result.relaxed_value, factor, best),
        singleton_inequality_holds=holds,
    )


# --- trajectory checks -------------------------------------------------------------


def h_increment_violations(trace: Trace) -> List[int]:
    """Levels l >= 2 where h(l) - h(l-1) differs from the per-slot gain of item t_l."""
    bad = []
    total = int(trace.total_cost)
    if total < 1:
        return bad
    previous = truncated_trace_value(trace, 1)[1]
    for level in range(2, total + 1):
        t, h = truncated_trace_value(trace, level)
        step = trace.steps[t - 1]
        before = trace.steps[t - 2].value if t > 1 else Fraction(0)
        if h - previous != (step.value - before) / step.cost:
            bad.append(level)
        previous = h
    return bad


@dataclass
class TrajectoryReport:
    """Outcome of checking greedy cover trajectories against the oracle cost."""

    optimal_cost: Fraction
    scale: int
    levels_checked: int = 0
    h_violations: List[Tuple[str, int, Fraction, float]] = field(default_factory=list)
    cost_violations: List[Tuple[str, str, Fraction]] = field(default_factory=list)
    increment_violations: List[Tuple[str, int]] = field(default_factory=list)
    traces: Dict[str, Trace] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not (self.h_violations or self.cost_violations or self.increment_violations)


def cover_trajectory_check(instance: Instance, goal) -> TrajectoryReport:
    """Check the greedy cover trajectory bound on every realization.

    With costs scaled to integers, for each realization's trace and every
    level L: h(L) >= (1 - exp(-L / c*)) * goal.  Also checks that every item
    on the trace costs at most c*, and the exact per-slot increment of h.
    """
    tree = cover_greedy(instance, goal)
    prepared, goal = prepare_cover_instance(instance, goal)
    best, _ = optimal_cover_cost(instance, goal)
    scale = cost_scale(prepared)
    report = TrajectoryReport(best, scale)
    best_scaled = float(best * scale)
    for rid, trace in traces(prepared, tree).items():
        report.traces[rid] = trace
        for step in trace.steps:
            if step.cost > best:
                report.cost_violations.append((rid, step.item, step.cost))
        scaled = scale_trace(trace, scale)
        for level in range(1, int(scaled.total_cost) + 1):
            report.levels_checked += 1
            _, h = truncated_trace_value(scaled, level)
            target = (1 - math.exp(-level / best_scaled)) * float(goal)
            if h < Fraction(target * (1 - REL_SLACK)):
                report.h_violations.append((rid, level, h, target))
        report.increment_violations.extend((rid, level) for level in h_increment_violations(scaled))
    return report


# --- clamp inequality-------------------------------------------------------------------


def min_clamp_inequality(c1, c2, c3, c4, x) -> bool:
    """min(c1,x) - min(c2,x) >= min(c3,x) - min(c4,x) under the ordering preconditions."""
    c1, c2, c3, c4, x = (as_rational(v) for v in (c1, c2, c3, c4, x))
    if not (c1 >= c2 and c3 >= c4 and c1 - c2 >= c3 - c4 and c2 <= c4):
        raise InputError(f"preconditions violated for ({c1}, {c2}, {c3}, {c4})")
    return min(c1, x) - min(c2, x) >= min(c3, x) - min(c4, x)
