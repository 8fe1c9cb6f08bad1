from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import table_instance
from wcasc.errors import Infeasible, InputError, MalformedPolicy
from wcasc.generators import (
    GeneratorConfig,
    identification_goal,
    identification_instance,
    random_coverage_instance,
    default_goal,
)
from wcasc.model import (
    EMPTY,
    Instance,
    Item,
    Modular,
    Realization,
    conditional_expected_utility,
    worst_case_marginal,
)
from wcasc.policies import (
    STOP,
    Select,
    Step,
    Trace,
    best_singleton,
    budget_greedy,
    combined_max_policy,
    cover_greedy,
    prepare_cover_instance,
    render_tree,
    run_policy,
    truncated_trace_value,
    worst_case_cost,
    worst_case_value,
)
from wcasc.verification import optimal_cover_cost


def trace_of(costs, values):
    steps = tuple(Step(f"e{i}", "s", Fraction(v), Fraction(c)) for i, (c, v) in enumerate(zip(costs, values), 1))
    return Trace("r", steps)


def pair_instance(gain_a, gain_b, cost_a=2, cost_b=2):
    return Instance(
        (Item("a", cost_a), Item("b", cost_b)),
        ("s",),
        (Realization("r1", {"a": "s", "b": "s"}),),
        Modular({("a", "s"): gain_a, ("b", "s"): gain_b}),
    )


def greedy_nodes(instance, tree, psi=EMPTY):
    """Yield (psi, node) for every Select node."""
    if isinstance(tree, Select):
        yield psi, tree
        for o, child in tree.branches.items():
            yield from greedy_nodes(instance, child, psi.extend(tree.item, o))


# --- running ---------------------------------------------------------------------


def test_run_policy_examples(ce4):
    tree = cover_greedy(ce4, 6)
    prepared, _ = prepare_cover_instance(ce4, 6)
    t = run_policy(prepared, tree, ce4.realization("phi1"))
    assert [(s.item, s.state) for s in t.steps] == [("e1", "o1")]
    assert (t.total_cost, t.final_value) == (4, 6)

    t = run_policy(ce4, STOP, ce4.realization("phi2"))
    assert t.steps == () and t.total_cost == 0 and t.final_value == 0

    _, oracle_tree = optimal_cover_cost(ce4, 6)
    t = run_policy(prepared, oracle_tree, ce4.realization("phi2"))
    assert [(s.item, s.state) for s in t.steps] == [("e2", "o2"), ("e3", "o1")]
    assert (t.total_cost, t.final_value) == (2, 6)


def test_run_policy_missing_branch(ce4):
    tree = Select("e2", {"o1": STOP})
    with pytest.raises(MalformedPolicy):
        run_policy(ce4, tree, ce4.realization("phi2"))


def test_trace_values_match_reevaluation(cov2):
    tree = cover_greedy(cov2, 2)
    for phi in cov2.realizations:
        t = run_policy(cov2, tree, phi)
        psi = EMPTY
        for step in t.steps:
            psi = psi.extend(step.item, step.state)
            assert step.value == conditional_expected_utility(cov2, psi)
        assert t.total_cost == sum(s.cost for s in t.steps)


def test_worst_case_value_examples(ce4):
    only_e2 = Select("e2", {"o1": STOP, "o2": STOP})
    assert worst_case_value(ce4, only_e2) == (0, "phi2")
    assert worst_case_value(ce4, STOP) == (0, "phi1")
    _, oracle_tree = optimal_cover_cost(ce4, 6)
    value, _ = worst_case_value(prepare_cover_instance(ce4, 6)[0], oracle_tree)
    assert value == 6


def test_worst_case_cost_examples(ce4):
    assert worst_case_cost(ce4, cover_greedy(ce4, 6)) == 4
    assert worst_case_cost(ce4, optimal_cover_cost(ce4, 6)[1]) == 2
    assert worst_case_cost(ce4, STOP) == 0


# --- cover greedy ----------------------------------------------------------------


def test_cover_greedy_ce4(ce4):
    tree = cover_greedy(ce4, 6)
    assert tree.item == "e1"
    assert all(child == STOP for child in tree.branches.values())
    assert not tree.fallback


def test_cover_greedy_cov2(cov2):
    tree = cover_greedy(cov2, 2)
    assert tree.item == "a"  # tie 1/1 vs 1/1 broken by id
    assert tree.branches["s2"] == STOP
    assert tree.branches["s1"].item == "b"
    assert worst_case_cost(cov2, tree) == 2


def test_cover_greedy_single_step():
    inst = pair_instance(6, 1, cost_a=3)
    tree = cover_greedy(inst, 6)
    assert tree.item == "a" and tree.branches == {"s": STOP}
    assert worst_case_cost(inst, tree) == 3


def test_cover_greedy_errors(ce4):
    with pytest.raises(InputError):
        cover_greedy(ce4, 0)
    with pytest.raises(Infeasible):
        cover_greedy(ce4, 13)


def test_cover_greedy_zero_density_fallback():
    # only the pair {a, b} has value; each alone has zero gain
    inst = table_instance({(): 0, ("a",): 0, ("b",): 0, ("a", "b"): 1})
    tree = cover_greedy(inst, 1)
    assert tree.item == "a" and tree.fallback
    t = run_policy(inst, tree, inst.realizations[0])
    assert t.zero_density_fallback_used and t.items == ("a", "b")
    assert not run_policy(inst, STOP, inst.realizations[0]).zero_density_fallback_used


def seeded_instances(count):
    out = []
    for seed in range(count):
        cfg = GeneratorConfig(seed=seed, n_items=4, n_realizations=5, n_elements=4)
        cov = random_coverage_instance(cfg)
        if default_goal(cov) > 0:
            out.append((cov, default_goal(cov)))
        try:
            ident = identification_instance(cfg)
        except InputError:
            continue
        out.append((ident, identification_goal(ident)))
    return out


@pytest.mark.parametrize("instance,goal", seeded_instances(15))
def test_greedy_choice_is_density_argmax(instance, goal):
    prepared, _ = prepare_cover_instance(instance, goal)
    tree = cover_greedy(instance, goal)
    for psi, node in greedy_nodes(prepared, tree):
        assert conditional_expected_utility(prepared, psi) < goal
        densities = {
            e: worst_case_marginal(prepared, e, psi) / prepared.cost(e)
            for e in prepared.item_ids
            if e not in psi.dom
        }
        top = max(densities.values())
        if node.fallback:
            assert top == 0 and node.item == min(densities)
        else:
            assert densities[node.item] == top
            assert node.item == min(e for e, d in densities.items() if d == top)
    for phi in prepared.realizations:
        assert run_policy(prepared, tree, phi).final_value >= goal


@pytest.mark.parametrize("instance,goal", seeded_instances(5))
def test_trees_are_deterministic(instance, goal):
    assert cover_greedy(instance, goal) == cover_greedy(instance, goal)
    assert render_tree(budget_greedy(instance, 3)) == render_tree(budget_greedy(instance, 3))


@pytest.mark.parametrize("instance,goal", seeded_instances(8))
def test_no_item_repeats_on_a_path(instance, goal):
    def walk(tree, seen):
        if isinstance(tree, Select):
            assert tree.item not in seen
            for child in tree.branches.values():
                walk(child, seen | {tree.item})

    walk(cover_greedy(instance, goal), frozenset())
    walk(budget_greedy(instance, 4, relaxed=True), frozenset())


# --- budgeted greedy ----------------------------------------------------------------


def test_budget_greedy_pruned_ce4(ce4):
    sub = ce4.restricted(["e2", "e3"])
    tree = budget_greedy(sub, 2)
    for phi in sub.realizations:
        assert set(run_policy(sub, tree, phi).items) == {"e2", "e3"}
    assert worst_case_value(sub, tree)[0] == 6


def test_budget_greedy_breaks_on_first_overflow():
    inst = pair_instance(4, 2)
    plain = budget_greedy(inst, 3)
    assert run_policy(inst, plain, inst.realizations[0]).items == ("a",)
    relaxed = budget_greedy(inst, 3, relaxed=True)
    t = run_policy(inst, relaxed, inst.realizations[0])
    assert t.items == ("a", "b") and t.total_cost == 4


def test_budget_greedy_does_not_try_cheaper_items():
    # c has the best density but does not fit after a; the cheap b is never tried
    inst = Instance(
        (Item("a", 2), Item("b", 1), Item("c", 2)),
        ("s",),
        (Realization("r1", {"a": "s", "b": "s", "c": "s"}),),
        Modular({("a", "s"): 10, ("b", "s"): 1, ("c", "s"): 8}),
    )
    assert run_policy(inst, budget_greedy(inst, 3), inst.realizations[0]).items == ("a",)


def test_budget_greedy_errors(ce4):
    with pytest.raises(InputError):
        budget_greedy(ce4, 0)


# --- singleton / combined ---------------------------------------------------------------


def test_best_singleton_examples(ce4):
    assert best_singleton(ce4) == ("e1", 6)
    assert best_singleton(ce4.restricted(["e2", "e3"])) == ("e2", 0)
    single = pair_instance(3, 0).restricted(["a"])
    assert best_singleton(single) == ("a", 3)


def test_combined_ce4_small_budget(ce4):
    r = combined_max_policy(ce4, 2)
    assert r.pruned_items == {"e1"}
    assert r.greedy_value == 6
    assert r.singleton == ("e2", 0)
    assert r.combined_value == 6


def test_combined_ce4_large_budget(ce4):
    r = combined_max_policy(ce4, 10)
    assert r.pruned_items == frozenset()
    assert r.greedy_tree.item == "e1"
    assert r.combined_value >= 6
    assert r.combined_value == max(r.greedy_value, r.singleton[1])
    assert r.relaxed_value >= r.greedy_value


def test_combined_infeasible(ce4):
    with pytest.raises(Infeasible):
        combined_max_policy(ce4, Fraction(1, 2))


# --- virtual slots ---------------------------------------------------------------------


def test_truncation_worked_example():
    t = trace_of((2, 2, 3), (4, 6, 9))
    assert truncated_trace_value(t, 3)[0] == 2
    assert truncated_trace_value(t, 5)[0] == 3
    assert truncated_trace_value(t, 5)[1] == 7


def test_truncation_errors():
    t = trace_of((2, 2, 3), (4, 6, 9))
    with pytest.raises(InputError):
        truncated_trace_value(t, 0)
    with pytest.raises(InputError):
        truncated_trace_value(t, 8)
    with pytest.raises(InputError):
        truncated_trace_value(trace_of((Fraction(1, 2),), (1,)), 1)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(1, 5), st.fractions(min_value=0, max_value=10, max_denominator=6)),
        min_size=1,
        max_size=6,
    )
)
def test_h_increments_and_endpoints(steps):
    costs = [c for c, _ in steps]
    values, acc = [], Fraction(0)
    for _, gain in steps:
        acc += gain
        values.append(acc)
    t = trace_of(costs, values)
    total = sum(costs)
    h = {level: truncated_trace_value(t, level) for level in range(1, total + 1)}
    assert h[total][1] == t.final_value
    boundary = 0
    for i, c in enumerate(costs):
        boundary += c
        assert h[boundary] == (i + 1, values[i])
    for level in range(2, total + 1):
        tl, hl = h[level]
        before = values[tl - 2] if tl > 1 else 0
        assert hl - h[level - 1][1] == (values[tl - 1] - before) / costs[tl - 1]
