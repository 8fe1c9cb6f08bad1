"""Fixture and seeded random instance construction.

Randomness comes from SplitMix64 (64-bit state, splittable) so that a given
configuration yields the same instance on every platform and Python version.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from .errors import InputError
from .model import (
    Coverage,
    Identification,
    Instance,
    Item,
    Modular,
    Realization,
    as_rational,
    max_ground_values,
)

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection sampling."""
        if bound <= 0:
            raise InputError("bound must be positive")
        limit = (1 << 64) - (1 << 64) % bound
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def between(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return lo + self.below(hi - lo + 1)

    def split(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    n_items: int = 4
    n_realizations: int = 4
    n_elements: int = 4
    n_states: int = 2
    cost_range: Tuple[int, int] = (1, 4)
    weight_range: Tuple[int, int] = (1, 3)

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if self.n_items < 1 or self.n_realizations < 1 or self.n_states < 1 or self.n_elements < 0:
            raise InputError(f"degenerate generator config {self}")
        for name in ("cost_range", "weight_range"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise InputError(f"{name} must be a nonempty range of positive integers, got {(lo, hi)}")


def _ids(prefix: str, count: int) -> List[str]:
    width = len(str(count))
    return [f"{prefix}{i:0{width}d}" for i in range(1, count + 1)]


def _items(rng: SplitMix64, config: GeneratorConfig) -> List[Item]:
    return [Item(e, Fraction(rng.between(*config.cost_range))) for e in _ids("i", config.n_items)]


def _realizations(rng: SplitMix64, items: List[str], states: List[str], count: int) -> List[Realization]:
    """Independent uniform assignments; duplicates are merged by summing weights."""
    merged: Dict[Tuple[str, ...], int] = {}
    for _ in range(count):
        draw = tuple(states[rng.below(len(states))] for _ in items)
        merged[draw] = merged.get(draw, 0) + 1
    rids = _ids("r", len(merged))
    return [Realization(rid, tuple(zip(items, draw)), Fraction(w)) for rid, (draw, w) in zip(rids, merged.items())]


def counterexample_instance(eps_a=4, eps_b=1, goal=6) -> Instance:
    """Three items where greedy pays eps_a but two items of cost eps_b suffice.

    Item e1 is always worth the goal. Exactly one of e2, e3 is in its valuable
    state o1 under each realization, so {e2, e3} reaches the goal everywhere
    while each of them alone has worst-case gain 0.
    """
    eps_a, eps_b, goal = (as_rational(v) for v in (eps_a, eps_b, goal))
    if min(eps_a, eps_b, goal) <= 0:
        raise InputError("counterexample parameters must be positive")
    # e3 must be valuable in o1, not o2: with v(e3, o2) = goal and
    # v(e3, o1) = 0, phi2 would give f({e2, e3}) = 0 and the cheap pair
    # would no longer be a cover.
    values = {("e1", "o1"): goal, ("e2", "o1"): goal, ("e3", "o1"): goal}
    return Instance(
        items=(Item("e1", eps_a), Item("e2", eps_b), Item("e3", eps_b)),
        states=("o1", "o2"),
        realizations=(
            Realization("phi1", {"e1": "o1", "e2": "o1", "e3": "o2"}),
            Realization("phi2", {"e1": "o1", "e2": "o2", "e3": "o1"}),
        ),
        utility=Modular(values),
    )


def random_coverage_instance(config: GeneratorConfig) -> Instance:
    if config.n_elements < 1:
        raise InputError("coverage instances need at least one element")
    rng = SplitMix64(config.seed)
    items = _items(rng.split(), config)
    ids = [i.id for i in items]
    states = _ids("s", config.n_states)
    elements = _ids("u", config.n_elements)
    wrng = rng.split()
    weights = {u: Fraction(wrng.between(*config.weight_range)) for u in elements}
    crng = rng.split()
    covers = {}
    for e in ids:
        for o in states:
            covers[(e, o)] = frozenset(u for u in elements if crng.below(2))
    realizations = _realizations(rng.split(), ids, states, config.n_realizations)
    return Instance(tuple(items), tuple(states), tuple(realizations), Coverage(weights, covers))


def identification_instance(config: GeneratorConfig) -> Instance:
    """Hypotheses as realizations, tests as items; value = hypotheses ruled out."""
    if config.n_realizations < 2:
        raise InputError("identification needs at least two hypotheses")
    rng = SplitMix64(config.seed)
    items = _items(rng.split(), config)
    ids = [i.id for i in items]
    states = _ids("s", config.n_states)
    realizations = _realizations(rng.split(), ids, states, config.n_realizations)
    if len(realizations) < 2:
        raise InputError("fewer than two distinct hypotheses after deduplication")
    return Instance(tuple(items), tuple(states), tuple(realizations), Identification())


def random_modular_instance(config: GeneratorConfig, shared_values: bool = False) -> Instance:
    """Random nonnegative modular values; ``shared_values`` makes them state-independent."""
    rng = SplitMix64(config.seed)
    items = _items(rng.split(), config)
    ids = [i.id for i in items]
    states = _ids("s", config.n_states)
    vrng = rng.split()
    values = {}
    for e in ids:
        common = Fraction(vrng.between(*config.weight_range))
        for o in states:
            values[(e, o)] = common if shared_values else Fraction(vrng.below(config.weight_range[1] + 1))
    realizations = _realizations(rng.split(), ids, states, config.n_realizations)
    return Instance(tuple(items), tuple(states), tuple(realizations), Modular(values))


def identification_goal(instance: Instance) -> Fraction:
    """All other hypotheses ruled out."""
    return Fraction(len(instance.realizations) - 1)


def default_goal(instance: Instance) -> Fraction:
    """Largest goal reachable under every realization: min over phi of f(E, phi)."""
    return min(max_ground_values(instance).values())


def two_item_coverage_instance() -> Instance:
    """Small coverage fixture: items a, b of cost 1, goal 2.

    a covers u1 in s1 and u1, u2 in s2; b covers u2. Both items have
    worst-case gain 1 on the empty observation, and attainable values are
    0, 1 and 2.
    """
    return Instance(
        items=(Item("a", 1), Item("b", 1)),
        states=("s1", "s2"),
        realizations=(
            Realization("phi1", {"a": "s1", "b": "s1"}),
            Realization("phi2", {"a": "s2", "b": "s1"}),
        ),
        utility=Coverage(
            {"u1": 1, "u2": 1},
            {("a", "s1"): {"u1"}, ("a", "s2"): {"u1", "u2"}, ("b", "s1"): {"u2"}, ("b", "s2"): {"u2"}},
        ),
    )


def three_hypothesis_instance() -> Instance:
    """Identification fixture: three hypotheses, tests t1 (cost 1) and t2 (cost 2)."""
    return Instance(
        items=(Item("t1", 1), Item("t2", 2)),
        states=("s1", "s2"),
        realizations=(
            Realization("h1", {"t1": "s1", "t2": "s1"}),
            Realization("h2", {"t1": "s1", "t2": "s2"}),
            Realization("h3", {"t1": "s2", "t2": "s2"}),
        ),
        utility=Identification(),
    )
