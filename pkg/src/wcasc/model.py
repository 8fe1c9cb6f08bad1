"""Items, realizations, partial realizations and utility functions.

All scalars are :class:`fractions.Fraction`; nothing in this module touches
floating point.  Every type is immutable after construction and every
operation is a pure function of its arguments (results are memoized per
instance, which does not change observable behaviour).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Tuple, Union

from .errors import InconsistentObservation, InputError, MissingTableEntry

Rational = Fraction
Pair = Tuple[str, str]
Pattern = FrozenSet[Pair]


def as_rational(value: Union[int, str, Fraction]) -> Fraction:
    """Coerce ``value`` to an exact Fraction; floats are refused."""
    if isinstance(value, bool) or isinstance(value, float):
        raise InputError(f"refusing inexact value {value!r}; use int, str or Fraction")
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational number: {value!r}") from exc


def _nonnegative(value, what: str) -> Fraction:
    value = as_rational(value)
    if value < 0:
        raise InputError(f"{what} must be nonnegative, got {value}")
    return value


@dataclass(frozen=True)
class Item:
    id: str
    cost: Fraction

    def __post_init__(self):
        if not self.id:
            raise InputError("item id must be nonempty")
        cost = as_rational(self.cost)
        if cost <= 0:
            raise InputError(f"item {self.id}: cost must be positive, got {cost}")
        object.__setattr__(self, "cost", cost)


@dataclass(frozen=True)
class PartialRealization:
    """Observed (item, state) pairs in selection order.

    Order is kept for traces; consistency and subrealization tests use set
    semantics, and :attr:`key` gives the order-free canonical form.
    """

    observations: Tuple[Pair, ...] = ()

    def __post_init__(self):
        obs = tuple((str(e), str(o)) for e, o in self.observations)
        if len({e for e, _ in obs}) != len(obs):
            raise InputError(f"duplicate item in partial realization {obs}")
        object.__setattr__(self, "observations", obs)

    @classmethod
    def of(cls, mapping: Union[Mapping[str, str], Iterable[Pair]]) -> "PartialRealization":
        pairs = mapping.items() if isinstance(mapping, Mapping) else mapping
        return cls(tuple(pairs))

    @cached_property
    def mapping(self) -> Dict[str, str]:
        return dict(self.observations)

    @cached_property
    def dom(self) -> FrozenSet[str]:
        return frozenset(self.mapping)

    @cached_property
    def key(self) -> Tuple[Pair, ...]:
        return tuple(sorted(self.observations))

    def extend(self, item: str, state: str) -> "PartialRealization":
        return PartialRealization(self.observations + ((item, state),))

    def __len__(self) -> int:
        return len(self.observations)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.observations)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{e}={o}" for e, o in self.key) + "}"


EMPTY = PartialRealization()


@dataclass(frozen=True)
class Realization:
    """A full assignment of states to items, with positive weight."""

    id: str
    assignment: Tuple[Pair, ...]
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        if not self.id:
            raise InputError("realization id must be nonempty")
        pairs = self.assignment.items() if isinstance(self.assignment, Mapping) else self.assignment
        pairs = tuple(sorted((str(e), str(o)) for e, o in pairs))
        if len({e for e, _ in pairs}) != len(pairs):
            raise InputError(f"realization {self.id}: item assigned twice")
        weight = as_rational(self.weight)
        if weight <= 0:
            raise InputError(f"realization {self.id}: weight must be positive, got {weight}")
        object.__setattr__(self, "assignment", pairs)
        object.__setattr__(self, "weight", weight)

    @cached_property
    def mapping(self) -> Dict[str, str]:
        return dict(self.assignment)

    def __getitem__(self, item: str) -> str:
        return self.mapping[item]

    def restrict(self, items: Iterable[str]) -> PartialRealization:
        return PartialRealization(tuple((e, self.mapping[e]) for e in sorted(items)))

    def as_partial(self) -> PartialRealization:
        return PartialRealization(self.assignment)


# --- utilities -------------------------------------------------------------


@dataclass(frozen=True)
class Modular:
    """f(S, phi) = sum of value[(e, phi(e))] over e in S; absent pairs are 0."""

    values: Mapping[Pair, Fraction] = field(default_factory=dict)
    __hash__ = None

    def __post_init__(self):
        vals = {}
        for (e, o), v in self.values.items():
            v = _nonnegative(v, f"value of ({e}, {o})")
            if v:
                vals[(str(e), str(o))] = v
        object.__setattr__(self, "values", dict(sorted(vals.items())))

    def ground(self, instance: "Instance", items: FrozenSet[str], phi: Realization) -> Fraction:
        get = self.values.get
        return sum((get((e, phi[e]), Fraction(0)) for e in items), Fraction(0))

    def referenced(self) -> Iterator[Pair]:
        return iter(self.values)

    def restricted(self, keep: FrozenSet[str]) -> "Modular":
        return Modular({k: v for k, v in self.values.items() if k[0] in keep})


@dataclass(frozen=True)
class Coverage:
    """Weighted coverage: total weight of elements covered by the observed pairs."""

    elements: Mapping[str, Fraction] = field(default_factory=dict)
    covers: Mapping[Pair, FrozenSet[str]] = field(default_factory=dict)
    __hash__ = None

    def __post_init__(self):
        elements = {str(u): _nonnegative(w, f"weight of element {u}") for u, w in self.elements.items()}
        covers = {}
        for (e, o), us in self.covers.items():
            us = frozenset(str(u) for u in us)
            missing = us - elements.keys()
            if missing:
                raise InputError(f"covers ({e}, {o}) names unknown elements {sorted(missing)}")
            if us:
                covers[(str(e), str(o))] = us
        object.__setattr__(self, "elements", dict(sorted(elements.items())))
        object.__setattr__(self, "covers", dict(sorted(covers.items())))

    def ground(self, instance: "Instance", items: FrozenSet[str], phi: Realization) -> Fraction:
        covered = set()
        for e in items:
            covered |= self.covers.get((e, phi[e]), frozenset())
        return sum((self.elements[u] for u in covered), Fraction(0))

    def referenced(self) -> Iterator[Pair]:
        return iter(self.covers)

    def restricted(self, keep: FrozenSet[str]) -> "Coverage":
        return Coverage(self.elements, {k: v for k, v in self.covers.items() if k[0] in keep})


@dataclass(frozen=True)
class Identification:
    """Number of realizations in the support ruled out by the observed states."""

    def ground(self, instance: "Instance", items: FrozenSet[str], phi: Realization) -> Fraction:
        own = [(e, phi[e]) for e in items]
        return Fraction(sum(1 for other in instance.realizations if any(other[e] != o for e, o in own)))

    def referenced(self) -> Iterator[Pair]:
        return iter(())

    def restricted(self, keep: FrozenSet[str]) -> "Identification":
        return self


@dataclass(frozen=True)
class Table:
    """Explicit value per observation pattern; the empty pattern is pinned to 0."""

    entries: Mapping[Pattern, Fraction] = field(default_factory=dict)
    __hash__ = None

    def __post_init__(self):
        entries = {}
        for pattern, v in self.entries.items():
            pattern = frozenset((str(e), str(o)) for e, o in pattern)
            if len({e for e, _ in pattern}) != len(pattern):
                raise InputError(f"table pattern {sorted(pattern)} assigns an item twice")
            entries[pattern] = _nonnegative(v, f"table value of {sorted(pattern)}")
        if entries.setdefault(frozenset(), Fraction(0)) != 0:
            raise InputError("table value of the empty pattern must be 0")
        object.__setattr__(self, "entries", dict(sorted(entries.items(), key=lambda kv: sorted(kv[0]))))

    def ground(self, instance: "Instance", items: FrozenSet[str], phi: Realization) -> Fraction:
        pattern = frozenset((e, phi[e]) for e in items)
        try:
            return self.entries[pattern]
        except KeyError:
            raise MissingTableEntry(f"no table entry for {sorted(pattern)}") from None

    def referenced(self) -> Iterator[Pair]:
        for pattern in self.entries:
            yield from pattern

    def restricted(self, keep: FrozenSet[str]) -> "Table":
        return Table({p: v for p, v in self.entries.items() if all(e in keep for e, _ in p)})


@dataclass(frozen=True)
class Truncated:
    """min(cap, inner); never nested."""

    inner: "BaseUtility"
    cap: Fraction
    __hash__ = None

    def __post_init__(self):
        if isinstance(self.inner, Truncated):
            raise InputError("truncated utilities cannot be nested; use truncate_utility")
        object.__setattr__(self, "cap", _nonnegative(self.cap, "truncation cap"))

    def ground(self, instance: "Instance", items: FrozenSet[str], phi: Realization) -> Fraction:
        return min(self.cap, self.inner.ground(instance, items, phi))

    def referenced(self) -> Iterator[Pair]:
        return self.inner.referenced()

    def restricted(self, keep: FrozenSet[str]) -> "Truncated":
        return Truncated(self.inner.restricted(keep), self.cap)


BaseUtility = Union[Modular, Coverage, Identification, Table]
Utility = Union[BaseUtility, Truncated]


def truncate_utility(utility: Utility, cap) -> Truncated:
    cap = as_rational(cap)
    if cap < 0:
        raise InputError(f"truncation cap must be nonnegative, got {cap}")
    if isinstance(utility, Truncated):
        return Truncated(utility.inner, min(utility.cap, cap))
    return Truncated(utility, cap)


# --- instance --------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """A complete problem input: items, states, the support U+ and a utility.

    Items, states and realizations are stored sorted by id so that two
    structurally equal instances compare (and serialize) equal.
    """

    items: Tuple[Item, ...]
    states: Tuple[str, ...]
    realizations: Tuple[Realization, ...]
    utility: Utility
    __hash__ = None

    def __post_init__(self):
        items = tuple(sorted(self.items, key=lambda i: i.id))
        states = tuple(sorted(set(self.states)))
        realizations = tuple(sorted(self.realizations, key=lambda r: r.id))
        if not items:
            raise InputError("instance needs at least one item")
        if not realizations:
            raise InputError("instance needs at least one realization")
        ids = [i.id for i in items]
        if len(set(ids)) != len(ids):
            raise InputError("duplicate item id")
        rids = [r.id for r in realizations]
        if len(set(rids)) != len(rids):
            raise InputError("duplicate realization id")
        item_set, state_set = set(ids), set(states)
        for r in realizations:
            if set(r.mapping) != item_set:
                raise InputError(f"realization {r.id} must assign exactly the items {sorted(item_set)}")
            bad = {o for o in r.mapping.values() if o not in state_set}
            if bad:
                raise InputError(f"realization {r.id} uses undeclared states {sorted(bad)}")
        for e, o in self.utility.referenced():
            if e not in item_set or o not in state_set:
                raise InputError(f"utility references unknown pair ({e}, {o})")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "realizations", realizations)

    @cached_property
    def item_ids(self) -> Tuple[str, ...]:
        return tuple(i.id for i in self.items)

    @cached_property
    def costs(self) -> Dict[str, Fraction]:
        return {i.id: i.cost for i in self.items}

    def cost(self, item: str) -> Fraction:
        try:
            return self.costs[item]
        except KeyError:
            raise InputError(f"unknown item {item!r}") from None

    def realization(self, rid: str) -> Realization:
        for r in self.realizations:
            if r.id == rid:
                return r
        raise InputError(f"unknown realization {rid!r}")

    @cached_property
    def _memo(self) -> dict:
        return {}

    def with_utility(self, utility: Utility) -> "Instance":
        return replace(self, utility=utility)

    def restricted(self, keep: Iterable[str]) -> "Instance":
        """Sub-instance on the items in ``keep``; realizations are projected."""
        keep = frozenset(keep)
        unknown = keep - set(self.item_ids)
        if unknown:
            raise InputError(f"unknown items {sorted(unknown)}")
        return Instance(
            items=tuple(i for i in self.items if i.id in keep),
            states=self.states,
            realizations=tuple(
                Realization(r.id, tuple(p for p in r.assignment if p[0] in keep), r.weight)
                for r in self.realizations
            ),
            utility=self.utility.restricted(keep),
        )

    def describe(self) -> str:
        return f"{len(self.items)} items, {len(self.states)} states, {len(self.realizations)} realizations"


# --- operations ------------------------------------------------------------


def consistent(phi: Realization, psi: PartialRealization) -> bool:
    for e, o in psi:
        try:
            if phi[e] != o:
                return False
        except KeyError:
            raise InputError(f"unknown item {e!r} in partial realization") from None
    return True


def is_subrealization(psi: PartialRealization, psi2: PartialRealization) -> bool:
    other = psi2.mapping
    return all(e in other and other[e] == o for e, o in psi)


def consistent_realizations(instance: Instance, psi: PartialRealization) -> Tuple[Realization, ...]:
    """Members of U+ consistent with ``psi``; raises if there are none."""
    memo = instance._memo
    k = ("cons", psi.key)
    hit = memo.get(k)
    if hit is None:
        hit = tuple(phi for phi in instance.realizations if consistent(phi, psi))
        memo[k] = hit
    if not hit:
        raise InconsistentObservation(f"{psi} is inconsistent with every realization")
    return hit


def possible_states(instance: Instance, e: str, psi: PartialRealization) -> FrozenSet[str]:
    if e in psi.dom:
        raise InputError(f"item {e!r} already observed in {psi}")
    instance.cost(e)
    return frozenset(phi[e] for phi in consistent_realizations(instance, psi))


def evaluate_ground(instance: Instance, items: Iterable[str], phi: Realization) -> Fraction:
    """Utility of the item set ``items`` when the world is ``phi``."""
    items = frozenset(items)
    for e in items:
        instance.cost(e)
    return instance.utility.ground(instance, items, phi)


def conditional_expected_utility(instance: Instance, psi: PartialRealization) -> Fraction:
    """Weighted mean of f(dom(psi), phi) over phi in U+ consistent with psi."""
    memo = instance._memo
    k = ("f", psi.key)
    hit = memo.get(k)
    if hit is not None:
        return hit
    dom = psi.dom
    support = consistent_realizations(instance, psi)
    total = sum((phi.weight for phi in support), Fraction(0))
    acc = sum((phi.weight * instance.utility.ground(instance, dom, phi) for phi in support), Fraction(0))
    value = acc / total
    memo[k] = value
    return value


def worst_case_marginal(instance: Instance, e: str, psi: PartialRealization) -> Fraction:
    """Minimum over still-possible states o of f(psi + (e, o)) - f(psi)."""
    memo = instance._memo
    k = ("dwc", psi.key, e)
    hit = memo.get(k)
    if hit is not None:
        return hit
    base = conditional_expected_utility(instance, psi)
    value = min(
        conditional_expected_utility(instance, psi.extend(e, o)) - base
        for o in sorted(possible_states(instance, e, psi))
    )
    memo[k] = value
    return value


def max_ground_values(instance: Instance) -> Dict[str, Fraction]:
    """f(E, phi) for every phi in U+, keyed by realization id."""
    everything = frozenset(instance.item_ids)
    return {phi.id: instance.utility.ground(instance, everything, phi) for phi in instance.realizations}
