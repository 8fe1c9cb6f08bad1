from fractions import Fraction

import pytest

from wcasc.errors import InputError, ParseError
from wcasc.fileformat import format_rational, load_instance, parse_instance, serialize_instance
from wcasc.generators import (
    GeneratorConfig,
    counterexample_instance,
    identification_instance,
    random_coverage_instance,
    random_modular_instance,
    three_hypothesis_instance,
    two_item_coverage_instance,
)
from wcasc.model import Instance, Item, Modular, Realization, Table, Truncated, truncate_utility

HEAD = "instance v1\nitem a cost 1\nitem b cost 2\nstate s1\nstate s2\n"
REALS = "realization r1 weight 1 { a=s1 b=s2 }\n"


def error_of(text):
    with pytest.raises(ParseError) as info:
        parse_instance(text)
    return info.value


def test_format_rational():
    assert format_rational(Fraction(3)) == "3"
    assert format_rational(Fraction(4, 6)) == "2/3"
    assert format_rational(Fraction(-1, 2)) == "-1/2"


def test_ce4_text_round_trip():
    inst = counterexample_instance(4, 1, 6)
    text = serialize_instance(inst)
    assert parse_instance(text) == inst
    assert serialize_instance(parse_instance(text)) == text


def test_round_trip_all_fixtures():
    fixtures = [counterexample_instance(), two_item_coverage_instance(), three_hypothesis_instance()]
    for seed in range(10):
        cfg = GeneratorConfig(seed=seed, n_items=4, n_realizations=5, n_elements=3)
        fixtures += [random_coverage_instance(cfg), random_modular_instance(cfg)]
        try:
            fixtures.append(identification_instance(cfg))
        except InputError:
            pass
    for inst in fixtures:
        text = serialize_instance(inst)
        assert parse_instance(text) == inst
        assert serialize_instance(parse_instance(text)) == text


def test_table_and_truncation_round_trip():
    inst = Instance(
        (Item("a", Fraction(1, 3)), Item("b", 2)),
        ("s",),
        (Realization("r", {"a": "s", "b": "s"}, Fraction(5, 2)),),
        Truncated(Table({frozenset({("a", "s")}): 2, frozenset({("a", "s"), ("b", "s")}): Fraction(7, 2)}), 3),
    )
    text = serialize_instance(inst)
    assert "entry { } 0" in text and text.rstrip().endswith("truncate 3")
    assert parse_instance(text) == inst


def test_structurally_equal_instances_serialize_identically():
    a = Instance(
        (Item("b", 1), Item("a", 2)),
        ("s2", "s1"),
        (Realization("r2", {"b": "s1", "a": "s2"}), Realization("r1", {"a": "s1", "b": "s1"}, 2)),
        Modular({("b", "s1"): Fraction(2, 4), ("a", "s2"): 1}),
    )
    b = Instance(
        (Item("a", 2), Item("b", 1)),
        ("s1", "s2"),
        (Realization("r1", {"b": "s1", "a": "s1"}, 2), Realization("r2", {"a": "s2", "b": "s1"})),
        Modular({("a", "s2"): 1, ("b", "s1"): Fraction(1, 2), ("a", "s1"): 0}),
    )
    assert serialize_instance(a) == serialize_instance(b)


def test_comments_and_blank_lines():
    text = "# header comment\n\ninstance v1  # trailing\nitem a cost 3/6\nstate s\n" \
           "realization r weight 1 {a=s}\nutility modular\nvalue a s 2 # note\n"
    inst = parse_instance(text)
    assert inst.cost("a") == Fraction(1, 2)
    assert inst.utility == Modular({("a", "s"): 2})


@pytest.mark.parametrize(
    "text,code,line,column",
    [
        ("", "MissingHeader", 1, 1),
        ("instance v2\n", "MissingHeader", 1, 1),
        ("instance v1\nitem a cost 0\n", "ZeroCost", 2, 13),
        ("instance v1\nitem a cost -2\n", "NegativeCost", 2, 13),
        ("instance v1\nitem a cost 1/0\n", "ZeroDenominator", 2, 13),
        ("instance v1\nitem a cost 1.5\n", "Syntax", 2, 13),
        ("instance v1\nitem a cost 1\nitem a cost 2\n", "DuplicateId", 3, 6),
        ("instance v1\nbogus\n", "Syntax", 2, 1),
        (HEAD + "realization r1 weight 1 { a=s1 }\nutility identification\n", "IncompleteRealization", 6, 13),
        (HEAD + "realization r1 weight 0 { a=s1 b=s1 }\n", "NonPositiveWeight", 6, 23),
        (HEAD + "realization r1 weight 1 { a=s1 c=s1 }\nutility identification\n", "UnknownId", 6, 32),
        (HEAD + "realization r1 weight 1 { a=s1 b=s9 }\nutility identification\n", "UnknownId", 6, 32),
        (HEAD + REALS + "utility fancy\n", "UnknownUtility", 7, 9),
        (HEAD + REALS + "utility modular\nvalue a s1 -1\n", "NegativeValue", 8, 12),
        (HEAD + REALS + "utility modular\nvalue z s1 1\n", "UnknownId", 8, 7),
        (HEAD + REALS + "utility coverage\nelement u weight 1\ncovers a s1 : u v\n", "UnknownId", 9, 17),
        (HEAD + REALS + "utility table\nentry { } 1\n", "NonZeroEmptyEntry", 8, 11),
        (HEAD + REALS + "value a s1 1\n", "Syntax", 7, 1),
        (HEAD + REALS + "utility modular\ntruncate 2\nvalue a s1 1\n", "Syntax", 9, 1),
        (HEAD + "utility identification\n", "NoRealizations", 6, 1),
        ("instance v1\nstate s\n", "NoItems", 2, 1),
        (HEAD + REALS, "NoUtility", 6, 1),
        (HEAD + REALS + "utility identification extra\n", "Syntax", 7, 24),
    ],
)
def test_parse_errors(text, code, line, column):
    err = error_of(text)
    assert (err.code, err.line, err.column) == (code, line, column)
    assert str(err).startswith(f"{line}:{column}: {code}:")


def test_parse_error_is_input_error():
    assert isinstance(error_of("instance v1\nitem a cost 0\n"), InputError)


def test_load_instance(tmp_path):
    path = tmp_path / "ce4.wcasc"
    path.write_text(serialize_instance(counterexample_instance()))
    assert load_instance(path) == counterexample_instance()


def test_truncate_collapses_on_round_trip():
    inst = counterexample_instance()
    t = inst.with_utility(truncate_utility(inst.utility, 6))
    assert parse_instance(serialize_instance(t)) == t
