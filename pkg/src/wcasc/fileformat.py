"""Reader and canonical writer for the line-oriented ``instance v1`` format.

::

    instance v1
    item <id> cost <rational>
    state <id>
    realization <id> weight <rational> { <item>=<state> ... }
    utility modular | coverage | identification | table
    value <item> <state> <rational>                  # modular
    element <id> weight <rational>                   # coverage
    covers <item> <state> : <element> ...            # coverage
    entry { <item>=<state> ... } <rational>          # table
    truncate <rational>                              # optional, last

Rationals are integers or ``p/q``.  ``#`` starts a comment.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import InputError, ParseError
from .model import (
    Coverage,
    Identification,
    Instance,
    Item,
    Modular,
    Realization,
    Table,
    Truncated,
    Utility,
)

_TOKEN = re.compile(r"[{}:]|[^\s{}:#]+")
RATIONAL_PATTERN = re.compile(r"-?\d+(?:/\d+)?\Z")
_ID = re.compile(r"[A-Za-z0-9_.\-]+\Z")


def format_rational(value: Fraction) -> str:
    """Canonical file form: integers bare, otherwise p/q."""
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


class _Line:
    def __init__(self, number: int, text: str):
        self.number = number
        body = text.split("#", 1)[0]
        self.tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(body)]
        self.pos = 0

    def error(self, code: str, message: str, column: Optional[int] = None) -> ParseError:
        if column is None:
            column = self.tokens[min(self.pos, len(self.tokens) - 1)][1] if self.tokens else 1
        return ParseError(code, message, self.number, column)

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def column(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][1]
        return (self.tokens[-1][1] + len(self.tokens[-1][0])) if self.tokens else 1

    def take(self, what: str) -> Tuple[str, int]:
        if self.pos >= len(self.tokens):
            raise self.error("Syntax", f"expected {what} at end of line", self.column())
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def keyword(self, word: str) -> None:
        tok, col = self.take(repr(word))
        if tok != word:
            raise self.error("Syntax", f"expected {word!r}, got {tok!r}", col)

    def ident(self, what: str) -> Tuple[str, int]:
        tok, col = self.take(what)
        if not _ID.match(tok):
            raise self.error("Syntax", f"invalid {what} {tok!r}", col)
        return tok, col

    def rational(self, what: str) -> Tuple[Fraction, int]:
        tok, col = self.take(what)
        if not RATIONAL_PATTERN.match(tok):
            raise self.error("Syntax", f"{what} must be an integer or p/q, got {tok!r}", col)
        try:
            return Fraction(tok), col
        except ZeroDivisionError:
            raise self.error("ZeroDenominator", f"{what} {tok!r} has zero denominator", col) from None

    def pairs(self) -> List[Tuple[str, str, int]]:
        self.keyword("{")
        out = []
        while True:
            tok, col = self.take("'}'")
            if tok == "}":
                return out
            if tok.count("=") != 1:
                raise self.error("Syntax", f"expected item=state, got {tok!r}", col)
            e, o = tok.split("=")
            if not (_ID.match(e) and _ID.match(o)):
                raise self.error("Syntax", f"invalid pair {tok!r}", col)
            out.append((e, o, col))

    def end(self) -> None:
        if self.pos < len(self.tokens):
            tok, col = self.tokens[self.pos]
            raise self.error("Syntax", f"unexpected trailing token {tok!r}", col)


def parse_instance(text: str) -> Instance:
    """Parse and validate an instance; errors carry a code and line:column."""
    lines = [_Line(i, t) for i, t in enumerate(text.splitlines(), start=1)]
    lines = [ln for ln in lines if ln.tokens]
    if not lines:
        raise ParseError("MissingHeader", "empty input", 1, 1)
    head = lines[0]
    if [t for t, _ in head.tokens] != ["instance", "v1"]:
        raise head.error("MissingHeader", "first line must be 'instance v1'", 1)

    items: Dict[str, Tuple[Fraction, _Line, int]] = {}
    states: Dict[str, _Line] = {}
    realizations: Dict[str, Tuple[Fraction, List[Tuple[str, str, int]], _Line, int]] = {}
    kind: Optional[str] = None
    kind_line: Optional[_Line] = None
    values: Dict[Tuple[str, str], Tuple[Fraction, _Line, int]] = {}
    elements: Dict[str, Tuple[Fraction, _Line, int]] = {}
    covers: Dict[Tuple[str, str], Tuple[List[Tuple[str, int]], _Line, int]] = {}
    entries: Dict[frozenset, Tuple[Fraction, List[Tuple[str, str, int]], _Line]] = {}
    cap: Optional[Fraction] = None

    def body_of(line: _Line, expected: str) -> None:
        if kind != expected:
            raise line.error("Syntax", f"'{line.tokens[0][0]}' lines belong to 'utility {expected}'", line.tokens[0][1])

    def nonnegative(line: _Line, value: Fraction, col: int, what: str) -> Fraction:
        if value < 0:
            raise line.error("NegativeValue", f"{what} must be nonnegative", col)
        return value

    for line in lines[1:]:
        word, col = line.take("keyword")
        if cap is not None:
            raise line.error("Syntax", "'truncate' must be the last line", col)
        if word == "item":
            e, ecol = line.ident("item id")
            line.keyword("cost")
            cost, ccol = line.rational("cost")
            if e in items:
                raise line.error("DuplicateId", f"item {e!r} declared twice", ecol)
            if cost == 0:
                raise line.error("ZeroCost", f"item {e!r} has zero cost", ccol)
            if cost < 0:
                raise line.error("NegativeCost", f"item {e!r} has negative cost", ccol)
            items[e] = (cost, line, ecol)
        elif word == "state":
            o, ocol = line.ident("state id")
            if o in states:
                raise line.error("DuplicateId", f"state {o!r} declared twice", ocol)
            states[o] = line
        elif word == "realization":
            r, rcol = line.ident("realization id")
            line.keyword("weight")
            w, wcol = line.rational("weight")
            if w <= 0:
                raise line.error("NonPositiveWeight", f"realization {r!r} needs positive weight", wcol)
            pairs = line.pairs()
            if r in realizations:
                raise line.error("DuplicateId", f"realization {r!r} declared twice", rcol)
            realizations[r] = (w, pairs, line, rcol)
        elif word == "utility":
            if kind is not None:
                raise line.error("Syntax", "utility declared twice", col)
            k, kcol = line.take("utility kind")
            if k not in ("modular", "coverage", "identification", "table"):
                raise line.error("UnknownUtility", f"unknown utility kind {k!r}", kcol)
            kind, kind_line = k, line
        elif word == "value":
            body_of(line, "modular")
            e, ecol = line.ident("item id")
            o, _ = line.ident("state id")
            v, vcol = line.rational("value")
            if (e, o) in values:
                raise line.error("DuplicateId", f"value for ({e}, {o}) given twice", ecol)
            values[(e, o)] = (nonnegative(line, v, vcol, "value"), line, ecol)
        elif word == "element":
            body_of(line, "coverage")
            u, ucol = line.ident("element id")
            line.keyword("weight")
            w, wcol = line.rational("weight")
            if u in elements:
                raise line.error("DuplicateId", f"element {u!r} declared twice", ucol)
            elements[u] = (nonnegative(line, w, wcol, "element weight"), line, ucol)
        elif word == "covers":
            body_of(line, "coverage")
            e, ecol = line.ident("item id")
            o, _ = line.ident("state id")
            line.keyword(":")
            us = []
            while line.peek() is not None:
                us.append(line.ident("element id"))
            if (e, o) in covers:
                raise line.error("DuplicateId", f"covers for ({e}, {o}) given twice", ecol)
            covers[(e, o)] = (us, line, ecol)
        elif word == "entry":
            body_of(line, "table")
            start = line.column()
            pairs = line.pairs()
            v, vcol = line.rational("value")
            pattern = frozenset((e, o) for e, o, _ in pairs)
            if len({e for e, _, _ in pairs}) != len(pairs):
                raise line.error("DuplicateId", "entry assigns an item twice", start)
            if pattern in entries:
                raise line.error("DuplicateId", "table entry given twice", start)
            if not pairs and v != 0:
                raise line.error("NonZeroEmptyEntry", "the empty entry {} must be 0", vcol)
            entries[pattern] = (nonnegative(line, v, vcol, "table value"), pairs, line)
        elif word == "truncate":
            if kind is None:
                raise line.error("Syntax", "'truncate' needs a utility", col)
            c, ccol = line.rational("cap")
            cap = nonnegative(line, c, ccol, "truncation cap")
        else:
            raise line.error("Syntax", f"unknown keyword {word!r}", col)
        line.end()

    last = lines[-1]
    if not items:
        raise ParseError("NoItems", "instance declares no items", last.number, 1)
    if not realizations:
        raise ParseError("NoRealizations", "instance declares no realizations", last.number, 1)
    if kind is None:
        raise ParseError("NoUtility", "instance declares no utility", last.number, 1)

    def known_pair(line: _Line, e: str, o: str, col: int) -> None:
        if e not in items:
            raise line.error("UnknownId", f"unknown item {e!r}", col)
        if o not in states:
            raise line.error("UnknownId", f"unknown state {o!r}", col)

    built = []
    for r, (w, pairs, line, rcol) in realizations.items():
        seen = {}
        for e, o, col in pairs:
            known_pair(line, e, o, col)
            if e in seen:
                raise line.error("DuplicateId", f"realization {r!r} assigns {e!r} twice", col)
            seen[e] = o
        missing = sorted(set(items) - set(seen))
        if missing:
            raise line.error("IncompleteRealization", f"realization {r!r} misses items {missing}", rcol)
        built.append(Realization(r, seen, w))

    utility: Utility
    if kind == "modular":
        for (e, o), (_, line, col) in values.items():
            known_pair(line, e, o, col)
        utility = Modular({k: v for k, (v, _, _) in values.items()})
    elif kind == "coverage":
        for (e, o), (us, line, col) in covers.items():
            known_pair(line, e, o, col)
            for u, ucol in us:
                if u not in elements:
                    raise line.error("UnknownId", f"unknown element {u!r}", ucol)
        utility = Coverage(
            {u: w for u, (w, _, _) in elements.items()},
            {k: frozenset(u for u, _ in us) for k, (us, _, _) in covers.items()},
        )
    elif kind == "identification":
        utility = Identification()
    else:
        for _, (_, pairs, line) in entries.items():
            for e, o, col in pairs:
                known_pair(line, e, o, col)
        utility = Table({p: v for p, (v, _, _) in entries.items()})
    if cap is not None:
        utility = Truncated(utility, cap)

    try:
        return Instance(
            tuple(Item(e, c) for e, (c, _, _) in items.items()),
            tuple(states),
            tuple(built),
            utility,
        )
    except InputError as exc:
        raise ParseError("Invalid", str(exc), kind_line.number if kind_line else 1, 1) from exc


def _pairs(pairs) -> str:
    inner = " ".join(f"{e}={o}" for e, o in sorted(pairs))
    return "{ " + inner + " }" if inner else "{ }"


def serialize_instance(instance: Instance) -> str:
    out = ["instance v1"]
    out += [f"item {i.id} cost {format_rational(i.cost)}" for i in instance.items]
    out += [f"state {o}" for o in instance.states]
    out += [
        f"realization {r.id} weight {format_rational(r.weight)} {_pairs(r.assignment)}"
        for r in instance.realizations
    ]
    utility = instance.utility
    cap = None
    if isinstance(utility, Truncated):
        utility, cap = utility.inner, utility.cap
    if isinstance(utility, Modular):
        out.append("utility modular")
        out += [f"value {e} {o} {format_rational(v)}" for (e, o), v in sorted(utility.values.items())]
    elif isinstance(utility, Coverage):
        out.append("utility coverage")
        out += [f"element {u} weight {format_rational(w)}" for u, w in sorted(utility.elements.items())]
        out += [f"covers {e} {o} : {' '.join(sorted(us))}" for (e, o), us in sorted(utility.covers.items())]
    elif isinstance(utility, Identification):
        out.append("utility identification")
    else:
        out.append("utility table")
        for pattern, v in sorted(utility.entries.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
            out.append(f"entry {_pairs(pattern)} {format_rational(v)}")
    if cap is not None:
        out.append(f"truncate {format_rational(cap)}")
    return "\n".join(out) + "\n"


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())
