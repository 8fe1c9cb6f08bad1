import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wcasc.generators import (  # noqa: E402
    counterexample_instance,
    three_hypothesis_instance,
    two_item_coverage_instance,
)
from wcasc.model import Instance, Item, Realization, Table  # noqa: E402


@pytest.fixture
def ce4():
    return counterexample_instance(4, 1, 6)


@pytest.fixture
def cov2():
    return two_item_coverage_instance()


@pytest.fixture
def id3():
    return three_hypothesis_instance()


def table_instance(entries, realizations=None, items=("a", "b")):
    """Single-state table instance over ``items``; entries map tuples of items to values."""
    realizations = realizations or [Realization("r1", {e: "s1" for e in items})]
    return Instance(
        items=tuple(Item(e, 1) for e in items),
        states=("s1",),
        realizations=tuple(realizations),
        utility=Table({frozenset((e, "s1") for e in k): v for k, v in entries.items()}),
    )


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
