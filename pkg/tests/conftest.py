import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from schemata.cli import read_source  # noqa: E402
from schemata.parser import parse_formula, parse_problem  # noqa: E402

ACCEPTANCE_LINES: list = []

NAT_HEADER = """
(function p (nat) bool)
(function q (nat) bool)
(parameter A nat)
(parameter B nat)
(parameter C nat)
(defined g nat)
(defined d nat)
(defined c nat)
(rule (g 0) (p 0))
(rule (g (s K)) (and (g K) (or (not (p K)) (p (s K)))))
(rule (d 0) true)
(rule (d (s x)) (d x))
(rule (c 0) (not (p 0)))
(rule (c (s x)) false)
"""


def corpus(name: str):
    return parse_problem(read_source("corpus:" + name))


@pytest.fixture(scope="session")
def nat_problem():
    return parse_problem(NAT_HEADER + "(assert (g A))")


@pytest.fixture
def F(nat_problem):
    """Parse a formula over the shared nat signature."""
    return lambda text: parse_formula(text, nat_problem.signature)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
