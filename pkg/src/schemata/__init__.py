"""Satisfiability of inductively defined formula schemata by tableau with loop detection."""

__version__ = "0.1.0"
