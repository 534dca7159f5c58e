"""Typechecker, evaluator and free-theorem harness for a polymorphic
substructural lambda calculus with ordered, linear and unrestricted modes."""

from .syntax import Mode, parse_expr, parse_program, parse_type, pretty_expr, pretty_type

__all__ = ["Mode", "parse_expr", "parse_program", "parse_type", "pretty_expr", "pretty_type"]
