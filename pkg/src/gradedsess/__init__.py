"""Typechecker and deterministic concurrent interpreter for a small linear
language with graded modalities, indexed vectors and session-typed channels."""

__version__ = "0.1.0"
