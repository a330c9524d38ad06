"""Static semantics: linear and graded usage, polymorphism, indices and protocol constraints."""
from .checker import (
    Checker, ParameterUsages, TypedProgram, check_constraint, check_program,
    check_term, parameter_usages, promotion_guard, solve_nat_constraints, synth_term,
)
from .context import (
    Graded, Linear, TypeCheckError, TypeCheckFailure, TypingContext, UsageReport,
    ctx_add, ctx_approx, ctx_scale,
)

__all__ = [
    "Checker", "Graded", "Linear", "ParameterUsages", "TypeCheckError",
    "TypeCheckFailure", "TypedProgram", "TypingContext", "UsageReport",
    "check_constraint", "check_program", "check_term", "ctx_add", "ctx_approx",
    "ctx_scale", "parameter_usages", "promotion_guard", "solve_nat_constraints",
    "synth_term",
]
