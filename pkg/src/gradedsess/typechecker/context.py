"""Assumptions, typing contexts and usage accounting."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..grades import (
    Grade, SemiringMismatch, align, grade_add, grade_approx, grade_mul,
)
from ..syntax.ast import GradeLike, Pos, Type


class TypeCheckError(Exception):
    """A static error, tagged with the typing rule that was violated."""

    def __init__(self, rule: str, message: str, pos: Pos | None = None):
        super().__init__(message)
        self.rule = rule
        self.message = message
        self.pos = pos
        self.definition: str | None = None

    def __str__(self) -> str:
        where = f"{self.pos[0]}:{self.pos[1]}: " if self.pos else ""
        return f"{where}{self.rule}: {self.message}"


class TypeCheckFailure(Exception):
    def __init__(self, errors: list[TypeCheckError]):
        super().__init__("\n".join(str(e) for e in errors))
        self.errors = errors


@dataclass(frozen=True)
class Linear:
    type: Type


@dataclass(frozen=True)
class Graded:
    type: Type
    grade: GradeTerm


Assumption = Union[Linear, Graded]


# -- symbolic grade terms -----------------------------------------------------
# Usage grades are accumulated symbolically and evaluated once a clause's
# unification problem is solved, because promotion grades often depend on
# metavariables that are only fixed by later arguments.


@dataclass(frozen=True)
class GLeaf:
    grade: GradeLike


@dataclass(frozen=True)
class GOne:
    """The unit grade of whatever semiring ``like`` lives in."""

    like: GradeTerm


@dataclass(frozen=True)
class GAdd:
    left: GradeTerm
    right: GradeTerm


@dataclass(frozen=True)
class GMul:
    left: GradeTerm
    right: GradeTerm


@dataclass(frozen=True)
class GJoin:
    left: GradeTerm
    right: GradeTerm


GradeTerm = Union[GLeaf, GOne, GAdd, GMul, GJoin]


def leaf(g) -> GradeTerm:
    return g if isinstance(g, (GLeaf, GOne, GAdd, GMul, GJoin)) else GLeaf(g)


@dataclass
class Usage:
    """How a term uses the variables in scope.

    Absent graded variables are used zero times.
    """

    linear: dict[str, Pos | None] = field(default_factory=dict)
    graded: dict[str, GradeTerm] = field(default_factory=dict)

    def plus(self, other: Usage) -> Usage:
        for x, pos in other.linear.items():
            if x in self.linear:
                raise TypeCheckError(
                    "contraction", f"linearity violation: linear variable '{x}' is used more than once", pos)
        graded = dict(self.graded)
        for x, g in other.graded.items():
            graded[x] = GAdd(graded[x], g) if x in graded else g
        return Usage({**self.linear, **other.linear}, graded)

    def scaled(self, r: GradeTerm) -> Usage:
        if self.linear:
            x, pos = next(iter(self.linear.items()))
            raise TypeCheckError(
                "pr", f"promotion would scale linear variable '{x}'; only graded variables may occur under a promotion", pos)
        return Usage({}, {x: GMul(r, g) for x, g in self.graded.items()})

    def joined(self, other: Usage, pos: Pos | None) -> Usage:
        if self.linear.keys() != other.linear.keys():
            only = sorted(self.linear.keys() ^ other.linear.keys())
            raise TypeCheckError(
                "weak", f"linearity violation: branches consume different linear variables ({', '.join(only)})", pos)
        graded = {}
        for x in self.graded.keys() | other.graded.keys():
            a, b = self.graded.get(x), other.graded.get(x)
            graded[x] = GJoin(a, b) if a is not None and b is not None else GJoin(a or b, ZERO)
        return Usage(dict(self.linear), graded)


@dataclass(frozen=True)
class _Zero:
    """Additive unit of any semiring; used as the join partner of an unused variable."""


ZERO = _Zero()


@dataclass(frozen=True)
class UsageReport:
    graded: dict[str, Grade]
    linear: frozenset[str]


class TypingContext(dict):
    """Ordered map from variables to assumptions with the context operations
    ``+`` (contraction) and ``r *`` (scaling) on concrete grades."""

    def __add__(self, other: TypingContext) -> TypingContext:
        return ctx_add(self, other)

    def __rmul__(self, r: Grade) -> TypingContext:
        return ctx_scale(r, self)


def ctx_add(g1: dict, g2: dict) -> TypingContext:
    out = TypingContext(g1)
    for x, b in g2.items():
        if x not in out:
            out[x] = b
            continue
        a = out[x]
        if isinstance(a, Linear) or isinstance(b, Linear):
            raise TypeCheckError("contraction", f"linear variable '{x}' appears in both contexts")
        if a.type != b.type:
            raise TypeCheckError("contraction", f"variable '{x}' has different types in the two contexts")
        try:
            out[x] = Graded(a.type, grade_add(*align(a.grade, b.grade)))
        except SemiringMismatch as exc:
            raise TypeCheckError("semiring-mismatch", str(exc)) from None
    return out


def ctx_scale(r: Grade, g: dict) -> TypingContext:
    out = TypingContext()
    for x, a in g.items():
        if isinstance(a, Linear):
            raise TypeCheckError("pr", f"cannot scale linear assumption '{x}'")
        out[x] = Graded(a.type, grade_mul(*align(r, a.grade)))
    return out


def ctx_approx(usage: dict, declared: dict) -> bool:
    """Pointwise ``grade_approx`` of a usage context against declared grades."""
    for x, a in declared.items():
        if isinstance(a, Graded):
            u = usage.get(x)
            if u is not None and not grade_approx(*align(u.grade, a.grade)):
                return False
    return True
