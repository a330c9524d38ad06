"""Abstract syntax for programs, terms, patterns, types and protocols.

Every node carries an optional source position that is ignored by equality,
so a reparsed program compares equal to the original.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..grades import Grade, NatExpr

Pos = tuple[int, int]


def _pos():
    return field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Node:
    pos: Pos | None = _pos()


# -- types and protocols -----------------------------------------------------


@dataclass(frozen=True)
class GradeVar(Node):
    """A grade variable ``r`` drawn from a semiring-kinded binder ``r : s``."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class GradeMeta(Node):
    """Unification variable standing for an unknown grade (checker only)."""

    id: int

    def __str__(self) -> str:
        return f"?r{self.id}"


GradeLike = Union[Grade, GradeVar, GradeMeta]


@dataclass(frozen=True)
class TVar(Node):
    """Rigid type-level variable of kind Type or Protocol."""

    name: str


@dataclass(frozen=True)
class TMeta(Node):
    """Unification variable (checker only)."""

    id: int


@dataclass(frozen=True)
class TCon(Node):
    """``Int``, ``Bool`` or a user data type applied to its arguments."""

    name: str
    args: tuple[Type, ...] = ()


@dataclass(frozen=True)
class TUnit(Node):
    pass


@dataclass(frozen=True)
class TFun(Node):
    arg: Type
    res: Type


@dataclass(frozen=True)
class TPair(Node):
    fst: Type
    snd: Type


@dataclass(frozen=True)
class TBox(Node):
    inner: Type
    grade: GradeLike


@dataclass(frozen=True)
class TChan(Node):
    protocol: Type


@dataclass(frozen=True)
class TVec(Node):
    length: NatExpr
    elem: Type


@dataclass(frozen=True)
class TNat(Node):
    """Singleton naturals ``N n``."""

    index: NatExpr


@dataclass(frozen=True)
class Send(Node):
    payload: Type
    cont: Type


@dataclass(frozen=True)
class Recv(Node):
    payload: Type
    cont: Type


@dataclass(frozen=True)
class Select(Node):
    left: Type
    right: Type


@dataclass(frozen=True)
class Offer(Node):
    left: Type
    right: Type


@dataclass(frozen=True)
class End(Node):
    pass


@dataclass(frozen=True)
class Dual(Node):
    """Deferred duality of a protocol variable."""

    protocol: Type


@dataclass(frozen=True)
class GradedP(Node):
    """Deferred ``Graded n p`` on a protocol variable."""

    grade: NatExpr
    protocol: Type


Type = Union[TVar, TMeta, TCon, TUnit, TFun, TPair, TBox, TChan, TVec, TNat,
             Send, Recv, Select, Offer, End, Dual, GradedP]
Protocol = Type

INT = TCon("Int")
BOOL = TCon("Bool")


@dataclass(frozen=True)
class Constraint(Node):
    predicate: str  # SingleAction | ReceivePrefix | Sends
    arg: Type


@dataclass(frozen=True)
class Scheme(Node):
    binders: tuple[tuple[str, str], ...]
    constraints: tuple[Constraint, ...]
    body: Type


# -- patterns ----------------------------------------------------------------


@dataclass(frozen=True)
class PVar(Node):
    name: str


@dataclass(frozen=True)
class PWild(Node):
    pass


@dataclass(frozen=True)
class PUnit(Node):
    pass


@dataclass(frozen=True)
class PPair(Node):
    fst: Pattern
    snd: Pattern


@dataclass(frozen=True)
class PBox(Node):
    inner: Pattern


@dataclass(frozen=True)
class PCon(Node):
    name: str
    args: tuple[Pattern, ...] = ()


@dataclass(frozen=True)
class PInt(Node):
    value: int


Pattern = Union[PVar, PWild, PUnit, PPair, PBox, PCon, PInt]


# -- terms -------------------------------------------------------------------

PRIMITIVES = (
    "send", "recv", "close", "forkLinear", "selectLeft", "selectRight", "offer",
    "forkNonLinear", "forkReplicate", "forkReplicateExactly", "forkMulticast", "par",
)

CHANNEL_CREATING = frozenset(
    {"forkLinear", "forkNonLinear", "forkReplicate", "forkReplicateExactly", "forkMulticast", "par"}
)


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Prim(Node):
    name: str


@dataclass(frozen=True)
class Con(Node):
    name: str


@dataclass(frozen=True)
class Lam(Node):
    param: Pattern
    body: Term


@dataclass(frozen=True)
class App(Node):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Binding(Node):
    pattern: Pattern
    annotation: Type | None
    expr: Term


@dataclass(frozen=True)
class Let(Node):
    """``let b1; b2; ... in body``; bindings scope left to right."""

    bindings: tuple[Binding, ...]
    body: Term


@dataclass(frozen=True)
class Pair(Node):
    fst: Term
    snd: Term


@dataclass(frozen=True)
class Unit(Node):
    pass


@dataclass(frozen=True)
class IntLit(Node):
    value: int


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # "+" | "=="
    left: Term
    right: Term


@dataclass(frozen=True)
class Promote(Node):
    body: Term


@dataclass(frozen=True)
class Ann(Node):
    expr: Term
    type: Type


Term = Union[Var, Prim, Con, Lam, App, Let, Pair, Unit, IntLit, BoolLit, BinOp, Promote, Ann]


# -- top level ---------------------------------------------------------------


@dataclass(frozen=True)
class Clause(Node):
    patterns: tuple[Pattern, ...]
    body: Term


@dataclass(frozen=True)
class Definition(Node):
    name: str
    scheme: Scheme
    clauses: tuple[Clause, ...]

    @property
    def arity(self) -> int:
        return len(self.clauses[0].patterns)


@dataclass(frozen=True)
class ConstructorDecl(Node):
    name: str
    fields: tuple[Type, ...]


@dataclass(frozen=True)
class DataDecl(Node):
    """``data Maybe a = Just a | Nothing``"""

    name: str
    params: tuple[str, ...]
    constructors: tuple[ConstructorDecl, ...]


@dataclass(frozen=True)
class IndexedDataDecl(Node):
    """GADT-style ``data Vec (n : Nat) (a : Type) where ...``; only Vec and N are honoured."""

    name: str
    params: tuple[tuple[str, str], ...]
    constructors: tuple[tuple[str, Type], ...]


@dataclass(frozen=True)
class Import(Node):
    module: str


TopLevel = Union[Definition, DataDecl, IndexedDataDecl, Import]


@dataclass(frozen=True)
class SourceProgram(Node):
    items: tuple[TopLevel, ...] = ()

    @property
    def defs(self) -> tuple[Definition, ...]:
        return tuple(i for i in self.items if isinstance(i, Definition))

    @property
    def data_decls(self) -> tuple[DataDecl, ...]:
        return tuple(i for i in self.items if isinstance(i, DataDecl))

    def lookup(self, name: str) -> Definition | None:
        for d in self.defs:
            if d.name == name:
                return d
        return None


def spine(t: Term) -> tuple[Term, list[Term]]:
    """Split ``f a b c`` into ``(f, [a, b, c])``."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def apply_to(fn: Term, *args: Term) -> Term:
    for a in args:
        fn = App(fn, a)
    return fn


def arrows(t: Type) -> tuple[list[Type], Type]:
    params = []
    while isinstance(t, TFun):
        params.append(t.arg)
        t = t.res
    return params, t


def pattern_vars(p: Pattern) -> list[str]:
    match p:
        case PVar(name):
            return [name]
        case PPair(a, b):
            return pattern_vars(a) + pattern_vars(b)
        case PBox(inner):
            return pattern_vars(inner)
        case PCon(_, args):
            return [v for a in args for v in pattern_vars(a)]
        case _:
            return []
