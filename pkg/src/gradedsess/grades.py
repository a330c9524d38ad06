"""Grade semirings: exact natural numbers and intervals over extended naturals.

Grades may be symbolic.  Bounds are :class:`NatExpr` polynomials over
type-level Nat variables (``n``, ``m + 1``), so a grade such as ``[n]`` or
``[0..n]`` in a signature is an ordinary value here.  Concrete grades are
just polynomials with no variables.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

Monomial = tuple[str, ...]


class SemiringMismatch(ValueError):
    """Arithmetic was attempted between grades of different semirings."""


@dataclass(frozen=True)
class NatExpr:
    """A polynomial with natural coefficients, kept in a canonical form.

    ``terms`` maps sorted variable multisets to positive coefficients; the
    empty monomial is the constant.
    """

    terms: tuple[tuple[Monomial, int], ...] = ()

    @staticmethod
    def _make(table: Mapping[Monomial, int]) -> NatExpr:
        return NatExpr(tuple(sorted((m, c) for m, c in table.items() if c)))

    @staticmethod
    def const(k: int) -> NatExpr:
        if k < 0:
            raise ValueError(f"negative natural number {k}")
        return NatExpr((((), k),)) if k else NatExpr()

    @staticmethod
    def var(name: str) -> NatExpr:
        return NatExpr((((name,), 1),))

    @staticmethod
    def of(x: int | NatExpr) -> NatExpr:
        if isinstance(x, NatExpr):
            return x
        if isinstance(x, bool) or not isinstance(x, int):
            raise TypeError(f"not a natural number: {x!r}")
        return NatExpr.const(x)

    def table(self) -> dict[Monomial, int]:
        return dict(self.terms)

    def __add__(self, other: int | NatExpr) -> NatExpr:
        other = NatExpr.of(other)
        t = self.table()
        for m, c in other.terms:
            t[m] = t.get(m, 0) + c
        return NatExpr._make(t)

    __radd__ = __add__

    def __mul__(self, other: int | NatExpr) -> NatExpr:
        other = NatExpr.of(other)
        t: dict[Monomial, int] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = tuple(sorted(m1 + m2))
                t[m] = t.get(m, 0) + c1 * c2
        return NatExpr._make(t)

    __rmul__ = __mul__

    @property
    def constant(self) -> int:
        return self.table().get((), 0)

    def is_const(self) -> bool:
        return all(m == () for m, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def value(self) -> int:
        if not self.is_const():
            raise ValueError(f"{self} is not a constant")
        return self.constant

    def variables(self) -> set[str]:
        return {v for m, _ in self.terms for v in m}

    def is_linear(self) -> bool:
        return all(len(m) <= 1 for m, _ in self.terms)

    def single_var(self) -> str | None:
        """The variable ``v`` if this expression is exactly ``v``."""
        if len(self.terms) == 1:
            (m, c), = self.terms
            if len(m) == 1 and c == 1:
                return m[0]
        return None

    def without_constant(self) -> NatExpr:
        return NatExpr(tuple((m, c) for m, c in self.terms if m))

    def subst(self, mapping: Mapping[str, NatExpr]) -> NatExpr:
        if not mapping or not (self.variables() & mapping.keys()):
            return self
        out = NatExpr()
        for m, c in self.terms:
            term = NatExpr.const(c)
            for v in m:
                term = term * mapping.get(v, NatExpr.var(v))
            out = out + term
        return out

    def leq(self, other: NatExpr) -> bool:
        """Coefficientwise ordering; implies ``self <= other`` at every assignment."""
        t = other.table()
        return all(c <= t.get(m, 0) for m, c in self.terms)

    def pointwise(self, other: NatExpr, op) -> NatExpr:
        a, b = self.table(), other.table()
        return NatExpr._make({m: op(a.get(m, 0), b.get(m, 0)) for m in a.keys() | b.keys()})

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms, key=lambda mc: (mc[0] == (), len(mc[0]), mc[0])):
            if not m:
                parts.append(str(c))
            else:
                factors = list(m) if c == 1 else [str(c), *m]
                parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"NatExpr({str(self)!r})"


def cancel(a: NatExpr, b: NatExpr) -> tuple[NatExpr, NatExpr]:
    """Subtract the common part of ``a`` and ``b`` from both."""
    common = a.pointwise(b, min)
    return a.pointwise(common, lambda x, y: x - y), b.pointwise(common, lambda x, y: x - y)


class Infinity:
    _instance: Infinity | None = None

    def __new__(cls) -> Infinity:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __str__(self) -> str:
        return "Inf"

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()
ExtNat = Union[NatExpr, Infinity]


def ext(x: int | NatExpr | Infinity) -> ExtNat:
    return x if isinstance(x, Infinity) else NatExpr.of(x)


def ext_add(a: ExtNat, b: ExtNat) -> ExtNat:
    if a is INF or b is INF:
        return INF
    return a + b


def ext_mul(a: ExtNat, b: ExtNat) -> ExtNat:
    # 0 * Inf = 0 keeps zero an annihilator.
    if a is INF:
        return NatExpr() if isinstance(b, NatExpr) and b.is_zero() else INF
    if b is INF:
        return NatExpr() if a.is_zero() else INF
    return a * b


def ext_leq(a: ExtNat, b: ExtNat) -> bool:
    if b is INF:
        return True
    if a is INF:
        return False
    return a.leq(b)


def ext_min(a: ExtNat, b: ExtNat) -> ExtNat:
    if a is INF:
        return b
    if b is INF:
        return a
    return a.pointwise(b, min)


def ext_max(a: ExtNat, b: ExtNat) -> ExtNat:
    if a is INF or b is INF:
        return INF
    return a.pointwise(b, max)


class Semiring(enum.Enum):
    NAT = "Nat"
    INTERVAL = "Interval"


@dataclass(frozen=True)
class NatGrade:
    """Exact usage count."""

    value: NatExpr

    def __post_init__(self):
        object.__setattr__(self, "value", NatExpr.of(self.value))

    @property
    def semiring(self) -> Semiring:
        return Semiring.NAT

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class IntervalGrade:
    """Usage somewhere between ``lo`` and ``hi`` (inclusive)."""

    lo: NatExpr
    hi: ExtNat

    def __post_init__(self):
        if isinstance(self.lo, Infinity):
            raise ValueError("interval lower bounds must be finite")
        object.__setattr__(self, "lo", NatExpr.of(self.lo))
        object.__setattr__(self, "hi", ext(self.hi))
        if isinstance(self.hi, NatExpr) and self.lo.is_const() and self.hi.is_const():
            if self.lo.value > self.hi.value:
                raise ValueError(f"empty interval {self}")

    @property
    def semiring(self) -> Semiring:
        return Semiring.INTERVAL

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"


Grade = Union[NatGrade, IntervalGrade]


def _same(a: Grade, b: Grade) -> Semiring:
    if a.semiring is not b.semiring:
        raise SemiringMismatch(f"grades {a} and {b} belong to different semirings")
    return a.semiring


def grade_zero(s: Semiring) -> Grade:
    return NatGrade(0) if s is Semiring.NAT else IntervalGrade(0, 0)


def grade_one(s: Semiring) -> Grade:
    return NatGrade(1) if s is Semiring.NAT else IntervalGrade(1, 1)


def grade_add(a: Grade, b: Grade) -> Grade:
    if _same(a, b) is Semiring.NAT:
        return NatGrade(a.value + b.value)
    return IntervalGrade(a.lo + b.lo, ext_add(a.hi, b.hi))


def grade_mul(a: Grade, b: Grade) -> Grade:
    if _same(a, b) is Semiring.NAT:
        return NatGrade(a.value * b.value)
    return IntervalGrade(a.lo * b.lo, ext_mul(a.hi, b.hi))


def grade_approx(usage: Grade, declared: Grade) -> bool:
    """Does ``usage`` fit within what ``declared`` permits?

    Nat grades count exactly, so only equality approximates.  Intervals
    approximate by containment.
    """
    if _same(usage, declared) is Semiring.NAT:
        return usage.value == declared.value
    return declared.lo.leq(usage.lo) and ext_leq(usage.hi, declared.hi)


def grade_join(a: Grade, b: Grade) -> Grade | None:
    """Least upper bound of two branch usages, or ``None`` when there is none."""
    if _same(a, b) is Semiring.NAT:
        return a if a == b else None
    return IntervalGrade(a.lo.pointwise(b.lo, min), ext_max(a.hi, b.hi))


def embed_nat(k: int | NatExpr | NatGrade) -> IntervalGrade:
    if isinstance(k, NatGrade):
        k = k.value
    k = NatExpr.of(k)
    return IntervalGrade(k, k)


def align(a: Grade, b: Grade) -> tuple[Grade, Grade]:
    """Embed a Nat grade into the interval semiring when the other side is an interval."""
    if a.semiring is Semiring.NAT and b.semiring is Semiring.INTERVAL:
        return embed_nat(a), b
    if a.semiring is Semiring.INTERVAL and b.semiring is Semiring.NAT:
        return a, embed_nat(b)
    return a, b


def grade_subst(g: Grade, mapping: Mapping[str, NatExpr]) -> Grade:
    if isinstance(g, NatGrade):
        return NatGrade(g.value.subst(mapping))
    hi = g.hi if g.hi is INF else g.hi.subst(mapping)
    return IntervalGrade(g.lo.subst(mapping), hi)


def grade_vars(g: Grade) -> set[str]:
    if isinstance(g, NatGrade):
        return g.value.variables()
    hi = set() if g.hi is INF else g.hi.variables()
    return g.lo.variables() | hi


def upper_bound(g: Grade) -> ExtNat:
    return g.value if isinstance(g, NatGrade) else g.hi


def grade_sum(gs: Iterable[Grade], s: Semiring) -> Grade:
    total = grade_zero(s)
    for g in gs:
        total = grade_add(total, g)
    return total
