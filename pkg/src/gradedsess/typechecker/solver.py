"""Unification over types, protocols, grades and type-level naturals.

One :class:`Solver` is used per clause.  Metavariables for types and
protocols are :class:`TMeta`, grade metavariables are :class:`GradeMeta`, and
Nat metavariables are ordinary :class:`NatExpr` variables whose names start
with ``?`` (so they can never collide with source identifiers).  GADT
refinement of rigid Nat variables (matching ``Cons`` against ``Vec n a``)
is recorded in the same substitution as meta solutions.
"""
from __future__ import annotations

import itertools

from ..grades import INF, IntervalGrade, NatExpr, NatGrade, cancel
from ..protocols import dual, graded_transform, is_protocol
from ..syntax.ast import (
    Dual, End, GradedP, GradeMeta, GradeVar, Offer, Pos, Recv, Select, Send,
    TBox, TChan, TCon, TFun, TMeta, TNat, TPair, TUnit, TVar, TVec,
)
from ..syntax.printer import grade as show_grade
from ..syntax.printer import type_ as show_type
from .context import TypeCheckError


class _Mismatch(Exception):
    pass


def nat_minus(e: NatExpr, k: int) -> NatExpr:
    return e.pointwise(NatExpr.const(k), lambda a, b: a - b)


def is_meta_name(v: str) -> bool:
    return v.startswith("?")


def metas_of(t) -> set[int]:
    """Type/protocol metavariables occurring anywhere in ``t``."""
    match t:
        case TMeta(i):
            return {i}
        case TFun(a, b) | TPair(a, b) | Send(a, b) | Recv(a, b) | Select(a, b) | Offer(a, b):
            return metas_of(a) | metas_of(b)
        case TBox(a, _) | TChan(a) | TVec(_, a) | Dual(a) | GradedP(_, a):
            return metas_of(a)
        case TCon(_, args):
            return set().union(*map(metas_of, args)) if args else set()
    return set()


def spine_has_meta(p) -> bool:
    """Does the communication structure of ``p`` (ignoring payloads) hit a metavariable?"""
    match p:
        case TMeta():
            return True
        case Send(_, k) | Recv(_, k):
            return spine_has_meta(k)
        case Select(l, r) | Offer(l, r):
            return spine_has_meta(l) or spine_has_meta(r)
        case Dual(q) | GradedP(_, q):
            return spine_has_meta(q)
    return False


class Solver:
    def __init__(self, counter: itertools.count | None = None):
        self._ids = counter or itertools.count()
        self.types: dict[int, object] = {}
        self.grades: dict[int, object] = {}
        self.nats: dict[str, NatExpr] = {}
        self.deferred: list[tuple[NatExpr, NatExpr, Pos | None]] = []

    # -- fresh variables ------------------------------------------------------

    def fresh_type(self) -> TMeta:
        return TMeta(next(self._ids))

    def fresh_grade(self) -> GradeMeta:
        return GradeMeta(next(self._ids))

    def fresh_nat(self) -> NatExpr:
        return NatExpr.var(f"?n{next(self._ids)}")

    def fresh_skolem(self, base: str) -> NatExpr:
        return NatExpr.var(f"{base}#{next(self._ids)}")

    # -- zonking --------------------------------------------------------------

    def zonk_nat(self, e: NatExpr) -> NatExpr:
        while e.variables() & self.nats.keys():
            e = e.subst(self.nats)
        return e

    def zonk_grade(self, g):
        match g:
            case GradeMeta(i) if i in self.grades:
                z = self.zonk_grade(self.grades[i])
                self.grades[i] = z
                return z
            case NatGrade(v):
                return NatGrade(self.zonk_nat(v))
            case IntervalGrade(lo, hi):
                return IntervalGrade(self.zonk_nat(lo), hi if hi is INF else self.zonk_nat(hi))
        return g

    def zonk(self, t):
        match t:
            case TMeta(i):
                if i in self.types:
                    z = self.zonk(self.types[i])
                    self.types[i] = z
                    return z
                return t
            case TCon(name, args) if args:
                return TCon(name, tuple(self.zonk(a) for a in args))
            case TFun(a, b):
                return TFun(self.zonk(a), self.zonk(b))
            case TPair(a, b):
                return TPair(self.zonk(a), self.zonk(b))
            case TBox(a, g):
                return TBox(self.zonk(a), self.zonk_grade(g))
            case TChan(p):
                return TChan(self.zonk(p))
            case TVec(n, a):
                return TVec(self.zonk_nat(n), self.zonk(a))
            case TNat(n):
                return TNat(self.zonk_nat(n))
            case Send(a, k):
                return Send(self.zonk(a), self.zonk(k))
            case Recv(a, k):
                return Recv(self.zonk(a), self.zonk(k))
            case Select(l, r):
                return Select(self.zonk(l), self.zonk(r))
            case Offer(l, r):
                return Offer(self.zonk(l), self.zonk(r))
            case Dual(p):
                return dual(self.zonk(p))
            case GradedP(n, p):
                return graded_transform(self.zonk_nat(n), self.zonk(p))
        return t

    # -- unification ----------------------------------------------------------

    def unify(self, actual, expected, pos: Pos | None = None) -> None:
        try:
            self._unify(actual, expected, pos)
        except _Mismatch as m:
            a, e = self.zonk(actual), self.zonk(expected)
            # The rule is decided by the innermost pair that failed to match.
            inner = m.args if len(m.args) == 2 else (a, e)
            rule = "duality" if all(map(is_protocol, inner)) else "type-mismatch"
            raise TypeCheckError(
                rule, f"expected {show_type(e)} but found {show_type(a)}", pos) from None

    def _bind(self, i: int, t) -> None:
        if i in metas_of(t):
            raise TypeCheckError("type-mismatch", f"infinite type: ?t{i} occurs in {show_type(t)}")
        self.types[i] = t

    def _unify(self, a, b, pos) -> None:
        a, b = self.zonk(a), self.zonk(b)
        if a == b:
            return
        match a, b:
            case TMeta(i), _:
                return self._bind(i, b)
            case _, TMeta(i):
                return self._bind(i, a)
            case Dual(TMeta(i)), _:
                return self._bind(i, self._dual_of(b))
            case _, Dual(TMeta(i)):
                return self._bind(i, self._dual_of(a))
            case GradedP(n, x), _ if not isinstance(b, GradedP):
                return self._invert_graded(n, x, b, pos)
            case _, GradedP(n, x) if not isinstance(a, GradedP):
                return self._invert_graded(n, x, a, pos)
            case GradedP(n, x), GradedP(m, y):
                self.unify_nat(n, m, pos)
                return self._unify(x, y, pos)
            case TCon(f, xs), TCon(g, ys) if f == g and len(xs) == len(ys):
                for x, y in zip(xs, ys):
                    self._unify(x, y, pos)
                return
            case (TFun(a1, a2), TFun(b1, b2)) | (TPair(a1, a2), TPair(b1, b2)):
                self._unify(a1, b1, pos)
                return self._unify(a2, b2, pos)
            case (Send(a1, a2), Send(b1, b2)) | (Recv(a1, a2), Recv(b1, b2)) \
                    | (Select(a1, a2), Select(b1, b2)) | (Offer(a1, a2), Offer(b1, b2)):
                self._unify(a1, b1, pos)
                return self._unify(a2, b2, pos)
            case TBox(x, g), TBox(y, h):
                self._unify(x, y, pos)
                return self.unify_grade(g, h, pos)
            case TChan(p), TChan(q):
                return self._unify(p, q, pos)
            case TVec(n, x), TVec(m, y):
                self.unify_nat(n, m, pos)
                return self._unify(x, y, pos)
            case TNat(n), TNat(m):
                return self.unify_nat(n, m, pos)
        raise _Mismatch(a, b)

    def _dual_of(self, t):
        if not is_protocol(t) and not isinstance(t, (TVar, TMeta)):
            raise _Mismatch
        return dual(t)

    def _invert_graded(self, n: NatExpr, x, target, pos) -> None:
        """Solve ``Graded n x = target`` for the unknown protocol ``x``."""
        match target:
            case Send(payload, k) | Recv(payload, k):
                if not isinstance(payload, TBox):
                    raise _Mismatch
                self.unify_grade(payload.grade, NatGrade(n), pos)
                q = self.fresh_type()
                ctor = type(target)
                self._unify(x, ctor(payload.inner, q), pos)
                return self._unify(GradedP(n, q), k, pos)
            case Select(l, r) | Offer(l, r):
                q1, q2 = self.fresh_type(), self.fresh_type()
                self._unify(x, type(target)(q1, q2), pos)
                self._unify(GradedP(n, q1), l, pos)
                return self._unify(GradedP(n, q2), r, pos)
            case End():
                return self._unify(x, End(), pos)
        raise _Mismatch

    def unify_grade(self, g, h, pos: Pos | None = None) -> None:
        g, h = self.zonk_grade(g), self.zonk_grade(h)
        if g == h:
            return
        match g, h:
            case GradeMeta(i), _:
                self.grades[i] = h
                return
            case _, GradeMeta(i):
                self.grades[i] = g
                return
            case NatGrade(a), NatGrade(b):
                return self.unify_nat(a, b, pos, rule="grade-mismatch")
            case IntervalGrade(a, b), IntervalGrade(c, d) if (b is INF) == (d is INF):
                self.unify_nat(a, c, pos, rule="grade-mismatch")
                if b is not INF:
                    self.unify_nat(b, d, pos, rule="grade-mismatch")
                return
            case (NatGrade(), IntervalGrade()) | (IntervalGrade(), NatGrade()):
                raise TypeCheckError(
                    "semiring-mismatch",
                    f"grade {show_grade(g)} and grade {show_grade(h)} belong to different semirings", pos)
        raise TypeCheckError("grade-mismatch", f"expected grade {show_grade(h)} but found {show_grade(g)}", pos)

    # -- type-level naturals --------------------------------------------------

    def unify_nat(self, a: NatExpr, b: NatExpr, pos: Pos | None = None, rule: str = "nat-constraint") -> None:
        if not self._solve_nat(a, b):
            self.deferred.append((a, b, pos))
        else:
            self.retry_deferred()
        self._check_ground(a, b, pos, rule)

    def _check_ground(self, a, b, pos, rule) -> None:
        a, b = cancel(self.zonk_nat(a), self.zonk_nat(b))
        if a == b:
            return
        # Over the naturals a positive constant can never be cancelled by zero.
        if (a.is_zero() and b.constant > 0) or (b.is_zero() and a.constant > 0) or \
                not any(is_meta_name(v) for v in a.variables() | b.variables()):
            raise TypeCheckError(rule, f"cannot satisfy {a} = {b}", pos)

    def _solve_nat(self, a: NatExpr, b: NatExpr) -> bool:
        """Try to discharge ``a = b``; False means it must wait for more information."""
        a, b = cancel(self.zonk_nat(a), self.zonk_nat(b))
        if a == b:
            return True
        for x, y in ((a, b), (b, a)):
            v = x.single_var()
            if v is not None and is_meta_name(v) and v not in y.variables():
                self.nats[v] = y
                return True
        for x, y in ((a, b), (b, a)):
            # A sum of unknowns equal to zero forces each of them to zero.
            if y.is_zero() and x.constant == 0 and x.is_linear() and all(map(is_meta_name, x.variables())):
                for v in x.variables():
                    self.nats[v] = NatExpr()
                return True
        if not any(is_meta_name(v) for v in a.variables() | b.variables()):
            return True  # ground disequality; reported by _check_ground
        return False

    def retry_deferred(self) -> None:
        progress = True
        while progress and self.deferred:
            progress = False
            pending, self.deferred = self.deferred, []
            for a, b, pos in pending:
                if self._solve_nat(a, b):
                    progress = True
                    self._check_ground(a, b, pos, "nat-constraint")
                else:
                    self.deferred.append((a, b, pos))

    def refine_succ(self, e: NatExpr, pos: Pos | None, what: str) -> NatExpr:
        """For a successor pattern against index ``e``, return the predecessor index."""
        e = self.zonk_nat(e)
        if e.constant >= 1:
            return nat_minus(e, 1)
        v = e.single_var()
        if v is None:
            raise TypeCheckError("pattern", f"cannot match {what} against an index of the form {e}", pos)
        k = self.fresh_nat() if is_meta_name(v) else self.fresh_skolem(v.split("#")[0])
        self.nats[v] = k + 1
        self.retry_deferred()
        return k

    def refine_zero(self, e: NatExpr, pos: Pos | None, what: str) -> None:
        e = self.zonk_nat(e)
        if e.constant > 0:
            raise TypeCheckError("pattern", f"{what} can never match an index equal to {e}", pos)
        if not e.is_linear():
            raise TypeCheckError("pattern", f"cannot match {what} against an index of the form {e}", pos)
        for v in e.variables():
            self.nats[v] = NatExpr()
        self.retry_deferred()
