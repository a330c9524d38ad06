"""Bidirectional checking of definitions against their signatures.

Each clause is checked on its own: its patterns bind linear or graded
assumptions, the body is checked against the result type, and the body's
:class:`Usage` is compared against the declared grades once unification for
that clause is complete.  Clauses are checked separately because GADT
matching refines the Nat indices differently in each of them.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

from ..grades import (
    Grade, IntervalGrade, NatExpr, NatGrade, Semiring, align, grade_add,
    grade_approx, grade_join, grade_mul, grade_one, grade_subst, grade_zero,
)
from ..protocols import PREDICATES, dual, graded_transform
from ..syntax.ast import (
    BOOL, CHANNEL_CREATING, INT, Ann, App, BinOp, BoolLit, Con, Constraint,
    DataDecl, Definition, Dual, End, GradedP, GradeMeta, GradeVar,
    IndexedDataDecl, IntLit, Lam, Let, Offer, Pair, PBox, PCon, PInt, PPair,
    Prim, Promote, PUnit, PVar, PWild, Recv, Scheme, Select, Send,
    SourceProgram, TBox, TChan, TCon, TFun, TMeta, TNat, TPair, TUnit, TVar,
    TVec, Unit, Var, arrows, pattern_vars, spine,
)
from ..syntax.parser import parse_scheme
from ..syntax.printer import grade as show_grade
from ..syntax.printer import term as show_term
from ..syntax.printer import type_ as show_type
from .builtins import BUILTIN_TYPES, CONSTRUCTOR_SIGNATURES, INDEXED_TYPES, PRIMITIVE_SIGNATURES
from .context import (
    ZERO, GAdd, GJoin, GLeaf, GMul, GOne, Graded, Linear, TypeCheckError,
    TypeCheckFailure, Usage, UsageReport, leaf,
)
from .solver import Solver, spine_has_meta

TYPE, PROTOCOL, NAT, SEMIRING = "Type", "Protocol", "Nat", "Semiring"
BASE_KINDS = (TYPE, PROTOCOL, NAT, SEMIRING)


@dataclass
class TypedProgram:
    """A program that passed checking.

    ``grades`` maps ``id`` of each ``forkNonLinear`` occurrence to the grade
    it was instantiated at, which the runtime uses as the shared refcount.
    """

    program: SourceProgram
    schemes: dict[str, Scheme]
    grades: dict[int, object] = field(default_factory=dict)
    unsafe_promotion: bool = False


@dataclass
class ParameterUsages:
    per_clause: list[dict[int, Grade]]
    joined: dict[int, Grade | None]


def subterms(t):
    yield t
    match t:
        case Lam(_, body) | Promote(body) | Ann(body, _):
            yield from subterms(body)
        case App(a, b) | Pair(a, b) | BinOp(_, a, b):
            yield from subterms(a)
            yield from subterms(b)
        case Let(bindings, body):
            for b in bindings:
                yield from subterms(b.expr)
            yield from subterms(body)


def promotion_guard(t) -> bool:
    """False when a promotion body mentions a primitive that creates channels."""
    return _channel_creator(t) is None


def _channel_creator(t) -> str | None:
    for s in subterms(t):
        if isinstance(s, Prim) and s.name in CHANNEL_CREATING:
            return s.name
    return None


def check_constraint(pred: str, p, assumed: frozenset = frozenset(), pos=None) -> bool:
    if PREDICATES[pred](p, assumed):
        return True
    if spine_has_meta(p):
        raise TypeCheckError("ambiguous", f"cannot determine the protocol needed to check {pred} {show_type(p)}", pos)
    return False


def subst_grade(g, nm, gm):
    match g:
        case GradeVar(name):
            return gm.get(name, g)
        case NatGrade() | IntervalGrade():
            return grade_subst(g, nm) if nm else g
    return g


def subst_type(t, tm: dict, nm: dict, gm: dict):
    def go(t):
        match t:
            case TVar(name):
                return tm.get(name, t)
            case TCon(name, args) if args:
                return TCon(name, tuple(map(go, args)))
            case TFun(a, b):
                return TFun(go(a), go(b))
            case TPair(a, b):
                return TPair(go(a), go(b))
            case TBox(a, g):
                return TBox(go(a), subst_grade(g, nm, gm))
            case TChan(p):
                return TChan(go(p))
            case TVec(n, a):
                return TVec(n.subst(nm), go(a))
            case TNat(n):
                return TNat(n.subst(nm))
            case Send(a, k) | Recv(a, k) | Select(a, k) | Offer(a, k):
                return type(t)(go(a), go(k))
            case Dual(p):
                return dual(go(p))
            case GradedP(n, p):
                return graded_transform(n.subst(nm), go(p))
        return t
    return go(t)


class Checker:
    def __init__(self, program: SourceProgram | None = None, unsafe_promotion: bool = False):
        self.program = program or SourceProgram()
        self.unsafe = unsafe_promotion
        self.ids = itertools.count()
        self.data_arity: dict[str, int] = dict(BUILTIN_TYPES)
        self.ctors: dict[str, Scheme] = {}
        self.globals: dict[str, Scheme] = {}
        self.errors: list[TypeCheckError] = []
        self.grade_elab: dict[int, object] = {}
        self.parameter_usages: dict[str, ParameterUsages] = {}
        self.prims = {n: self.prepare_scheme(parse_scheme(s)) for n, s in PRIMITIVE_SIGNATURES.items()}
        self.data_arity.update({"Vec": 2, "N": 1})
        for n, s in CONSTRUCTOR_SIGNATURES.items():
            self.ctors[n] = self.prepare_scheme(parse_scheme(s))
        self._reset({}, ())

    # -- driver ---------------------------------------------------------------

    def _record(self, err: TypeCheckError, definition: Definition | None = None, pos=None) -> None:
        if definition is not None:
            err.definition = definition.name
        if err.pos is None:
            err.pos = pos or (definition.pos if definition is not None else None)
        self.errors.append(err)

    def load(self) -> None:
        """Register data types and top-level signatures."""
        decls = [i for i in self.program.items if isinstance(i, (DataDecl, IndexedDataDecl))]
        for d in decls:
            try:
                self.declare_type(d)
            except TypeCheckError as e:
                self._record(e, pos=d.pos)
        for d in decls:
            if isinstance(d, DataDecl) and self.data_arity.get(d.name) == len(d.params):
                try:
                    self.declare_constructors(d)
                except TypeCheckError as e:
                    self._record(e, pos=d.pos)
        for d in self.program.defs:
            try:
                self.globals[d.name] = self.prepare_scheme(d.scheme)
            except TypeCheckError as e:
                self._record(e, d)

    def check_program(self) -> TypedProgram:
        self.load()
        for d in self.program.defs:
            if d.name in self.globals:
                try:
                    self.check_definition(d)
                except TypeCheckError as e:
                    self._record(e, d)
        if self.errors:
            raise TypeCheckFailure(self.errors)
        return TypedProgram(self.program, dict(self.globals), dict(self.grade_elab), self.unsafe)

    def declare_type(self, d) -> None:
        if isinstance(d, IndexedDataDecl):
            if d.name not in INDEXED_TYPES:
                raise TypeCheckError(
                    "unsupported", f"indexed data type '{d.name}' is not supported; only Vec and N are built in", d.pos)
            unknown = [c for c, _ in d.constructors if c not in INDEXED_TYPES[d.name]]
            if unknown:
                raise TypeCheckError(
                    "unsupported", f"built-in type {d.name} has no constructor '{unknown[0]}'", d.pos)
            return
        if d.name in self.data_arity:
            raise TypeCheckError("scope", f"type '{d.name}' is already defined", d.pos)
        if len(set(d.params)) != len(d.params):
            raise TypeCheckError("scope", f"duplicate parameter in data type '{d.name}'", d.pos)
        self.data_arity[d.name] = len(d.params)

    def declare_constructors(self, d: DataDecl) -> None:
        kinds = {p: TYPE for p in d.params}
        result = TCon(d.name, tuple(TVar(p) for p in d.params))
        for c in d.constructors:
            if c.name in self.ctors:
                raise TypeCheckError("scope", f"constructor '{c.name}' is already defined", c.pos or d.pos)
            body = result
            for f in reversed(c.fields):
                body = TFun(self._convert(f, kinds, TYPE), body)
            self.ctors[c.name] = Scheme(tuple((p, TYPE) for p in d.params), (), body)

    # -- signatures -----------------------------------------------------------

    def prepare_scheme(self, s: Scheme) -> Scheme:
        kinds: dict[str, str] = {}
        for name, kind in s.binders:
            if name in kinds:
                raise TypeCheckError("scope", f"type variable '{name}' is bound twice", s.pos)
            if kind not in BASE_KINDS and kinds.get(kind) != SEMIRING:
                raise TypeCheckError("kind", f"unknown kind '{kind}' for '{name}'", s.pos)
            kinds[name] = kind
        body = self._convert(s.body, kinds, TYPE)
        constraints = tuple(
            Constraint(c.predicate, self._convert(c.arg, kinds, PROTOCOL), pos=c.pos) for c in s.constraints)
        return Scheme(s.binders, constraints, body, pos=s.pos)

    def _want(self, want: str, have: str, t) -> None:
        if want != have:
            raise TypeCheckError(
                "kind", f"expected a {want.lower()} but found the {have.lower()} {show_type(t)}", t.pos)

    def _nat_ok(self, e: NatExpr, kinds, pos) -> NatExpr:
        for v in sorted(e.variables()):
            k = kinds.get(v)
            if k is None:
                raise TypeCheckError("scope", f"type-level natural '{v}' is not bound by the signature", pos)
            if k != NAT:
                raise TypeCheckError("kind", f"'{v}' has kind {k} but is used as a natural number", pos)
        return e

    def _convert_grade(self, g, kinds, pos):
        if isinstance(g, NatGrade):
            v = g.value.single_var()
            if v is not None and kinds.get(v) not in (None, *BASE_KINDS):
                return GradeVar(v)
            self._nat_ok(g.value, kinds, pos)
        elif isinstance(g, IntervalGrade):
            self._nat_ok(g.lo, kinds, pos)
            if isinstance(g.hi, NatExpr):
                self._nat_ok(g.hi, kinds, pos)
        return g

    def _convert(self, t, kinds: dict[str, str], want: str):
        """Check kinds and scoping of a source type, resolving grade variables."""
        conv = self._convert
        match t:
            case TVar(name):
                k = kinds.get(name)
                if k is None:
                    raise TypeCheckError("scope", f"type variable '{name}' is not bound by the signature", t.pos)
                if k not in (TYPE, PROTOCOL):
                    raise TypeCheckError("kind", f"'{name}' has kind {k} and cannot be used as a {want.lower()}", t.pos)
                if k != want:
                    raise TypeCheckError("kind", f"'{name}' has kind {k} but a {want.lower()} is expected", t.pos)
                return t
            case Send(a, k) | Recv(a, k):
                self._want(want, PROTOCOL, t)
                return type(t)(conv(a, kinds, TYPE), conv(k, kinds, PROTOCOL), pos=t.pos)
            case Select(l, r) | Offer(l, r):
                self._want(want, PROTOCOL, t)
                return type(t)(conv(l, kinds, PROTOCOL), conv(r, kinds, PROTOCOL), pos=t.pos)
            case End():
                self._want(want, PROTOCOL, t)
                return t
            case Dual(p):
                self._want(want, PROTOCOL, t)
                return dual(conv(p, kinds, PROTOCOL))
            case GradedP(n, p):
                self._want(want, PROTOCOL, t)
                return graded_transform(self._nat_ok(n, kinds, t.pos), conv(p, kinds, PROTOCOL))
        self._want(want, TYPE, t)
        match t:
            case TCon(name, args):
                arity = self.data_arity.get(name)
                if arity is None:
                    raise TypeCheckError("scope", f"unknown type '{name}'", t.pos)
                if arity != len(args):
                    raise TypeCheckError("kind", f"type '{name}' expects {arity} argument(s) but was given {len(args)}", t.pos)
                return TCon(name, tuple(conv(a, kinds, TYPE) for a in args), pos=t.pos)
            case TUnit():
                return t
            case TFun(a, b):
                return TFun(conv(a, kinds, TYPE), conv(b, kinds, TYPE), pos=t.pos)
            case TPair(a, b):
                return TPair(conv(a, kinds, TYPE), conv(b, kinds, TYPE), pos=t.pos)
            case TBox(a, g):
                return TBox(conv(a, kinds, TYPE), self._convert_grade(g, kinds, t.pos), pos=t.pos)
            case TChan(p):
                return TChan(conv(p, kinds, PROTOCOL), pos=t.pos)
            case TVec(n, a):
                return TVec(self._nat_ok(n, kinds, t.pos), conv(a, kinds, TYPE), pos=t.pos)
            case TNat(n):
                return TNat(self._nat_ok(n, kinds, t.pos), pos=t.pos)
        raise TypeCheckError("kind", f"malformed type {t!r}", getattr(t, "pos", None))

    def instantiate(self, s: Scheme, pos) -> tuple[object, dict]:
        sv = self.solver
        tm, nm, gm = {}, {}, {}
        for name, kind in s.binders:
            if kind in (TYPE, PROTOCOL):
                tm[name] = sv.fresh_type()
            elif kind == NAT:
                nm[name] = sv.fresh_nat()
            elif kind != SEMIRING:
                gm[name] = sv.fresh_grade()
        for c in s.constraints:
            self.predicates.append((c.predicate, subst_type(c.arg, tm, nm, gm), pos))
        return subst_type(s.body, tm, nm, gm), gm

    # -- clauses --------------------------------------------------------------

    def _reset(self, kinds: dict, givens: tuple) -> None:
        self.solver = Solver(self.ids)
        self.kinds = kinds
        self.givens = givens
        self.obligations: list = []
        self.predicates: list = []
        self.promotions: list = []
        self.fork_grades: list = []
        self.usage_seen: dict[str, object] = {}

    def check_definition(self, d: Definition) -> None:
        scheme = self.globals[d.name]
        per_clause = []
        for clause in d.clauses:
            self._reset(dict(scheme.binders), scheme.constraints)
            params, result = arrows(scheme.body)
            n = len(clause.patterns)
            if n > len(params):
                raise TypeCheckError(
                    "arity", f"'{d.name}' has {n} parameter(s) but its type only allows {len(params)}", clause.pos)
            rest = result
            for p in reversed(params[n:]):
                rest = TFun(p, rest)
            params = params[:n]
            ctx: dict = {}
            bound: list = []
            self.bind_patterns(clause.patterns, params, ctx, bound)
            usage = self.check(ctx, clause.body, rest)
            self.close(bound, usage)
            self.finalize()
            per_clause.append(self._box_parameter_usages(clause.patterns, params))
        joined = {}
        for i in per_clause[0] if per_clause else {}:
            gs = [u[i] for u in per_clause]
            acc = gs[0]
            for g in gs[1:]:
                acc = None if acc is None else grade_join(*align(acc, g))
            joined[i] = acc
        self.parameter_usages[d.name] = ParameterUsages(per_clause, joined)

    def _box_parameter_usages(self, patterns, params) -> dict[int, Grade]:
        out = {}
        for i, (p, ty) in enumerate(zip(patterns, params)):
            if not isinstance(p, PBox):
                continue
            declared = self.solver.zonk(ty)
            if not isinstance(declared, TBox) or isinstance(declared.grade, (GradeVar, GradeMeta)):
                continue
            if isinstance(p.inner, PVar) and p.inner.name in self.usage_seen:
                u = self.usage_seen[p.inner.name]
                out[i] = grade_zero(declared.grade.semiring) if u is None else align(u, declared.grade)[0]
            elif isinstance(p.inner, PWild):
                out[i] = grade_zero(declared.grade.semiring)
        return out

    def bind_patterns(self, pats, types, ctx, bound, grade=None) -> None:
        names = [v for p in pats for v in pattern_vars(p)]
        dup = [v for v, k in Counter(names).items() if k > 1]
        if dup:
            raise TypeCheckError("scope", f"variable '{dup[0]}' is bound more than once in a pattern", pats[0].pos)
        for p, t in zip(pats, types):
            self.bind_pattern(p, t, ctx, bound, grade)

    def bind_pattern(self, p, ty, ctx, bound, grade) -> None:
        sv = self.solver
        match p:
            case PVar(x):
                a = Linear(ty) if grade is None else Graded(ty, grade)
                ctx[x] = a
                bound.append((x, a, p.pos))
            case PWild():
                if grade is None:
                    raise TypeCheckError(
                        "weak", f"linearity violation: wildcard discards a linear value of type {show_type(sv.zonk(ty))}", p.pos)
                bound.append(("_", Graded(ty, grade), p.pos))
            case PUnit():
                sv.unify(ty, TUnit(), p.pos)
            case PInt():
                sv.unify(ty, INT, p.pos)
            case PPair(a, b):
                t = sv.zonk(ty)
                if not isinstance(t, TPair):
                    t = TPair(sv.fresh_type(), sv.fresh_type())
                    sv.unify(ty, t, p.pos)
                self.bind_pattern(a, t.fst, ctx, bound, grade)
                self.bind_pattern(b, t.snd, ctx, bound, grade)
            case PBox(inner):
                t = sv.zonk(ty)
                if not isinstance(t, TBox):
                    t = TBox(sv.fresh_type(), sv.fresh_grade())
                    sv.unify(ty, t, p.pos)
                g = leaf(t.grade) if grade is None else GMul(grade, leaf(t.grade))
                self.bind_pattern(inner, t.inner, ctx, bound, g)
            case PCon():
                self.bind_constructor(p, ty, ctx, bound, grade)
            case _:
                raise TypeCheckError("pattern", f"unsupported pattern {p!r}", getattr(p, "pos", None))

    def _arity(self, p: PCon, n: int) -> None:
        if len(p.args) != n:
            raise TypeCheckError(
                "arity", f"constructor {p.name} takes {n} argument(s) but the pattern gives {len(p.args)}", p.pos)

    def bind_constructor(self, p: PCon, ty, ctx, bound, grade) -> None:
        sv = self.solver
        if p.name in ("True", "False"):
            self._arity(p, 0)
            sv.unify(ty, BOOL, p.pos)
            return
        if p.name in ("Nil", "Cons"):
            t = sv.zonk(ty)
            if not isinstance(t, TVec):
                t = TVec(sv.fresh_nat(), sv.fresh_type())
                sv.unify(ty, t, p.pos)
            if p.name == "Nil":
                self._arity(p, 0)
                sv.refine_zero(t.length, p.pos, "Nil")
            else:
                self._arity(p, 2)
                k = sv.refine_succ(t.length, p.pos, "Cons")
                self.bind_pattern(p.args[0], t.elem, ctx, bound, grade)
                self.bind_pattern(p.args[1], TVec(k, t.elem), ctx, bound, grade)
            return
        if p.name in ("Z", "S"):
            t = sv.zonk(ty)
            if not isinstance(t, TNat):
                t = TNat(sv.fresh_nat())
                sv.unify(ty, t, p.pos)
            if p.name == "Z":
                self._arity(p, 0)
                sv.refine_zero(t.index, p.pos, "Z")
            else:
                self._arity(p, 1)
                k = sv.refine_succ(t.index, p.pos, "S")
                self.bind_pattern(p.args[0], TNat(k), ctx, bound, grade)
            return
        scheme = self.ctors.get(p.name)
        if scheme is None:
            raise TypeCheckError("scope", f"unknown constructor '{p.name}'", p.pos)
        ctype, _ = self.instantiate(scheme, p.pos)
        fields, result = arrows(ctype)
        self._arity(p, len(fields))
        sv.unify(ty, result, p.pos)
        for a, f in zip(p.args, fields):
            self.bind_pattern(a, f, ctx, bound, grade)

    def close(self, bound, usage: Usage) -> Usage:
        """Discharge the variables a scope introduced from the usage of its body."""
        usage = Usage(dict(usage.linear), dict(usage.graded))
        for name, a, pos in reversed(bound):
            if isinstance(a, Linear):
                if name not in usage.linear:
                    raise TypeCheckError("weak", f"linearity violation: linear variable '{name}' is never used", pos)
                del usage.linear[name]
            else:
                term = usage.graded.pop(name, None) if name != "_" else None
                self.obligations.append((term, a.grade, name, pos))
        return usage

    # -- checking and synthesis -----------------------------------------------

    def check(self, ctx, t, expected) -> Usage:
        sv = self.solver
        match t:
            case Lam(param, body):
                a = sv.zonk(expected)
                if isinstance(a, TMeta):
                    a = TFun(sv.fresh_type(), sv.fresh_type())
                    sv.unify(expected, a, t.pos)
                elif not isinstance(a, TFun):
                    raise TypeCheckError("type-mismatch", f"a lambda cannot have type {show_type(a)}", t.pos)
                inner = dict(ctx)
                bound: list = []
                self.bind_patterns([param], [a.arg], inner, bound)
                return self.close(bound, self.check(inner, body, a.res))
            case Promote(body):
                return self.check_promotion(ctx, t, expected)
            case Let(bindings, body):
                return self.let(ctx, bindings, body, expected)[1]
            case Pair(a, b):
                pt = sv.zonk(expected)
                if not isinstance(pt, TPair):
                    pt = TPair(sv.fresh_type(), sv.fresh_type())
                    sv.unify(pt, expected, t.pos)
                return self.check(ctx, a, pt.fst).plus(self.check(ctx, b, pt.snd))
            case App():
                return self.app(ctx, t, expected)[1]
        actual, usage = self.synth(ctx, t)
        sv.unify(actual, expected, t.pos)
        return usage

    def check_promotion(self, ctx, t: Promote, expected) -> Usage:
        sv = self.solver
        a = sv.zonk(expected)
        if isinstance(a, TMeta):
            a = TBox(sv.fresh_type(), sv.fresh_grade())
            sv.unify(expected, a, t.pos)
        elif not isinstance(a, TBox):
            raise TypeCheckError(
                "pr", f"promotion {show_term(t)} needs a graded type but {show_type(a)} is expected", t.pos)
        if not self.unsafe:
            prim = _channel_creator(t.body)
            if prim is not None:
                raise TypeCheckError(
                    "promotion-guard",
                    f"'{prim}' may not appear under a promotion: under call-by-value the channel it creates "
                    "would be shared by every use of the box", t.pos)
        usage = self.check(ctx, t.body, a.inner)
        self.promotions.append((a.grade, t.pos))
        return usage.scaled(leaf(a.grade))

    def let(self, ctx, bindings, body, expected):
        if not bindings:
            if expected is None:
                return self.synth(ctx, body)
            return expected, self.check(ctx, body, expected)
        b = bindings[0]
        if b.annotation is not None:
            bt = self._convert(b.annotation, self.kinds, TYPE)
            u1 = self.check(ctx, b.expr, bt)
        else:
            bt, u1 = self.synth(ctx, b.expr)
        inner = dict(ctx)
        bound: list = []
        self.bind_patterns([b.pattern], [bt], inner, bound)
        result, u2 = self.let(inner, bindings[1:], body, expected)
        return result, u1.plus(self.close(bound, u2))

    def synth(self, ctx, t):
        sv = self.solver
        match t:
            case Var(x):
                a = ctx.get(x)
                if isinstance(a, Linear):
                    return a.type, Usage({x: t.pos}, {})
                if isinstance(a, Graded):
                    return a.type, Usage({}, {x: GOne(a.grade)})
                if x in self.globals:
                    return self.instantiate(self.globals[x], t.pos)[0], Usage()
                raise TypeCheckError("scope", f"unbound variable '{x}'", t.pos)
            case Prim(name):
                ty, gm = self.instantiate(self.prims[name], t.pos)
                if name == "forkNonLinear":
                    self.fork_grades.append((t, gm["r"]))
                return ty, Usage()
            case Con(name):
                scheme = self.ctors.get(name)
                if scheme is None:
                    raise TypeCheckError("scope", f"unknown constructor '{name}'", t.pos)
                return self.instantiate(scheme, t.pos)[0], Usage()
            case IntLit():
                return INT, Usage()
            case BoolLit():
                return BOOL, Usage()
            case Unit():
                return TUnit(), Usage()
            case BinOp(op, a, b):
                u = self.check(ctx, a, INT).plus(self.check(ctx, b, INT))
                return (INT if op == "+" else BOOL), u
            case Pair(a, b):
                ta, ua = self.synth(ctx, a)
                tb, ub = self.synth(ctx, b)
                return TPair(ta, tb), ua.plus(ub)
            case Ann(e, ty):
                ty = self._convert(ty, self.kinds, TYPE)
                return ty, self.check(ctx, e, ty)
            case Let(bindings, body):
                return self.let(ctx, bindings, body, None)
            case App():
                return self.app(ctx, t, None)
            case Lam():
                raise TypeCheckError(
                    "synthesis", "cannot infer the type of this lambda; it needs a known function type", t.pos)
            case Promote():
                raise TypeCheckError(
                    "pr", "cannot infer the grade of this promotion; it needs an expected graded type or an annotation", t.pos)
        raise TypeCheckError("synthesis", f"cannot type {t!r}", getattr(t, "pos", None))

    def app(self, ctx, t, expected):
        sv = self.solver
        head, args = spine(t)
        if isinstance(head, Lam):
            arg_types, usages = [], []
            for a in args:
                ta, ua = self.synth(ctx, a)
                arg_types.append(ta)
                usages.append(ua)
            result = expected if expected is not None else sv.fresh_type()
            fn = result
            for ta in reversed(arg_types):
                fn = TFun(ta, fn)
            usage = self.check(ctx, head, fn)
            for ua in usages:
                usage = usage.plus(ua)
            return result, usage
        ty, usage = self.synth(ctx, head)
        params = []
        for _ in args:
            cur = sv.zonk(ty)
            if isinstance(cur, TMeta):
                cur = TFun(sv.fresh_type(), sv.fresh_type())
                sv.unify(ty, cur, t.pos)
            if not isinstance(cur, TFun):
                raise TypeCheckError(
                    "type-mismatch", f"{show_term(head)} is applied to too many arguments", t.pos)
            params.append(cur.arg)
            ty = cur.res
        if expected is not None:
            sv.unify(ty, expected, t.pos)
        arg_usages = [self.check(ctx, a, p) for a, p in zip(args, params)]
        if isinstance(head, Prim) and head.name == "offer" and len(args) >= 2:
            arg_usages[:2] = [arg_usages[0].joined(arg_usages[1], t.pos)]
        for ua in arg_usages:
            usage = usage.plus(ua)
        return ty, usage

    # -- end of clause --------------------------------------------------------

    def eval_grade(self, term, name, pos):
        """Evaluate a symbolic usage; ``None`` stands for zero in any semiring."""
        ev = lambda x: self.eval_grade(x, name, pos)
        match term:
            case None:
                return None
            case _ if term is ZERO:
                return None
            case GLeaf(g):
                z = self.solver.zonk_grade(g)
                if isinstance(z, GradeMeta):
                    raise TypeCheckError("ambiguous", f"ambiguous grade for '{name}'", pos)
                return z
            case GOne(like):
                g = ev(like)
                if g is None or isinstance(g, GradeVar):
                    raise TypeCheckError(
                        "der", f"cannot use '{name}' once: its grade {g} is not known to contain 1", pos)
                return grade_one(g.semiring)
            case GAdd(a, b):
                x, y = ev(a), ev(b)
                if x is None or y is None:
                    return y if x is None else x
                return self._arith(grade_add, x, y, name, pos)
            case GMul(a, b):
                x, y = ev(a), ev(b)
                if x is None or y is None:
                    return None
                return self._arith(grade_mul, x, y, name, pos)
            case GJoin(a, b):
                x, y = ev(a), ev(b)
                if x is None and y is None:
                    return None
                if isinstance(x, GradeVar) or isinstance(y, GradeVar):
                    raise TypeCheckError("grade-mismatch", f"cannot join polymorphic usage of '{name}'", pos)
                x = grade_zero(y.semiring) if x is None else x
                y = grade_zero(x.semiring) if y is None else y
                j = grade_join(*align(x, y))
                if j is None:
                    raise TypeCheckError(
                        "grade-mismatch",
                        f"branches use '{name}' {x} and {y} times; exact grades only join when equal", pos)
                return j
        raise TypeError(f"not a grade term: {term!r}")

    def _arith(self, op, x, y, name, pos):
        if isinstance(x, GradeVar) or isinstance(y, GradeVar):
            raise TypeCheckError(
                "grade-mismatch", f"cannot do arithmetic on the polymorphic grade of '{name}'", pos)
        return op(*align(x, y))

    def check_obligation(self, term, declared, name, pos) -> None:
        d = self.eval_grade(declared, name, pos)
        u = self.eval_grade(term, name, pos)
        self.usage_seen[name] = u
        what = "discarded box contents" if name == "_" else f"variable '{name}'"
        if isinstance(d, GradeVar):
            if u != d:
                raise TypeCheckError("grade-mismatch", f"{what} must be used exactly at the polymorphic grade {d}", pos)
            return
        if isinstance(u, GradeVar):
            raise TypeCheckError("grade-mismatch", f"{what} is used at grade {u} but declared {show_grade(d)}", pos)
        if u is None:
            u = grade_zero(d.semiring)
        if u.semiring is Semiring.INTERVAL and d.semiring is Semiring.NAT:
            raise TypeCheckError(
                "semiring-mismatch", f"{what} is used with interval grade {show_grade(u)} but declared with exact grade {show_grade(d)}", pos)
        u, d = align(u, d)
        msg = f"{what} (bound by a box pattern, elim) is used {show_grade(u)} time(s) but its grade allows {show_grade(d)}"
        if isinstance(d, NatGrade):
            try:
                self.solver.unify_nat(u.value, d.value, pos, rule="grade-mismatch")
            except TypeCheckError:
                raise TypeCheckError("grade-mismatch", msg, pos) from None
        elif not grade_approx(self.solver.zonk_grade(u), self.solver.zonk_grade(d)):
            raise TypeCheckError("grade-mismatch", msg, pos)

    def finalize(self) -> None:
        sv = self.solver
        sv.retry_deferred()
        for term, declared, name, pos in self.obligations:
            self.check_obligation(term, declared, name, pos)
        sv.retry_deferred()
        for pred, proto, pos in self.predicates:
            p = sv.zonk(proto)
            assumed = frozenset(sv.zonk(c.arg) for c in self.givens if c.predicate == pred)
            if not check_constraint(pred, p, assumed, pos):
                raise TypeCheckError("constraint", f"{pred} does not hold for protocol {show_type(p)}", pos)
        for g, pos in self.promotions:
            if isinstance(sv.zonk_grade(g), GradeMeta):
                raise TypeCheckError("ambiguous", "ambiguous grade: cannot determine the grade of this promotion", pos)
        for node, g in self.fork_grades:
            z = sv.zonk_grade(g)
            if isinstance(z, GradeMeta):
                raise TypeCheckError(
                    "ambiguous", "ambiguous grade: cannot determine the grade of this forkNonLinear", node.pos)
            self.grade_elab[id(node)] = z


# -- public entry points ------------------------------------------------------


def check_program(program: SourceProgram, unsafe_promotion: bool = False) -> TypedProgram:
    return Checker(program, unsafe_promotion).check_program()


def _term_checker(ctx, program, unsafe_promotion):
    c = Checker(program, unsafe_promotion)
    c.load()
    if c.errors:
        raise TypeCheckFailure(c.errors)
    inner = {}
    for x, a in ctx.items():
        inner[x] = Graded(a.type, leaf(a.grade)) if isinstance(a, Graded) else a
    return c, inner


def _report(c: Checker, ctx, usage: Usage) -> UsageReport:
    c.finalize()
    graded = {}
    for x, a in ctx.items():
        if isinstance(a, Graded):
            c.check_obligation(usage.graded.get(x), leaf(a.grade), x, None)
            u = c.usage_seen[x]
            graded[x] = grade_zero(a.grade.semiring) if u is None else u
    return UsageReport(graded, frozenset(usage.linear))


def check_term(ctx, t, expected, program: SourceProgram | None = None,
               unsafe_promotion: bool = False) -> UsageReport:
    """Check ``t`` against ``expected`` under ``ctx`` (assumptions with concrete grades)."""
    c, inner = _term_checker(ctx, program, unsafe_promotion)
    return _report(c, ctx, c.check(inner, t, expected))


def synth_term(ctx, t, program: SourceProgram | None = None, unsafe_promotion: bool = False):
    c, inner = _term_checker(ctx, program, unsafe_promotion)
    ty, usage = c.synth(inner, t)
    report = _report(c, ctx, usage)
    return c.solver.zonk(ty), report


def parameter_usages(program: SourceProgram, name: str) -> ParameterUsages:
    """Per-clause usage of each box-pattern parameter of ``name`` and their join."""
    c = Checker(program)
    c.check_program()
    return c.parameter_usages[name]


def solve_nat_constraints(cs) -> dict[str, NatExpr]:
    """Solve equations between Nat expressions, treating every variable as unknown.

    Raises :class:`TypeCheckError` with rule ``nat-constraint`` when a ground
    disequality remains.
    """
    sv = Solver()
    renaming: dict[str, NatExpr] = {}
    for a, b in cs:
        for v in a.variables() | b.variables():
            renaming.setdefault(v, NatExpr.var(f"?{v}"))
    back = {f"?{v}": NatExpr.var(v) for v in renaming}
    try:
        for a, b in cs:
            sv.unify_nat(a.subst(renaming), b.subst(renaming))
        sv.retry_deferred()
    except TypeCheckError as e:
        raise TypeCheckError(e.rule, e.message.replace("?", ""), e.pos) from None
    out = {}
    for v, m in renaming.items():
        z = sv.zonk_nat(m)
        if z != m:
            out[v] = z.subst(back)
    return out
