"""Pretty printer whose output reparses to an equal AST."""
from __future__ import annotations

from ..grades import INF, IntervalGrade, NatExpr, NatGrade
from .ast import (
    Ann, App, BinOp, BoolLit, Con, DataDecl, Definition, Dual, End, GradedP,
    GradeMeta, GradeVar, Import, IndexedDataDecl, IntLit, Lam, Let, Offer,
    Pair, PBox, PCon, PInt, PPair, Prim, Promote, PUnit, PVar, PWild, Recv,
    Scheme, Select, Send, SourceProgram, TBox, TCon, TChan, TFun, TMeta, TNat,
    TPair, TUnit, TVar, TVec, Unit, Var,
)

# type precedences
T_ARROW, T_BOX, T_ATOM = 0, 1, 2
# term precedences
E_TOP, E_EQ, E_ADD, E_APP, E_ATOM = 0, 1, 2, 3, 4


def _paren(s: str, needed: bool) -> str:
    return f"({s})" if needed else s


def nat_atom(e: NatExpr) -> str:
    s = str(e)
    return s if e.is_const() or e.single_var() else f"({s})"


def grade(g) -> str:
    match g:
        case NatGrade(value):
            return str(value)
        case IntervalGrade(lo, hi):
            return f"{nat_atom(lo)}..{'Inf' if hi is INF else nat_atom(hi)}"
        case GradeVar(name):
            return name
        case GradeMeta(id):
            return f"?r{id}"
    raise TypeError(f"not a grade: {g!r}")


def type_(t, prec: int = T_ARROW) -> str:
    match t:
        case TFun(a, b):
            return _paren(f"{type_(a, T_BOX)} -> {type_(b, T_ARROW)}", prec > T_ARROW)
        case TBox(inner, g):
            return _paren(f"{type_(inner, T_ATOM)} [{grade(g)}]", prec > T_BOX)
        case TVar(name):
            return name
        case TMeta(id):
            return f"?t{id}"
        case TUnit():
            return "()"
        case End():
            return "End"
        case TPair(a, b):
            return f"({type_(a)}, {type_(b)})"
        case TCon(name, ()):
            return name
    match t:
        case TCon(name, args):
            s = " ".join([name, *(type_(a, T_ATOM) for a in args)])
        case TChan(p):
            s = f"LChan {type_(p, T_ATOM)}"
        case TVec(n, a):
            s = f"Vec {nat_atom(n)} {type_(a, T_ATOM)}"
        case TNat(n):
            s = f"N {nat_atom(n)}"
        case GradedP(n, p):
            s = f"Graded {nat_atom(n)} {type_(p, T_ATOM)}"
        case Dual(p):
            s = f"Dual {type_(p, T_ATOM)}"
        case Send(a, p) | Recv(a, p) | Select(a, p) | Offer(a, p):
            s = f"{type(t).__name__} {type_(a, T_ATOM)} {type_(p, T_ATOM)}"
        case _:
            raise TypeError(f"not a type: {t!r}")
    return _paren(s, prec >= T_ATOM)


def scheme(s: Scheme) -> str:
    out = ""
    if s.binders:
        out += "forall {" + ", ".join(f"{n} : {k}" for n, k in s.binders) + "} . "
    if s.constraints:
        out += "{" + ", ".join(f"{c.predicate} {type_(c.arg, T_ATOM)}" for c in s.constraints) + "} => "
    return out + type_(s.body)


def pattern(p, atomic: bool = False) -> str:
    match p:
        case PVar(name):
            return name
        case PWild():
            return "_"
        case PUnit():
            return "()"
        case PInt(v):
            return str(v)
        case PPair(a, b):
            return f"({pattern(a)}, {pattern(b)})"
        case PBox(inner):
            return f"[{pattern(inner)}]"
        case PCon(name, ()):
            return name
        case PCon(name, args):
            return _paren(" ".join([name, *(pattern(a, True) for a in args)]), atomic)
    raise TypeError(f"not a pattern: {p!r}")


def term(t, prec: int = E_TOP) -> str:
    match t:
        case Var(name) | Prim(name) | Con(name):
            return name
        case IntLit(v):
            return str(v)
        case BoolLit(v):
            return "True" if v else "False"
        case Unit():
            return "()"
        case Pair(a, b):
            return f"({term(a)}, {term(b)})"
        case Promote(body):
            return f"[{term(body)}]"
        case Ann(e, ty):
            return f"({term(e)} : {type_(ty)})"
        case App(f, a):
            return _paren(f"{term(f, E_APP)} {term(a, E_ATOM)}", prec > E_APP)
        case BinOp("+", a, b):
            return _paren(f"{term(a, E_ADD)} + {term(b, E_APP)}", prec > E_ADD)
        case BinOp("==", a, b):
            return _paren(f"{term(a, E_ADD)} == {term(b, E_ADD)}", prec > E_EQ)
        case Lam(p, body):
            return _paren(f"\\{pattern(p, True)} -> {term(body)}", prec > E_TOP)
        case Let(bindings, body):
            parts = []
            for b in bindings:
                ann = f" : {type_(b.annotation)}" if b.annotation is not None else ""
                parts.append(f"{pattern(b.pattern)}{ann} = {term(b.expr)}")
            return _paren(f"let {'; '.join(parts)} in {term(body)}", prec > E_TOP)
    raise TypeError(f"not a term: {t!r}")


def item(i) -> str:
    match i:
        case Definition(name, sch, clauses):
            lines = [f"{name} : {scheme(sch)}"]
            for k, c in enumerate(clauses):
                head = " ".join([name, *(pattern(p, True) for p in c.patterns)])
                sep = ";" if k < len(clauses) - 1 else ""
                lines.append(f"{head} = {term(c.body)}{sep}")
            return "\n".join(lines)
        case DataDecl(name, params, ctors):
            alts = " | ".join(" ".join([c.name, *(type_(f, T_ATOM) for f in c.fields)]) for c in ctors)
            return " ".join(["data", name, *params, "=", alts])
        case IndexedDataDecl(name, params, ctors):
            head = " ".join(["data", name, *(f"({n} : {k})" for n, k in params), "where"])
            body = ";\n".join(f"  {c} : {type_(t)}" for c, t in ctors)
            return f"{head}\n{body}" if ctors else head
        case Import(module):
            return f"import {module}"
    raise TypeError(f"not a top-level item: {i!r}")


def pretty_print(p: SourceProgram) -> str:
    if not p.items:
        return ""
    return "\n\n".join(item(i) for i in p.items) + "\n"
