"""Recursive-descent parser for the surface language.

Layout rule: a lower-case identifier, ``data`` or ``import`` in column 1
starts a new top-level item and terminates whatever expression or type was
being parsed.  Everything else is free-form.
"""
from __future__ import annotations

from dataclasses import replace

from ..grades import INF, IntervalGrade, NatExpr, NatGrade
from .ast import (
    PRIMITIVES, Ann, App, Binding, BinOp, BoolLit, Clause, Con, Constraint,
    ConstructorDecl, DataDecl, Definition, Dual, End, GradedP, Import,
    IndexedDataDecl, IntLit, Lam, Let, Offer, Pair, PBox, PCon, PInt, PPair,
    Promote, PUnit, PVar, PWild, Prim, Recv, Scheme, Select, Send,
    SourceProgram, TBox, TCon, TChan, TFun, TNat, TPair, TUnit, TVar, TVec,
    Unit, Var,
)
from .lexer import SyntaxError_, Token, tokenize

# Type constructors with dedicated nodes, and how many arguments they take.
_TYPE_ARITY = {
    "LChan": 1, "Chan": 1, "Vec": 2, "N": 1, "Graded": 2,
    "Send": 2, "Recv": 2, "Select": 2, "Offer": 2, "Dual": 1,
}
PREDICATES = ("SingleAction", "ReceivePrefix", "Sends")


class Parser:
    def __init__(self, text: str, layout: bool = True):
        self.toks = tokenize(text)
        if not layout:
            self.toks = [replace(t, bol=t.kind == "eof") for t in self.toks]
        self.i = 0

    # -- token helpers -------------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, kind: str, value: str | None = None) -> bool:
        return self.peek().is_(kind, value)

    def at_sym(self, value: str) -> bool:
        return self.at("sym", value)

    def accept(self, kind: str, value: str | None = None) -> Token | None:
        if self.at(kind, value):
            return self.advance()
        return None

    def expect(self, kind: str, value: str | None = None) -> Token:
        tok = self.peek()
        if not tok.is_(kind, value):
            want = value if value is not None else kind
            self.fail(f"expected {want!r} but found {tok}", tok)
        return self.advance()

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise SyntaxError_(message, tok.line, tok.col)

    def at_item_start(self) -> bool:
        tok = self.peek()
        if tok.kind == "eof":
            return True
        return tok.bol and (tok.kind == "lower" or tok.is_("kw", "data") or tok.is_("kw", "import"))

    @staticmethod
    def pos(tok: Token) -> tuple[int, int]:
        return (tok.line, tok.col)

    # -- program -------------------------------------------------------------

    def program(self) -> SourceProgram:
        order: list = []
        sigs: dict[str, tuple[Scheme, Token]] = {}
        clauses: dict[str, list[Clause]] = {}
        while not self.at("eof"):
            tok = self.peek()
            if not tok.bol:
                self.fail(f"unexpected {tok}; top-level items start in column 1", tok)
            if tok.is_("kw", "data"):
                order.append(self.data_decl())
            elif tok.is_("kw", "import"):
                self.advance()
                name = self.expect("upper")
                order.append(Import(name.value, pos=self.pos(tok)))
            elif tok.kind == "lower":
                if self.peek(1).is_("sym", ":"):
                    self.advance()
                    self.advance()
                    if tok.value in sigs:
                        self.fail(f"duplicate type signature for {tok.value!r}", tok)
                    sigs[tok.value] = (self.scheme(), tok)
                    clauses[tok.value] = []
                    order.append(tok.value)
                else:
                    if tok.value not in sigs:
                        self.fail(f"equation for {tok.value!r} has no preceding type signature", tok)
                    clauses[tok.value].append(self.clause())
            else:
                self.fail(f"unknown top-level syntax starting with {tok}", tok)
        items = []
        for item in order:
            if not isinstance(item, str):
                items.append(item)
                continue
            scheme, tok = sigs[item]
            cs = clauses[item]
            if not cs:
                self.fail(f"type signature for {item!r} has no equations", tok)
            if len({len(c.patterns) for c in cs}) != 1:
                self.fail(f"equations for {item!r} have different numbers of arguments", tok)
            items.append(Definition(item, scheme, tuple(cs), pos=self.pos(tok)))
        return SourceProgram(tuple(items))

    def clause(self) -> Clause:
        name = self.advance()
        pats = []
        while not self.at_sym("="):
            if self.at_item_start() or not self.at_apat_start():
                self.fail(f"expected a pattern or '=' in equation for {name.value!r}")
            pats.append(self.apat())
        self.expect("sym", "=")
        body = self.expr()
        self.accept("sym", ";")
        return Clause(tuple(pats), body, pos=self.pos(name))

    def data_decl(self):
        start = self.expect("kw", "data")
        name = self.expect("upper").value
        indexed: list[tuple[str, str]] = []
        kinded = False
        while True:
            if self.at("lower") and not self.at_item_start():
                indexed.append((self.advance().value, "Type"))
            elif self.at_sym("("):
                self.advance()
                names = [self.expect("lower").value]
                while self.at("lower"):
                    names.append(self.advance().value)
                self.expect("sym", ":")
                kind = self.kind()
                self.expect("sym", ")")
                indexed.extend((n, kind) for n in names)
                kinded = True
            else:
                break
        if self.accept("kw", "where"):
            ctors = []
            while self.at("upper") and not self.at_item_start():
                cname = self.advance().value
                self.expect("sym", ":")
                ctors.append((cname, self.type_()))
                if not self.accept("sym", ";"):
                    break
            return IndexedDataDecl(name, tuple(indexed), tuple(ctors), pos=self.pos(start))
        if kinded:
            self.fail("kinded data parameters require a 'where' declaration")
        self.expect("sym", "=")
        ctors = [self.constructor_decl()]
        while self.accept("sym", "|"):
            ctors.append(self.constructor_decl())
        return DataDecl(name, tuple(n for n, _ in indexed), tuple(ctors), pos=self.pos(start))

    def constructor_decl(self) -> ConstructorDecl:
        tok = self.expect("upper")
        fields = []
        while self.at_type_atom_start():
            fields.append(self.type_atom())
        return ConstructorDecl(tok.value, tuple(fields), pos=self.pos(tok))

    # -- types ---------------------------------------------------------------

    def kind(self) -> str:
        tok = self.peek()
        if tok.kind in ("upper", "lower"):
            return self.advance().value
        self.fail(f"expected a kind but found {tok}")

    def scheme(self) -> Scheme:
        start = self.peek()
        binders: list[tuple[str, str]] = []
        constraints: list[Constraint] = []
        if self.accept("kw", "forall"):
            self.expect("sym", "{")
            while True:
                names = [self.expect("lower").value]
                while self.at("lower"):
                    names.append(self.advance().value)
                self.expect("sym", ":")
                kind = self.kind()
                binders.extend((n, kind) for n in names)
                if not self.accept("sym", ","):
                    break
            self.expect("sym", "}")
            self.expect("sym", ".")
        if self.at_sym("{"):
            self.advance()
            while True:
                tok = self.expect("upper")
                if tok.value not in PREDICATES:
                    self.fail(f"unknown predicate {tok.value!r}", tok)
                constraints.append(Constraint(tok.value, self.type_atom(), pos=self.pos(tok)))
                if not self.accept("sym", ","):
                    break
            self.expect("sym", "}")
            self.expect("sym", "=>")
        body = self.type_()
        return Scheme(tuple(binders), tuple(constraints), body, pos=self.pos(start))

    def type_(self):
        start = self.peek()
        t = self.btype()
        if self.accept("sym", "->"):
            return TFun(t, self.type_(), pos=self.pos(start))
        return t

    def btype(self):
        start = self.peek()
        t = self.app_type()
        while self.at_sym("["):
            self.advance()
            g = self.grade()
            self.expect("sym", "]")
            t = TBox(t, g, pos=self.pos(start))
        return t

    def app_type(self):
        tok = self.peek()
        if tok.kind == "upper":
            name = tok.value
            if name in _TYPE_ARITY:
                self.advance()
                return self.type_con_args(name, tok)
            if name not in ("Int", "Bool", "End"):
                self.advance()
                args = []
                while self.at_type_atom_start():
                    args.append(self.type_atom())
                return TCon(name, tuple(args), pos=self.pos(tok))
        return self.type_atom()

    def type_con_args(self, name: str, tok: Token):
        p = self.pos(tok)
        if name in ("LChan", "Chan"):
            return TChan(self.type_atom(), pos=p)
        if name == "Vec":
            n = self.nat_atom()
            return TVec(n, self.type_atom(), pos=p)
        if name == "N":
            return TNat(self.nat_atom(), pos=p)
        if name == "Graded":
            n = self.nat_atom()
            return GradedP(n, self.type_atom(), pos=p)
        if name == "Dual":
            return Dual(self.type_atom(), pos=p)
        a = self.type_atom()
        b = self.type_atom()
        return {"Send": Send, "Recv": Recv, "Select": Select, "Offer": Offer}[name](a, b, pos=p)

    def at_type_atom_start(self) -> bool:
        tok = self.peek()
        if tok.bol and tok.kind != "upper":
            return False
        return tok.kind in ("lower", "upper") or tok.is_("sym", "(")

    def type_atom(self):
        tok = self.peek()
        p = self.pos(tok)
        if tok.kind == "lower" and not tok.bol:
            self.advance()
            return TVar(tok.value, pos=p)
        if tok.kind == "upper":
            self.advance()
            if tok.value == "End":
                return End(pos=p)
            if tok.value in _TYPE_ARITY:
                self.fail(f"type constructor {tok.value!r} must be applied; add parentheses", tok)
            return TCon(tok.value, pos=p)
        if self.accept("sym", "("):
            if self.accept("sym", ")"):
                return TUnit(pos=p)
            t = self.type_()
            if self.accept("sym", ","):
                u = self.type_()
                self.expect("sym", ")")
                return TPair(t, u, pos=p)
            self.expect("sym", ")")
            return t
        self.fail(f"expected a type but found {tok}")

    # -- nat expressions and grades -------------------------------------------

    def nat_atom(self) -> NatExpr:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return NatExpr.const(int(tok.value))
        if tok.kind == "lower":
            self.advance()
            return NatExpr.var(tok.value)
        if self.accept("sym", "("):
            e = self.nat_expr()
            self.expect("sym", ")")
            return e
        self.fail(f"expected a natural number index but found {tok}")

    def nat_expr(self) -> NatExpr:
        e = self.nat_term()
        while self.accept("sym", "+"):
            e = e + self.nat_term()
        return e

    def nat_term(self) -> NatExpr:
        e = self.nat_atom()
        while self.accept("sym", "*"):
            e = e * self.nat_atom()
        return e

    def grade(self):
        lo = self.nat_expr()
        if self.accept("sym", ".."):
            if self.accept("upper", "Inf"):
                return IntervalGrade(lo, INF)
            hi = self.nat_expr()
            try:
                return IntervalGrade(lo, hi)
            except ValueError as exc:
                self.fail(str(exc))
        return NatGrade(lo)

    # -- patterns ------------------------------------------------------------

    def at_apat_start(self) -> bool:
        tok = self.peek()
        return tok.kind in ("lower", "upper", "int") or tok.is_("sym", "_") or \
            tok.is_("sym", "(") or tok.is_("sym", "[")

    def pattern(self):
        tok = self.peek()
        if tok.kind == "upper":
            self.advance()
            args = []
            while self.at_apat_start() and not self.at_item_start():
                args.append(self.apat())
            return PCon(tok.value, tuple(args), pos=self.pos(tok))
        return self.apat()

    def apat(self):
        tok = self.advance()
        p = self.pos(tok)
        if tok.kind == "lower":
            return PVar(tok.value, pos=p)
        if tok.is_("sym", "_"):
            return PWild(pos=p)
        if tok.kind == "int":
            return PInt(int(tok.value), pos=p)
        if tok.kind == "upper":
            return PCon(tok.value, pos=p)
        if tok.is_("sym", "("):
            if self.accept("sym", ")"):
                return PUnit(pos=p)
            a = self.pattern()
            if self.accept("sym", ","):
                b = self.pattern()
                self.expect("sym", ")")
                return PPair(a, b, pos=p)
            self.expect("sym", ")")
            return a
        if tok.is_("sym", "["):
            inner = self.pattern()
            self.expect("sym", "]")
            return PBox(inner, pos=p)
        raise SyntaxError_(f"expected a pattern but found {tok}", tok.line, tok.col)

    # -- terms ---------------------------------------------------------------

    def expr(self):
        tok = self.peek()
        p = self.pos(tok)
        if self.accept("kw", "let"):
            bindings = [self.binding()]
            while self.accept("sym", ";"):
                if self.at("kw", "in"):
                    break
                bindings.append(self.binding())
            self.expect("kw", "in")
            return Let(tuple(bindings), self.expr(), pos=p)
        if self.accept("sym", "\\"):
            params = [self.apat()]
            while not self.at_sym("->"):
                params.append(self.apat())
            self.advance()
            body = self.expr()
            for param in reversed(params):
                body = Lam(param, body, pos=p)
            return body
        return self.eq_expr()

    def binding(self) -> Binding:
        tok = self.peek()
        pat = self.pattern()
        ann = None
        if self.accept("sym", ":"):
            ann = self.type_()
        self.expect("sym", "=")
        return Binding(pat, ann, self.expr(), pos=self.pos(tok))

    def eq_expr(self):
        tok = self.peek()
        left = self.add_expr()
        if self.accept("sym", "=="):
            return BinOp("==", left, self.add_expr(), pos=self.pos(tok))
        return left

    def add_expr(self):
        tok = self.peek()
        left = self.app_expr()
        while self.accept("sym", "+"):
            left = BinOp("+", left, self.app_expr(), pos=self.pos(tok))
        return left

    def at_atom_start(self) -> bool:
        if self.at_item_start():
            return False
        tok = self.peek()
        return tok.kind in ("lower", "upper", "int") or tok.is_("sym", "(") or tok.is_("sym", "[")

    def app_expr(self):
        tok = self.peek()
        if not self.at_atom_start():
            self.fail(f"expected an expression but found {tok}")
        t = self.atom()
        while self.at_atom_start():
            t = App(t, self.atom(), pos=self.pos(tok))
        return t

    def atom(self):
        tok = self.advance()
        p = self.pos(tok)
        if tok.kind == "lower":
            if tok.value in PRIMITIVES:
                return Prim(tok.value, pos=p)
            return Var(tok.value, pos=p)
        if tok.kind == "upper":
            if tok.value in ("True", "False"):
                return BoolLit(tok.value == "True", pos=p)
            return Con(tok.value, pos=p)
        if tok.kind == "int":
            return IntLit(int(tok.value), pos=p)
        if tok.is_("sym", "("):
            if self.accept("sym", ")"):
                return Unit(pos=p)
            e = self.expr()
            if self.accept("sym", ","):
                f = self.expr()
                self.expect("sym", ")")
                return Pair(e, f, pos=p)
            if self.accept("sym", ":"):
                t = self.type_()
                self.expect("sym", ")")
                return Ann(e, t, pos=p)
            self.expect("sym", ")")
            return e
        if tok.is_("sym", "["):
            e = self.expr()
            self.expect("sym", "]")
            return Promote(e, pos=p)
        raise SyntaxError_(f"expected an expression but found {tok}", tok.line, tok.col)


def parse_program(text: str) -> SourceProgram:
    return Parser(text).program()


def parse_type(text: str):
    p = Parser(text, layout=False)
    t = p.type_()
    p.expect("eof")
    return t


def parse_scheme(text: str) -> Scheme:
    p = Parser(text, layout=False)
    s = p.scheme()
    p.expect("eof")
    return s


def parse_term(text: str):
    p = Parser(text, layout=False)
    t = p.expr()
    p.expect("eof")
    return t
