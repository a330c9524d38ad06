from __future__ import annotations

from dataclasses import replace

import pytest

from conftest import corpus_files, load
from gradedsess.grades import INF, IntervalGrade, NatExpr, NatGrade
from gradedsess.syntax import parse_program, parse_term, parse_type
from gradedsess.syntax.ast import (
    Dual, End, Offer, PBox, PVar, PWild, Recv, TBox, TChan, TCon, TFun, TMeta,
)
from gradedsess.syntax import printer
from gradedsess.typechecker import (
    Graded, Linear, TypeCheckError, TypeCheckFailure, TypingContext,
    check_constraint, check_program, check_term, ctx_add, ctx_approx, ctx_scale,
    parameter_usages, promotion_guard, solve_nat_constraints, synth_term,
)

INT = TCon("Int")


def errors(text: str, unsafe: bool = False) -> list[TypeCheckError]:
    try:
        check_program(parse_program(text), unsafe_promotion=unsafe)
    except TypeCheckFailure as f:
        return f.errors
    return []


def rules(text: str, unsafe: bool = False) -> list[str]:
    return [e.rule for e in errors(text, unsafe)]


# -- whole programs -----------------------------------------------------------


@pytest.mark.parametrize("path", corpus_files("ex"), ids=lambda p: p.name)
def test_positive_corpus(path):
    check_program(load(path.name))


NEGATIVE = {
    "neg_copy_grade1.gsess": ("grade-mismatch", "used 2 time(s) but its grade allows 1"),
    "neg_frommaybe_default.gsess": ("grade-mismatch", "used 2..2 time(s) but its grade allows 0..1"),
    "neg_nonlinear_two_actions.gsess": ("constraint", "SingleAction does not hold"),
    "neg_replicate_send.gsess": ("constraint", "ReceivePrefix does not hold"),
    "neg_multicast_recv.gsess": ("constraint", "Sends does not hold"),
    "neg_discard_channel.gsess": ("weak", "linearity violation"),
    "neg_exactly_dropped.gsess": ("weak", "linearity violation"),
    "neg_problematic.gsess": ("promotion-guard", "'forkLinear' may not appear under a promotion"),
}


@pytest.mark.parametrize("name", sorted(NEGATIVE))
def test_negative_corpus(name):
    rule, text = NEGATIVE[name]
    with pytest.raises(TypeCheckFailure) as info:
        check_program(load(name))
    errs = info.value.errors
    assert len(errs) == 1
    assert errs[0].rule == rule
    assert text in errs[0].message
    assert errs[0].pos is not None


def test_every_negative_file_is_listed():
    assert {p.name for p in corpus_files("neg")} == set(NEGATIVE)


def test_problematic_accepted_without_guard():
    check_program(load("neg_problematic.gsess"), unsafe_promotion=True)


class TestLinearity:
    def test_contraction(self):
        errs = errors("f : Int -> (Int, Int)\nf x = (x, x)\n")
        assert [e.rule for e in errs] == ["contraction"]
        assert "'x' is used more than once" in errs[0].message

    def test_unused(self):
        assert rules("f : Int -> ()\nf x = ()\n") == ["weak"]

    def test_wildcard_on_linear_value(self):
        assert rules("f : Int -> ()\nf _ = ()\n") == ["weak"]

    def test_wildcard_under_box_is_weakening(self):
        assert rules("f : Int [0] -> ()\nf [_] = ()\n") == []

    def test_promotion_cannot_capture_linear_variables(self):
        assert rules("f : Int -> Int [1]\nf x = [x]\n") == ["pr"]

    def test_dereliction_uses_grade_one(self):
        assert rules("f : Int [1] -> Int\nf [x] = x\n") == []

    def test_clauses_must_consume_the_same_linear_variables(self):
        src = ("data B = T | F\n"
               "f : B -> Int -> Int\n"
               "f T x = x;\n"
               "f F x = 0\n")
        assert rules(src) == ["weak"]

    def test_offer_branches_join(self):
        src = ("s : LChan (Offer (Recv Int End) End) -> Int [0..1] -> Int\n"
               "s c [d] = offer (\\c -> let (x, c) = recv c; () = close c in x)\n"
               "                (\\c -> let () = close c in d) c\n")
        assert rules(src) == []


class TestGrades:
    def test_nat_usage_is_exact(self):
        assert rules("f : Int [3] -> (Int, Int)\nf [x] = (x, x)\n") == ["grade-mismatch"]

    def test_interval_usage_is_contained(self):
        assert rules("f : Int [1..3] -> (Int, Int)\nf [x] = (x, x)\n") == []
        assert rules("f : Int [0..Inf] -> (Int, Int)\nf [x] = (x, x)\n") == []

    def test_unequal_nat_clauses_do_not_join(self):
        src = ("data B = T | F\n"
               "f : Int [1] -> B -> Int\n"
               "f [x] T = x;\n"
               "f [x] F = 0\n")
        assert rules(src) == ["grade-mismatch"]

    def test_grade_polymorphism_is_not_mixed_with_unboxed_types(self):
        assert rules("f : Int [2] -> Int\nf x = x\n") != []


class TestIndices:
    APPEND = (
        "append : forall {a : Type, n m : Nat} . Vec n a -> Vec m a -> Vec (n + m) a\n"
        "append Nil ys = ys;\n"
        "append (Cons x xs) ys = Cons x (append xs ys)\n"
    )

    def test_append(self):
        assert rules(self.APPEND) == []

    def test_wrong_result_length(self):
        bad = self.APPEND.replace("Vec (n + m) a", "Vec (n + m + 1) a")
        assert "nat-constraint" in rules(bad)

    def test_vector_literal_length(self):
        assert rules("v : Vec 2 Int\nv = Cons 1 (Cons 2 Nil)\n") == []
        assert rules("v : Vec 3 Int\nv = Cons 1 (Cons 2 Nil)\n") == ["nat-constraint"]


class TestSessions:
    def test_duality_mismatch(self):
        src = ("srv : LChan (Recv () End) -> ()\n"
               "srv c = let ((), c) = recv c; () = close c in ()\n"
               "bad : LChan (Recv () End)\n"
               "bad = forkLinear srv\n")
        errs = errors(src)
        assert [e.rule for e in errs] == ["duality"]
        assert errs[0].definition == "bad"

    def test_send_wrong_payload(self):
        src = "f : LChan (Send Int End) -> ()\nf c = close (send c True)\n"
        assert rules(src) == ["type-mismatch"]

    def test_close_before_end(self):
        src = "f : LChan (Send Int End) -> ()\nf c = close c\n"
        assert rules(src) == ["duality"]


# -- terms --------------------------------------------------------------------


def test_check_unit():
    r = check_term({}, parse_term("()"), parse_type("()"))
    assert r.graded == {} and r.linear == frozenset()


def test_frommaybe_plus_usage():
    prog = load("ex2_frommaybe.gsess")
    maybe = parse_type("Maybe Int")
    ctx = {"d": Graded(INT, IntervalGrade(0, 2)), "x": Linear(maybe), "y": Linear(maybe)}
    r = check_term(ctx, parse_term("fromMaybe [d] x + fromMaybe [d] y"), INT, program=prog)
    assert r.graded == {"d": IntervalGrade(0, 2)}
    assert r.linear == {"x", "y"}


def test_frommaybe_parameter_usages():
    u = parameter_usages(load("ex2_frommaybe.gsess"), "fromMaybe")
    assert u.per_clause == [{0: IntervalGrade(0, 0)}, {0: IntervalGrade(1, 1)}]
    assert u.joined == {0: IntervalGrade(0, 1)}


@pytest.mark.parametrize("r, inner", [(NatGrade(2), 1), (NatGrade(3), 2), (NatGrade(0), 1)])
def test_promotion_scales_usage(r, inner):
    body = " + ".join(["x"] * inner)
    total = r.value * inner
    ctx = {"x": Graded(INT, NatGrade(total))}
    report = check_term(ctx, parse_term(f"[{body}]"), TBox(INT, r))
    assert report.graded["x"] == NatGrade(total)


def test_promotion_overuse_is_reported():
    ctx = {"x": Graded(INT, NatGrade(3))}
    with pytest.raises(TypeCheckError) as e:
        check_term(ctx, parse_term("[x + x]"), TBox(INT, NatGrade(2)))
    assert e.value.rule == "grade-mismatch"


def test_synth_send():
    ty, r = synth_term({"c": Linear(parse_type("LChan (Send Int End)"))}, parse_term("send c 42"))
    assert ty == TChan(End())
    assert r.linear == {"c"}


def test_synth_literal():
    assert synth_term({}, parse_term("42"))[0] == INT


def test_synth_fork_connects_dual_end():
    ty, _ = synth_term({}, parse_term("forkLinear client"), program=load("ex3_server_client.gsess"))
    match ty:
        case TChan(Offer(Recv(TCon("Int"), End()), Dual(TMeta()))):
            pass
        case _:
            pytest.fail(f"unexpected type {printer.type_(ty)}")


def test_lambda_does_not_synthesise():
    with pytest.raises(TypeCheckError):
        synth_term({}, parse_term("\\x -> x"))


# -- helpers ------------------------------------------------------------------


class TestContexts:
    def test_add_graded(self):
        a = TypingContext(x=Graded(INT, NatGrade(1)))
        b = TypingContext(x=Graded(INT, NatGrade(2)), y=Linear(INT))
        assert a + b == {"x": Graded(INT, NatGrade(3)), "y": Linear(INT)}

    def test_add_linear_is_undefined(self):
        with pytest.raises(TypeCheckError):
            ctx_add({"x": Linear(INT)}, {"x": Linear(INT)})

    def test_scale(self):
        g = {"x": Graded(INT, IntervalGrade(0, 1))}
        assert ctx_scale(IntervalGrade(2, 2), g) == {"x": Graded(INT, IntervalGrade(0, 2))}
        with pytest.raises(TypeCheckError):
            ctx_scale(NatGrade(2), {"x": Linear(INT)})

    def test_approx(self):
        declared = {"x": Graded(INT, IntervalGrade(0, 1))}
        assert ctx_approx({"x": Graded(INT, IntervalGrade(1, 1))}, declared)
        assert not ctx_approx({"x": Graded(INT, IntervalGrade(0, 2))}, declared)


class TestNatConstraints:
    n, m = NatExpr.var("n"), NatExpr.var("m")

    def test_cancel_constants(self):
        assert solve_nat_constraints([(self.n + 1, NatExpr.const(5))]) == {"n": NatExpr.const(4)}

    def test_identity(self):
        assert solve_nat_constraints([(self.n + self.m, self.n + self.m)]) == {}

    def test_chain(self):
        got = solve_nat_constraints([(self.n + self.m, NatExpr.const(5)), (self.n, NatExpr.const(2))])
        assert got == {"n": NatExpr.const(2), "m": NatExpr.const(3)}

    def test_sum_equal_to_zero(self):
        got = solve_nat_constraints([(self.n + self.m, NatExpr.const(0))])
        assert got == {"n": NatExpr.const(0), "m": NatExpr.const(0)}

    def test_underdetermined_stays_symbolic(self):
        assert solve_nat_constraints([(self.n + self.m, NatExpr.const(5))]) == {}

    @pytest.mark.parametrize("a, b", [(3, 4), ("n+3", 2)])
    def test_unsatisfiable(self, a, b):
        lhs = self.n + 3 if a == "n+3" else NatExpr.const(a)
        with pytest.raises(TypeCheckError) as e:
            solve_nat_constraints([(lhs, NatExpr.const(b))])
        assert e.value.rule == "nat-constraint"
        assert "?" not in e.value.message


class TestPromotionGuard:
    def test_fork_under_promotion(self):
        assert not promotion_guard(parse_term("forkLinear (\\c -> close (send c 42))"))

    def test_literal(self):
        assert promotion_guard(parse_term("42"))

    def test_graded_channel_variable(self):
        assert promotion_guard(parse_term("c"))

    @pytest.mark.parametrize("prim", ["forkNonLinear", "forkReplicate", "forkReplicateExactly",
                                      "forkMulticast", "par"])
    def test_every_channel_creator(self, prim):
        assert not promotion_guard(parse_term(f"let x = {prim} in x"))


class TestConstraints:
    def test_dispatch(self):
        assert check_constraint("SingleAction", parse_type("Send Int End"))
        assert not check_constraint("Sends", parse_type("Recv Int End"))
        assert check_constraint("ReceivePrefix", parse_type("Offer (Recv Int End) (Recv Int End)"))

    def test_unresolved_protocol_is_ambiguous(self):
        with pytest.raises(TypeCheckError) as e:
            check_constraint("Sends", TMeta(7))
        assert e.value.rule == "ambiguous"


# -- invariants over the corpus -----------------------------------------------


def _errors_in(prog, name):
    try:
        check_program(prog)
    except TypeCheckFailure as f:
        return [e for e in f.errors if e.definition == name]
    return []


def _mentions(term, name) -> bool:
    return f" {name} " in f" {printer.term(term)} ".replace("(", " ").replace(")", " ")


def _replace(prog, d, scheme_body, patterns):
    """Swap ``d`` for a copy with a new scheme body and per-clause parameter patterns."""
    clauses = tuple(replace(c, patterns=patterns(c.patterns)) for c in d.clauses)
    new = replace(d, scheme=replace(d.scheme, body=scheme_body), clauses=clauses)
    return replace(prog, items=tuple(new if i is d else i for i in prog.items))


def _definitions_with_parameters():
    for path in corpus_files("ex"):
        prog = load(path.name)
        for d in prog.defs:
            if d.arity and isinstance(d.scheme.body, TFun) and not any(_mentions(c.body, d.name) for c in d.clauses):
                yield pytest.param(path.name, d.name, id=f"{path.stem}:{d.name}")


@pytest.mark.parametrize("file, name", list(_definitions_with_parameters()))
def test_weakening_with_unused_assumption(file, name):
    prog = load(file)
    d = prog.lookup(name)
    add_unused = lambda ps: (PBox(PWild()),) + ps  # noqa: E731
    for g in (IntervalGrade(0, 0), IntervalGrade(0, 3), IntervalGrade(0, INF), NatGrade(0)):
        widened = _replace(prog, d, TFun(TBox(INT, g), d.scheme.body), add_unused)
        assert _errors_in(widened, name) == [], g
    # An unused Nat-graded assumption with a nonzero grade is rejected.
    widened = _replace(prog, d, TFun(TBox(INT, NatGrade(2)), d.scheme.body), add_unused)
    assert [e.rule for e in _errors_in(widened, name)] == ["grade-mismatch"]


@pytest.mark.parametrize("file, name", list(_definitions_with_parameters()))
def test_dereliction_preserves_acceptance(file, name):
    prog = load(file)
    d = prog.lookup(name)
    first = d.scheme.body.arg
    if isinstance(first, TBox) or not all(isinstance(c.patterns[0], PVar) for c in d.clauses):
        pytest.skip("first parameter is already graded or matched structurally")
    boxed = _replace(prog, d, TFun(TBox(first, NatGrade(1)), d.scheme.body.res),
                     lambda ps: (PBox(ps[0]),) + ps[1:])
    assert _errors_in(boxed, name) == []


def test_checking_is_deterministic():
    for path in corpus_files():
        prog = load(path.name)
        outcomes = []
        for _ in range(2):
            try:
                typed = check_program(prog)
                outcomes.append(("ok", sorted(map(str, typed.grades.values()))))
            except TypeCheckFailure as f:
                outcomes.append(("err", [str(e) for e in f.errors]))
        assert outcomes[0] == outcomes[1]
