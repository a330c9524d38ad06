from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CORPUS, PINNED, corpus_files, load
from gradedsess.interpreter import CBN, CBV, run_program
from gradedsess.runtime import DeadlockError, FuelExhausted
from gradedsess.runtime.values import PairValue, vec_to_list
from gradedsess.syntax import parse_program
from gradedsess.typechecker import check_program
from programs import multicast, replicated, reusable_at_grade, reusable_by_length

POSITIVE = [p.name for p in corpus_files("ex")]


def run(prog, mode=CBV, unsafe=False, **kw):
    typed = check_program(prog, unsafe_promotion=unsafe or mode == CBN)
    return run_program(prog, mode=mode, grades=typed.grades, strict=not (unsafe or mode == CBN), **kw)


def run_text(text, **kw):
    return run(parse_program(text), **kw)


class TestPure:
    def test_arithmetic_and_equality(self):
        assert run_text("main : (Int, Bool)\nmain = (1 + 2, 3 == 4)\n").value == PairValue(3, False)

    def test_clause_selection(self):
        src = ("data B = T | F\n"
               "f : B -> Int\n"
               "f T = 1;\n"
               "f F = 2\n"
               "main : (Int, Int)\n"
               "main = (f F, f T)\n")
        assert run_text(src).output == "(2, 1)"

    def test_integer_patterns(self):
        src = ("f : Int -> Bool\n"
               "f 0 = True;\n"
               "f n = n == 1\n"
               "main : (Bool, Bool)\n"
               "main = (f 0, f 5)\n")
        assert run_text(src).output == "(True, False)"

    def test_higher_order(self):
        src = ("twice : (Int -> Int) [2] -> Int -> Int\n"
               "twice [f] x = f (f x)\n"
               "main : Int\n"
               "main = twice [\\x -> x + 10] 1\n")
        assert run_text(src).output == "21"

    @pytest.mark.parametrize("mode", [CBV, CBN])
    def test_append(self, mode):
        r = run(load("ex2_append.gsess"), mode=mode)
        assert vec_to_list(r.value) == [1, 2, 3]


class TestConcurrency:
    def test_server_client(self):
        r = run(load("ex3_server_client.gsess"), trace=True)
        assert r.output == "42"
        assert any("select(c1, L)" in e for e in r.trace)

    def test_problematic_deadlocks_under_cbv(self):
        with pytest.raises(DeadlockError) as e:
            run(load("neg_problematic.gsess"), unsafe=True)
        assert "thread blocked indefinitely" in str(e.value)

    def test_problematic_under_cbn_forks_twice(self):
        r = run(load("neg_problematic.gsess"), mode=CBN, trace=True)
        assert r.output == "84"
        assert sum("spawn(" in e and "forkLinear" in e for e in r.trace) == 2

    def test_replicate_is_lazy(self):
        r = run(load("ex52_dropped_client.gsess"), trace=True)
        assert r.output == "7"
        assert sum("replica" in e for e in r.trace) == 1

    def test_replicate_exactly(self):
        assert run(load("ex52_exactly.gsess")).output == "221"

    def test_multicast_select_reaches_every_receiver(self):
        r = run(load("ex53_multicast_select.gsess"), trace=True)
        assert r.output == "(5, 5)"
        assert sum("offer(c1, L)" in e for e in r.trace) == 2

    def test_par(self):
        assert run(load("ex_par.gsess")).output == "(42, True)"

    def test_fuel_cap(self):
        with pytest.raises(FuelExhausted):
            run(load("ex51_reusable.gsess"), fuel=20)


@pytest.mark.parametrize("name", POSITIVE)
def test_modes_agree_on_corpus(name):
    prog = load(name)
    assert run(prog, CBV).output == run(prog, CBN).output


def _outcome(prog, mode) -> bytes:
    try:
        r = run(prog, mode, unsafe=True, trace=True)
        return ("\n".join(r.trace) + "\n" + r.output).encode()
    except DeadlockError as e:
        return str(e).encode()


@pytest.mark.parametrize("mode", [CBV, CBN])
@pytest.mark.parametrize("name", POSITIVE + ["neg_problematic.gsess"])
def test_corpus_traces_are_deterministic(name, mode):
    prog = load(name)
    assert _outcome(prog, mode) == _outcome(prog, mode)


values = st.integers(0, 10**6)
generated = st.one_of(
    st.lists(values, max_size=8).map(reusable_by_length),
    st.lists(values, max_size=8).map(reusable_at_grade),
    st.builds(multicast, st.integers(0, 8), values),
    st.builds(replicated, values, values, values),
)


@PINNED
@given(st.one_of(st.sampled_from(POSITIVE).map(lambda n: (CORPUS / n).read_text()), generated),
       st.sampled_from([CBV, CBN]))
def test_traces_are_deterministic(text, mode):
    prog = parse_program(text)
    assert _outcome(prog, mode) == _outcome(prog, mode)
