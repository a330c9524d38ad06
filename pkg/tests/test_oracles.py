"""Programs generated from templates are compared against direct Python oracles."""
from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from conftest import PINNED
from gradedsess.interpreter import run_program
from gradedsess.runtime.values import vec_to_list
from gradedsess.syntax import parse_program
from gradedsess.typechecker import check_program
from programs import multicast, replicated, reusable_at_grade, reusable_by_length

values = st.integers(0, 10**6)


def execute(text: str):
    prog = parse_program(text)
    typed = check_program(prog)
    return run_program(prog, grades=typed.grades, trace=True)


@PINNED
@given(st.lists(values, max_size=8))
def test_reusable_channel_round_trip_is_identity(xs):
    assert vec_to_list(execute(reusable_by_length(xs)).value) == list(xs)


@PINNED
@given(st.lists(values, max_size=8))
def test_reusable_channel_round_trip_at_ground_grade(xs):
    assert vec_to_list(execute(reusable_at_grade(xs)).value) == list(xs)


@PINNED
@given(st.integers(0, 8), values)
def test_multicast_delivers_n_identical_copies(n, v):
    r = execute(multicast(n, v))
    got = vec_to_list(r.value)
    assert len(got) == n
    assert got == [v] * n
    assert sum(e.endswith(f"recv(c1, {v})") for e in r.trace) == n


def add_server_oracle(a: int, b: int, k: int) -> tuple[int, bool]:
    """The replicated server's two branches as plain functions."""
    return a + b, k == 0


def test_replicated_server_corpus_values_match_oracle():
    v = execute(replicated(10, 20, 42)).value
    assert (v.fst, v.snd) == add_server_oracle(10, 20, 42) == (30, False)


@PINNED
@given(values, values, st.one_of(st.just(0), values))
def test_replicated_server_matches_oracle(a, b, k):
    v = execute(replicated(a, b, k)).value
    assert (v.fst, v.snd) == add_server_oracle(a, b, k)
