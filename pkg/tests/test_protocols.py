from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from conftest import PINNED
from gradedsess.grades import NatGrade
from gradedsess.protocols import (
    dual, graded_transform, is_closed, is_receive_prefix, is_single_action,
    normalize, sends_only,
)
from gradedsess.syntax import parse_type
from gradedsess.syntax.ast import (
    BOOL, INT, Dual, End, GradedP, Offer, Recv, Select, Send, TBox, TUnit, TVar,
)


def P(text):
    return parse_type(text)


class TestDual:
    def test_swaps_directions(self):
        assert dual(P("Send Int (Recv Bool End)")) == P("Recv Int (Send Bool End)")
        assert dual(P("Select (Send Int End) End")) == P("Offer (Recv Int End) End")

    def test_variable_stays_symbolic(self):
        assert dual(TVar("p")) == Dual(TVar("p"))
        assert dual(Dual(TVar("p"))) == TVar("p")

    def test_server_client_protocol(self):
        client = P("Select (Send Int End) End")
        assert dual(client) == P("Offer (Recv Int End) End")


class TestGraded:
    def test_boxes_every_payload(self):
        got = graded_transform(3, P("Send Int (Recv Bool End)"))
        assert got == Send(TBox(INT, NatGrade(3)), Recv(TBox(BOOL, NatGrade(3)), End()))

    def test_variable_stays_symbolic(self):
        assert graded_transform(2, TVar("p")) == GradedP(NatGrade(2).value, TVar("p"))

    def test_normalize_pushes_through_known_protocols(self):
        assert normalize(Dual(P("Send Int End"))) == P("Recv Int End")
        assert normalize(GradedP(NatGrade(2).value, P("Send Int End"))) == graded_transform(2, P("Send Int End"))


class TestPredicates:
    def test_single_action(self):
        assert is_single_action(P("Send Int End"))
        assert is_single_action(P("Recv Int End"))
        assert is_single_action(End())
        assert not is_single_action(P("Send Int (Send Bool End)"))

    def test_receive_prefix(self):
        assert is_receive_prefix(P("Offer (Recv Int End) (Recv Int End)"))
        assert is_receive_prefix(P("Recv Int (Send Int End)"))
        assert not is_receive_prefix(P("Send Int End"))
        assert not is_receive_prefix(End())

    def test_sends(self):
        assert sends_only(P("Send Int End"))
        assert sends_only(P("Select (Send Int End) End"))
        assert not sends_only(P("Recv Int End"))
        assert not sends_only(P("Send Int (Recv Int End)"))

    def test_assumed_variables(self):
        p = TVar("p")
        assert not sends_only(p)
        assert sends_only(p, frozenset({p}))

    def test_closed(self):
        assert is_closed(P("Send Int End"))
        assert not is_closed(P("Send Int p"))


# -- property suites ----------------------------------------------------------

payloads = st.sampled_from([INT, BOOL, TUnit(), TBox(INT, NatGrade(2))])
leaves = st.one_of(st.just(End()), st.sampled_from([TVar("p"), TVar("q")]))


def protocols(leaf=leaves):
    return st.recursive(
        leaf,
        lambda k: st.one_of(
            st.builds(Send, payloads, k),
            st.builds(Recv, payloads, k),
            st.builds(Select, k, k),
            st.builds(Offer, k, k),
        ),
        max_leaves=12,
    )


@PINNED
@given(protocols())
def test_dual_is_an_involution(p):
    assert dual(dual(p)) == p


@PINNED
@given(protocols(), st.integers(0, 8))
def test_dual_commutes_with_graded(p, n):
    assert dual(graded_transform(n, p)) == graded_transform(n, dual(p))


@PINNED
@given(protocols(st.just(End())))
def test_dual_exchanges_sends_and_receives(p):
    # A closed protocol whose dual only sends can contain no Send at all.
    if sends_only(dual(p)):
        assert not any(isinstance(n, Send) for n in _nodes(p))


def _nodes(p):
    yield p
    match p:
        case Send(_, k) | Recv(_, k):
            yield from _nodes(k)
        case Select(a, b) | Offer(a, b):
            yield from _nodes(a)
            yield from _nodes(b)
