from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import PINNED
from gradedsess.grades import (
    INF, IntervalGrade, NatExpr, NatGrade, Semiring, SemiringMismatch, align,
    cancel, embed_nat, ext_mul, grade_add, grade_approx, grade_join, grade_mul,
    grade_one, grade_zero,
)


def iv(lo, hi):
    return IntervalGrade(lo, hi)


class TestNatExpr:
    def test_constants_fold(self):
        assert NatExpr.const(2) + 3 == NatExpr.const(5)
        assert (NatExpr.const(2) * 3).value == 6

    def test_variables_are_polynomials(self):
        n = NatExpr.var("n")
        e = (n + 1) * 2
        assert e.constant == 2
        assert e.variables() == {"n"}
        assert str(n + 1) == "n + 1"

    def test_cancel_common_parts(self):
        n, m = NatExpr.var("n"), NatExpr.var("m")
        a, b = cancel(n + m + 2, n + 5)
        assert a == m
        assert b == NatExpr.const(3)

    def test_subst(self):
        n = NatExpr.var("n")
        assert (n + n + 1).subst({"n": NatExpr.const(3)}) == NatExpr.const(7)


class TestNatSemiring:
    def test_examples(self):
        assert grade_add(NatGrade(1), NatGrade(1)) == NatGrade(2)
        assert grade_mul(NatGrade(2), NatGrade(3)) == NatGrade(6)
        assert grade_approx(NatGrade(2), NatGrade(2))
        assert not grade_approx(NatGrade(1), NatGrade(2))

    def test_join_is_partial(self):
        assert grade_join(NatGrade(2), NatGrade(2)) == NatGrade(2)
        assert grade_join(NatGrade(1), NatGrade(2)) is None


class TestIntervalSemiring:
    def test_examples(self):
        assert grade_add(iv(0, 1), iv(1, 1)) == iv(1, 2)
        assert grade_mul(iv(0, 1), iv(2, 3)) == iv(0, 3)
        assert grade_join(iv(0, 0), iv(1, 1)) == iv(0, 1)

    def test_zero_annihilates_infinity(self):
        assert ext_mul(NatExpr.const(0), INF) == NatExpr.const(0)
        assert grade_mul(iv(0, 0), iv(0, INF)) == iv(0, 0)

    def test_containment(self):
        assert grade_approx(iv(1, 1), iv(0, 1))
        assert grade_approx(iv(0, 0), iv(0, INF))
        assert not grade_approx(iv(2, 2), iv(0, 1))
        assert not grade_approx(iv(0, 1), iv(1, 1))

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            iv(3, 1)

    def test_str(self):
        assert str(iv(0, INF)) == "0..Inf"
        assert str(iv(2, 4)) == "2..4"


def test_semirings_do_not_mix():
    with pytest.raises(SemiringMismatch):
        grade_add(NatGrade(1), iv(1, 1))


def test_align_embeds_nat_into_interval():
    assert align(NatGrade(2), iv(0, 3)) == (iv(2, 2), iv(0, 3))
    assert embed_nat(4) == iv(4, 4)


def test_zero_and_one():
    assert grade_zero(Semiring.NAT) == NatGrade(0)
    assert grade_one(Semiring.INTERVAL) == iv(1, 1)


# -- property suites ----------------------------------------------------------

nats = st.builds(NatGrade, st.integers(0, 8))
bounds = st.one_of(st.integers(0, 8), st.just(INF))


@st.composite
def intervals(draw):
    lo = draw(st.integers(0, 8))
    hi = draw(bounds)
    if hi is not INF and hi < lo:
        lo, hi = hi, lo
    return IntervalGrade(lo, hi)


def semiring_laws(a, b, c, d, zero, one):
    assert grade_add(a, b) == grade_add(b, a)
    assert grade_add(grade_add(a, b), c) == grade_add(a, grade_add(b, c))
    assert grade_add(a, zero) == a
    assert grade_mul(grade_mul(a, b), c) == grade_mul(a, grade_mul(b, c))
    assert grade_mul(a, one) == a == grade_mul(one, a)
    assert grade_mul(a, zero) == zero == grade_mul(zero, a)
    assert grade_mul(a, grade_add(b, c)) == grade_add(grade_mul(a, b), grade_mul(a, c))
    assert grade_mul(grade_add(a, b), c) == grade_add(grade_mul(a, c), grade_mul(b, c))
    ab_cd = grade_mul(grade_add(a, b), grade_add(c, d))
    expanded = [grade_mul(a, c), grade_mul(a, d), grade_mul(b, c), grade_mul(b, d)]
    total = zero
    for g in expanded:
        total = grade_add(total, g)
    assert ab_cd == total


@PINNED
@given(nats, nats, nats, nats)
def test_nat_semiring_laws(a, b, c, d):
    semiring_laws(a, b, c, d, NatGrade(0), NatGrade(1))
    assert grade_mul(a, b) == grade_mul(b, a)


@PINNED
@given(intervals(), intervals(), intervals(), intervals())
def test_interval_semiring_laws(a, b, c, d):
    semiring_laws(a, b, c, d, iv(0, 0), iv(1, 1))
    assert grade_mul(a, b) == grade_mul(b, a)


def order_laws(a, b, c, d):
    assert grade_approx(a, a)
    if grade_approx(a, b) and grade_approx(b, a):
        assert a == b
    if grade_approx(a, b) and grade_approx(b, c):
        assert grade_approx(a, c)
    # Addition and multiplication are monotone.
    if grade_approx(a, b) and grade_approx(c, d):
        assert grade_approx(grade_add(a, c), grade_add(b, d))
        assert grade_approx(grade_mul(a, c), grade_mul(b, d))


@PINNED
@given(nats, nats, nats, nats)
def test_nat_approx_is_partial_order(a, b, c, d):
    order_laws(a, b, c, d)


@PINNED
@given(intervals(), intervals(), intervals(), intervals())
def test_interval_approx_is_partial_order(a, b, c, d):
    order_laws(a, b, c, d)
    j = grade_join(a, b)
    assert grade_approx(a, j) and grade_approx(b, j)
