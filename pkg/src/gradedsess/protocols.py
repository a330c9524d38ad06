"""Protocol algebra: duality, the ``Graded`` payload transform and the three
protocol predicates used as constraints by the non-linear fork primitives.

Protocols are the session-type nodes of :mod:`gradedsess.syntax.ast`.  On
protocol variables (rigid or unification variables) the transforms stay
symbolic as ``Dual x`` / ``Graded n x`` and are pushed inward by
:func:`normalize` once the variable is known.
"""
from __future__ import annotations

from .grades import NatExpr, NatGrade
from .syntax.ast import Dual, End, GradedP, Offer, Recv, Select, Send, TBox, TMeta, TVar

PROTOCOL_NODES = (Send, Recv, Select, Offer, End, Dual, GradedP)


def is_protocol(t) -> bool:
    return isinstance(t, PROTOCOL_NODES)


def dual(p):
    match p:
        case Send(a, k):
            return Recv(a, dual(k))
        case Recv(a, k):
            return Send(a, dual(k))
        case Select(l, r):
            return Offer(dual(l), dual(r))
        case Offer(l, r):
            return Select(dual(l), dual(r))
        case End():
            return End()
        case Dual(q):
            return q
        case GradedP(n, q):
            return GradedP(n, dual(q))
        case TVar() | TMeta():
            return Dual(p)
    raise TypeError(f"dual of a non-protocol {p!r}")


def graded_transform(n: int | NatExpr, p):
    """Box every payload type in ``p`` with the Nat grade ``n``."""
    n = NatExpr.of(n)
    match p:
        case Send(a, k):
            return Send(TBox(a, NatGrade(n)), graded_transform(n, k))
        case Recv(a, k):
            return Recv(TBox(a, NatGrade(n)), graded_transform(n, k))
        case Select(l, r):
            return Select(graded_transform(n, l), graded_transform(n, r))
        case Offer(l, r):
            return Offer(graded_transform(n, l), graded_transform(n, r))
        case End():
            return End()
        case TVar() | TMeta() | Dual() | GradedP():
            return GradedP(n, p)
    raise TypeError(f"Graded applied to a non-protocol {p!r}")


def normalize(p):
    """Resolve ``Dual``/``Graded`` wherever their argument has become concrete."""
    match p:
        case Send(a, k):
            return Send(a, normalize(k))
        case Recv(a, k):
            return Recv(a, normalize(k))
        case Select(l, r):
            return Select(normalize(l), normalize(r))
        case Offer(l, r):
            return Offer(normalize(l), normalize(r))
        case Dual(q):
            return dual(normalize(q))
        case GradedP(n, q):
            return graded_transform(n, normalize(q))
    return p


def is_closed(p) -> bool:
    match p:
        case Send(_, k) | Recv(_, k):
            return is_closed(k)
        case Select(l, r) | Offer(l, r):
            return is_closed(l) and is_closed(r)
        case End():
            return True
    return False


def is_single_action(p, assumed: frozenset = frozenset()) -> bool:
    """True for ``End``, ``Send a End``, ``Recv a End``, ``Offer End End``, ``Select End End``."""
    if p in assumed:
        return True
    match p:
        case End() | Send(_, End()) | Recv(_, End()) | Offer(End(), End()) | Select(End(), End()):
            return True
        case Dual(q):
            return is_single_action(q, assumed)
    return False


def is_receive_prefix(p, assumed: frozenset = frozenset()) -> bool:
    if p in assumed:
        return True
    return isinstance(p, (Recv, Offer))


def sends_only(p, assumed: frozenset = frozenset()) -> bool:
    if p in assumed:
        return True
    match p:
        case End():
            return True
        case Send(_, k):
            return sends_only(k, assumed)
        case Select(l, r):
            return sends_only(l, assumed) and sends_only(r, assumed)
    return False


PREDICATES = {
    "SingleAction": is_single_action,
    "ReceivePrefix": is_receive_prefix,
    "Sends": sends_only,
}
