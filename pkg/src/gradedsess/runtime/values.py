"""Runtime values.

Ints and bools are represented by Python ``int`` and ``bool``.
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class UnitValue:
    def __repr__(self) -> str:
        return "UNIT"


UNIT = UnitValue()

SIDE_A, SIDE_B = 0, 1
SIDE_NAMES = ("A", "B")


@dataclass(frozen=True)
class PairValue:
    fst: object
    snd: object


@dataclass(frozen=True)
class ConValue:
    name: str
    args: tuple = ()


@dataclass(frozen=True, eq=False)
class ConFun:
    """A constructor waiting for the rest of its arguments."""

    name: str
    arity: int
    args: tuple = ()


@dataclass(frozen=True, eq=False)
class Closure:
    param: object
    body: object
    env: dict = field(repr=False)


@dataclass(frozen=True, eq=False)
class FunValue:
    """A (partially applied) top-level definition."""

    definition: object = field(repr=False)
    args: tuple = ()


@dataclass(frozen=True, eq=False)
class PrimValue:
    name: str
    arity: int
    args: tuple = ()
    node: object = field(default=None, repr=False)


@dataclass(frozen=True)
class BoxValue:
    """A promoted value; grades are erased at run time."""

    value: object


@dataclass(frozen=True)
class Endpoint:
    chan: int
    side: int
    lane: int = 0


@dataclass(frozen=True)
class SharedEndpoint:
    """An endpoint of a single-action channel used by many parallel uses."""

    chan: int
    side: int


@dataclass(frozen=True)
class MulticastEndpoint:
    chan: int
    fanout: int


@dataclass(frozen=True, eq=False)
class Thunk:
    """A suspended term (call-by-name); re-evaluated on every use."""

    term: object
    env: dict = field(repr=False)


CHANNEL_VALUES = (Endpoint, SharedEndpoint, MulticastEndpoint)


def nat_to_int(v) -> int:
    n = 0
    while isinstance(v, ConValue) and v.name == "S":
        n += 1
        v = v.args[0]
    if not (isinstance(v, ConValue) and v.name == "Z"):
        raise ValueError(f"not a singleton natural: {v!r}")
    return n


def int_to_nat(n: int) -> ConValue:
    v = ConValue("Z")
    for _ in range(n):
        v = ConValue("S", (v,))
    return v


def list_to_vec(items) -> ConValue:
    v = ConValue("Nil")
    for x in reversed(list(items)):
        v = ConValue("Cons", (x, v))
    return v


def vec_to_list(v) -> list:
    out = []
    while isinstance(v, ConValue) and v.name == "Cons":
        out.append(v.args[0])
        v = v.args[1]
    if not (isinstance(v, ConValue) and v.name == "Nil"):
        raise ValueError(f"not a vector: {v!r}")
    return out


def format_value(v, atomic: bool = False) -> str:
    match v:
        case bool():
            return "True" if v else "False"
        case int():
            s = str(v)
            return f"({s})" if atomic and v < 0 else s
        case UnitValue():
            return "()"
        case PairValue(a, b):
            return f"({format_value(a)}, {format_value(b)})"
        case ConValue(name, ()):
            return name
        case ConValue(name, args):
            s = " ".join([name, *(format_value(a, True) for a in args)])
            return f"({s})" if atomic else s
        case BoxValue(inner):
            return f"[{format_value(inner)}]"
        case Endpoint(chan, side, lane):
            suffix = f".{lane}" if lane else ""
            return f"<c{chan}:{SIDE_NAMES[side]}{suffix}>"
        case SharedEndpoint(chan, side):
            return f"<c{chan}:{SIDE_NAMES[side]}*>"
        case MulticastEndpoint(chan, n):
            return f"<c{chan}:A^{n}>"
        case Thunk():
            return "<thunk>"
    return "<function>"
