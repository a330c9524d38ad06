"""Evaluation of programs under call-by-value (default) or call-by-name.

Evaluation functions are generators run inside scheduler processes; they
``yield`` once per reduction step and delegate blocking to the runtime.

Under call-by-name, ``let`` right-hand sides, arguments and promotion bodies
become :class:`Thunk` values that are re-evaluated every time they are
forced.  Constructors, pairs and primitives stay strict.
"""
from __future__ import annotations

from dataclasses import dataclass

from .grades import INF, IntervalGrade, NatExpr, NatGrade
from .runtime.scheduler import DEFAULT_FUEL, RuntimeFault, Scheduler, Tag
from .runtime.values import (
    SIDE_A, SIDE_B, UNIT, BoxValue, Closure, ConFun, ConValue, Endpoint,
    FunValue, MulticastEndpoint, PairValue, PrimValue, SharedEndpoint, Thunk,
    format_value, list_to_vec, nat_to_int,
)
from .syntax.ast import (
    Ann, App, BinOp, BoolLit, Con, IntLit, Lam, Let, Pair, PBox, PCon, PInt,
    PPair, Prim, Promote, PUnit, PVar, PWild, SourceProgram, Unit, Var, spine,
)

CBV, CBN = "cbv", "cbn"

PRIM_ARITY = {
    "send": 2, "recv": 1, "close": 1, "forkLinear": 1, "selectLeft": 1,
    "selectRight": 1, "offer": 3, "forkNonLinear": 1, "forkReplicate": 2,
    "forkReplicateExactly": 2, "forkMulticast": 2, "par": 2,
}


class EvalError(RuntimeFault):
    """Pattern-match failure or primitive misuse; impossible for checked code."""


def refcount_for(grade):
    """Number of uses a shared endpoint permits, from its static grade."""
    match grade:
        case NatGrade(v) if v.is_const():
            return v.value
        case IntervalGrade(_, hi) if hi is INF:
            return INF
        case IntervalGrade(_, hi) if isinstance(hi, NatExpr) and hi.is_const():
            return hi.value
    return INF


@dataclass
class RunResult:
    value: object
    output: str
    trace: list[str]
    steps: int


class Interpreter:
    def __init__(self, program: SourceProgram, mode: str = CBV,
                 scheduler: Scheduler | None = None, grades: dict | None = None):
        if mode not in (CBV, CBN):
            raise ValueError(f"unknown evaluation mode {mode!r}")
        self.program = program
        self.mode = mode
        self.rt = scheduler or Scheduler()
        self.grades = grades or {}
        self.defs = {d.name: d for d in program.defs}
        self.ctor_arity = {"Nil": 0, "Cons": 2, "Z": 0, "S": 1}
        for decl in program.data_decls:
            for c in decl.constructors:
                self.ctor_arity[c.name] = len(c.fields)
        # Argument positions that must be forced once before clause selection.
        self.strict_positions = {
            d.name: [i for i in range(d.arity)
                     if any(not isinstance(c.patterns[i], (PVar, PWild)) for c in d.clauses)]
            for d in program.defs
        }

    # -- entry ----------------------------------------------------------------

    def run(self, entry: str = "main"):
        if entry not in self.defs:
            raise KeyError(entry)

        def main():
            v = yield from self.eval(Var(entry), {})
            return (yield from self.deep_force(v))

        return self.rt.run(main())

    def process(self, f, arg):
        v = yield from self.apply(f, arg)
        return (yield from self.deep_force(v))

    # -- suspension -----------------------------------------------------------

    def delay(self, t, env):
        match t:
            case Var(x) if x in env:
                return env[x]
            case IntLit(v) | BoolLit(v):
                return v
            case Unit():
                return UNIT
        return Thunk(t, env)

    def argument(self, t, env):
        if self.mode == CBN:
            return self.delay(t, env)
        return (yield from self.eval(t, env))

    def force(self, v):
        while isinstance(v, Thunk):
            v = yield from self.eval(v.term, v.env)
        return v

    def deep_force(self, v):
        v = yield from self.force(v)
        match v:
            case PairValue(a, b):
                a = yield from self.deep_force(a)
                b = yield from self.deep_force(b)
                return PairValue(a, b)
            case ConValue(name, args) if args:
                out = []
                for a in args:
                    out.append((yield from self.deep_force(a)))
                return ConValue(name, tuple(out))
            case BoxValue(inner):
                return BoxValue((yield from self.deep_force(inner)))
        return v

    # -- evaluation -----------------------------------------------------------

    def eval(self, t, env):
        match t:
            case Var(x):
                if x in env:
                    return (yield from self.force(env[x]))
                d = self.defs.get(x)
                if d is None:
                    raise EvalError(f"unbound variable {x!r}")
                if d.arity == 0:
                    yield
                    return (yield from self.call(d, ()))
                return FunValue(d)
            case Prim(name):
                return PrimValue(name, PRIM_ARITY[name], (), t)
            case Con(name):
                arity = self.ctor_arity.get(name)
                if arity is None:
                    raise EvalError(f"unknown constructor {name!r}")
                return ConValue(name) if arity == 0 else ConFun(name, arity)
            case IntLit(v) | BoolLit(v):
                return v
            case Unit():
                return UNIT
            case Lam():
                return Closure(t.param, t.body, env)
            case Pair(a, b):
                x = yield from self.eval(a, env)
                y = yield from self.eval(b, env)
                return PairValue(x, y)
            case BinOp(op, a, b):
                x = yield from self.eval(a, env)
                y = yield from self.eval(b, env)
                yield
                return x + y if op == "+" else x == y
            case Promote(body):
                if self.mode == CBN:
                    return BoxValue(self.delay(body, env))
                return BoxValue((yield from self.eval(body, env)))
            case Ann(e, _):
                return (yield from self.eval(e, env))
            case Let(bindings, body):
                for b in bindings:
                    yield
                    v = yield from self.argument(b.expr, env)
                    m = yield from self.match(b.pattern, v)
                    if m is None:
                        raise EvalError("let pattern did not match")
                    env = {**env, **m}
                return (yield from self.eval(body, env))
            case App():
                head, args = spine(t)
                f = yield from self.eval(head, env)
                for a in args:
                    v = yield from self.argument(a, env)
                    yield
                    f = yield from self.apply(f, v)
                return f
        raise EvalError(f"cannot evaluate {t!r}")

    def apply(self, f, v):
        match f:
            case Closure(param, body, env):
                m = yield from self.match(param, v)
                if m is None:
                    raise EvalError("lambda pattern did not match")
                return (yield from self.eval(body, {**env, **m}))
            case FunValue(d, args):
                args = args + (v,)
                if len(args) < d.arity:
                    return FunValue(d, args)
                return (yield from self.call(d, args))
            case PrimValue(name, arity, args, node):
                args = args + (v,)
                if len(args) < arity:
                    return PrimValue(name, arity, args, node)
                return (yield from self.primitive(name, args, node))
            case ConFun(name, arity, args):
                args = args + (v,)
                if len(args) < arity:
                    return ConFun(name, arity, args)
                forced = []
                for a in args:
                    forced.append((yield from self.force(a)))
                return ConValue(name, tuple(forced))
        raise EvalError(f"cannot apply {format_value(f)}")

    def call(self, d, args):
        if self.mode == CBN:
            args = list(args)
            for i in self.strict_positions[d.name]:
                args[i] = yield from self.force(args[i])
        for clause in d.clauses:
            env: dict = {}
            for p, a in zip(clause.patterns, args):
                m = yield from self.match(p, a)
                if m is None:
                    break
                env.update(m)
            else:
                return (yield from self.eval(clause.body, env))
        raise EvalError(f"no equation of {d.name!r} matches its arguments")

    def match(self, p, v):
        """Generator returning the bindings of ``p`` against ``v``, or None."""
        match p:
            case PVar(x):
                return {x: v}
            case PWild():
                return {}
        v = yield from self.force(v)
        match p:
            case PUnit():
                return {}
            case PInt(k):
                return {} if type(v) is int and v == k else None
            case PPair(a, b):
                if not isinstance(v, PairValue):
                    return None
                m1 = yield from self.match(a, v.fst)
                m2 = yield from self.match(b, v.snd)
                return None if m1 is None or m2 is None else {**m1, **m2}
            case PBox(inner):
                if not isinstance(v, BoxValue):
                    return None
                return (yield from self.match(inner, v.value))
            case PCon("True" | "False" as name, ()):
                return {} if v is (name == "True") else None
            case PCon(name, args):
                if not (isinstance(v, ConValue) and v.name == name and len(v.args) == len(args)):
                    return None
                env: dict = {}
                for q, w in zip(args, v.args):
                    m = yield from self.match(q, w)
                    if m is None:
                        return None
                    env.update(m)
                return env
        raise EvalError(f"unsupported pattern {p!r}")

    # -- primitives -----------------------------------------------------------

    def _unbox(self, v):
        if not isinstance(v, BoxValue):
            raise EvalError(f"expected a boxed value, got {format_value(v)}")
        return (yield from self.force(v.value))

    def primitive(self, name, args, node):
        forced = []
        for a in args:
            forced.append((yield from self.force(a)))
        args = forced
        rt = self.rt
        yield
        match name:
            case "send":
                ep, v = args
                if isinstance(ep, MulticastEndpoint):
                    v = yield from self._unbox(v)
                    v = yield from self.deep_force(v)
                return rt.chan_send(ep, v)
            case "recv":
                ep, = args
                v = yield from rt.chan_recv(ep)
                if isinstance(v, Tag):
                    raise EvalError("received a choice where a value was expected")
                return PairValue(v, ep)
            case "close":
                rt.chan_close(args[0])
                return UNIT
            case "selectLeft":
                return rt.select_side(args[0], "L")
            case "selectRight":
                return rt.select_side(args[0], "R")
            case "offer":
                left, right, ep = args
                tag = yield from rt.chan_recv(ep)
                if not isinstance(tag, Tag):
                    raise EvalError("offer received a value instead of a choice")
                return (yield from self.apply(left if tag.side == "L" else right, ep))
            case "forkLinear":
                ch = rt.chan_create()
                rt.spawn(self.process(args[0], Endpoint(ch.id, SIDE_A)), "forkLinear")
                return Endpoint(ch.id, SIDE_B)
            case "forkNonLinear":
                ch = rt.chan_create(refcount=refcount_for(self.grades.get(id(node))))
                rt.spawn(self.process(args[0], BoxValue(SharedEndpoint(ch.id, SIDE_A))), "forkNonLinear")
                return BoxValue(SharedEndpoint(ch.id, SIDE_B))
            case "forkReplicate" | "forkReplicateExactly":
                fbox, n = args
                server = yield from self._unbox(fbox)
                clients = []
                for _ in range(nat_to_int(n)):
                    ch = rt.chan_create()
                    if name == "forkReplicate":
                        ch.lazy_server = lambda ch=ch: self.process(server, Endpoint(ch.id, SIDE_A))
                        clients.append(BoxValue(Endpoint(ch.id, SIDE_B)))
                    else:
                        rt.spawn(self.process(server, Endpoint(ch.id, SIDE_A)), "replica")
                        clients.append(Endpoint(ch.id, SIDE_B))
                return list_to_vec(clients)
            case "forkMulticast":
                f, n = args
                fanout = nat_to_int(n)
                ch = rt.chan_create(lanes=fanout)
                rt.spawn(self.process(f, MulticastEndpoint(ch.id, fanout)), "forkMulticast")
                return list_to_vec(Endpoint(ch.id, SIDE_B, i) for i in range(fanout))
            case "par":
                f, g = args
                ch = rt.chan_create()

                def left():
                    a = yield from self.process(f, UNIT)
                    rt.chan_send(Endpoint(ch.id, SIDE_A), a)
                    rt.chan_close(Endpoint(ch.id, SIDE_A))
                    return UNIT

                rt.spawn(left(), "par")
                b = yield from self.process(g, UNIT)
                a = yield from rt.chan_recv(Endpoint(ch.id, SIDE_B))
                rt.chan_close(Endpoint(ch.id, SIDE_B))
                return PairValue(a, b)
        raise EvalError(f"unknown primitive {name!r}")


def run_program(program: SourceProgram, entry: str = "main", mode: str = CBV,
                fuel: int = DEFAULT_FUEL, trace: bool = False, strict: bool = True,
                grades: dict | None = None) -> RunResult:
    """Execute ``entry``; raises DeadlockError or FuelExhausted from the scheduler."""
    sched = Scheduler(fuel=fuel, trace=trace, strict=strict)
    interp = Interpreter(program, mode, sched, grades)
    value = interp.run(entry)
    return RunResult(value, format_value(value), list(sched.events), sched.steps)
