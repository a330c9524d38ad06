"""Signatures of the channel primitives and the built-in indexed constructors."""
from __future__ import annotations

PRIMITIVE_SIGNATURES = {
    "send": "forall {a : Type, p : Protocol} . LChan (Send a p) -> a -> LChan p",
    "recv": "forall {a : Type, p : Protocol} . LChan (Recv a p) -> (a, LChan p)",
    "forkLinear": "forall {p : Protocol} . (LChan p -> ()) -> LChan (Dual p)",
    "close": "LChan End -> ()",
    "selectLeft": "forall {p1 p2 : Protocol} . LChan (Select p1 p2) -> LChan p1",
    "selectRight": "forall {p1 p2 : Protocol} . LChan (Select p1 p2) -> LChan p2",
    "offer": "forall {p1 p2 : Protocol, a : Type} . (LChan p1 -> a) -> (LChan p2 -> a) -> LChan (Offer p1 p2) -> a",
    "forkNonLinear": (
        "forall {p : Protocol, s : Semiring, r : s} . {SingleAction p}"
        " => ((LChan p) [r] -> ()) -> (LChan (Dual p)) [r]"
    ),
    "forkReplicate": (
        "forall {p : Protocol, n : Nat} . {ReceivePrefix p}"
        " => (LChan p -> ()) [0..n] -> N n -> Vec n ((LChan (Dual p)) [0..1])"
    ),
    "forkReplicateExactly": (
        "forall {p : Protocol, n : Nat} . {ReceivePrefix p}"
        " => (LChan p -> ()) [n] -> N n -> Vec n (LChan (Dual p))"
    ),
    "forkMulticast": (
        "forall {p : Protocol, n : Nat} . {Sends p}"
        " => (Chan (Graded n p) -> ()) -> N n -> Vec n (Chan (Dual p))"
    ),
    # Thunks are plain linear functions so that lambdas can be passed directly.
    "par": "forall {a b : Type} . (() -> a) -> (() -> b) -> (a, b)",
}

CONSTRUCTOR_SIGNATURES = {
    "Nil": "forall {a : Type} . Vec 0 a",
    "Cons": "forall {a : Type, n : Nat} . a -> Vec n a -> Vec (n + 1) a",
    "Z": "N 0",
    "S": "forall {n : Nat} . N n -> N (n + 1)",
}

BUILTIN_TYPES = {"Int": 0, "Bool": 0}
INDEXED_TYPES = {"Vec": ("Nil", "Cons"), "N": ("Z", "S")}
