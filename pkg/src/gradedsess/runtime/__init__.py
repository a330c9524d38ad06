"""Channel runtime: values, channel state and the cooperative scheduler."""
from .scheduler import (
    DEFAULT_FUEL, Block, ChannelState, DeadlockError, FuelExhausted, Process,
    RuntimeFault, Scheduler, Tag,
)
from .values import (
    SIDE_A, SIDE_B, UNIT, BoxValue, Closure, ConFun, ConValue, Endpoint,
    FunValue, MulticastEndpoint, PairValue, PrimValue, SharedEndpoint, Thunk,
    format_value, int_to_nat, list_to_vec, nat_to_int, vec_to_list,
)
