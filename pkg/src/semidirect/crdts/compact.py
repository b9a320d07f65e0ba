"""Variants whose state doubles as the product history.

For the flag, the add-wins set and observed-reset, the action only ever
inserts second-component tokens into the first-component message, and the
first-component effect intersects with them. A token already dropped from
the state cannot survive the intersection anyway, so remembering the
timestamps of the tokens still present is enough: a cut keeps exactly the
matching tokens that are concurrent to it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..core import ZERO, Crdt, CrdtError, Op, VectorClock, replay
from ..encoding import sort_canonically
from .flags import DISABLED, ENABLED
from .reset import ReplayUndefined
from .sets import UNIVERSE


@dataclass(frozen=True)
class Stamped:
    cut: bool
    payload: Any
    timestamp: VectorClock
    author: str


@dataclass(frozen=True)
class CompactState:
    entries: frozenset = frozenset()  # token Stamped messages still present
    clock: VectorClock = ZERO


class CompactLog(Crdt):
    token_ops: tuple = ()
    cut_ops: tuple = ()

    def __init__(self):
        self.op_names = tuple(self.token_ops) + tuple(self.cut_ops)
        self.message_types = (Stamped,)

    def initial(self) -> CompactState:
        return CompactState()

    def prepare(self, op: Op, state: CompactState, dot) -> Stamped:
        if op.name not in self.op_names:
            raise self._unknown(op)
        stamp = state.clock.increment(dot.replica)
        cut = op.name in self.cut_ops
        payload = self.cut_payload(op, state) if cut else self.token_payload(op, state, dot)
        return Stamped(cut, payload, stamp, dot.replica)

    def effect(self, message: Stamped, state: CompactState):
        clock = state.clock.merge(message.timestamp)
        if not message.cut:
            return CompactState(state.entries | {message}, clock)
        kept = frozenset(
            e for e in state.entries
            if not (self.matches(message.payload, e.payload) and e.timestamp <= message.timestamp))
        return CompactState(kept, clock)

    def authors(self, message: Stamped):
        return frozenset([message.author])

    def history_size(self, state) -> int:
        return len(state.entries)

    # hooks
    def token_payload(self, op, state, dot):
        return op.args

    def cut_payload(self, op, state):
        return op.args

    def matches(self, cut_payload, token_payload) -> bool:
        return True


class CompactFlag(CompactLog):
    name = "ew-flag-compact"
    token_ops = ("enable",)
    cut_ops = ("disable",)

    def eval(self, state):
        return ENABLED if state.entries else DISABLED


class CompactAwSet(CompactLog):
    name = "aw-set-compact"
    token_ops = ("add",)
    cut_ops = ("remove",)

    def token_payload(self, op, state, dot):
        return op.args[0]

    def cut_payload(self, op, state):
        return op.args[0]

    def matches(self, cut_payload, token_payload):
        return cut_payload == token_payload

    def eval(self, state):
        return frozenset(e.payload for e in state.entries)

    def gen_args(self, op_name, state, rng):
        return (rng.choice(UNIVERSE),)


class CompactObservedReset(CompactLog):
    cut_ops = ("reset",)

    def __init__(self, wrapped: Crdt):
        if not wrapped.commutative:
            raise CrdtError(f"{wrapped.name} is not a commutative data type")
        self.wrapped = wrapped
        self.name = f"obs-reset-compact:{wrapped.name}"
        self.token_ops = tuple(wrapped.op_names)
        super().__init__()

    def inner(self, state: CompactState):
        messages = [e.payload for e in sort_canonically(state.entries)]
        result = replay(self.wrapped, messages)
        if result is None:
            raise ReplayUndefined("replaying the surviving log is undefined")
        return result

    def token_payload(self, op, state, dot):
        return self.wrapped.prepare(op, self.inner(state), dot)

    def cut_payload(self, op, state):
        return None

    def eval(self, state):
        return self.wrapped.eval(self.inner(state))

    def gen_args(self, op_name, state, rng):
        if op_name == "reset":
            return ()
        return self.wrapped.gen_args(op_name, self.inner(state), rng)
