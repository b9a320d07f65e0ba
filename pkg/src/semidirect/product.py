"""Semidirect product of two op-based CRDTs, plain and compressed."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .core import (
    ZERO,
    CrdtError,
    Crdt,
    Dot,
    Op,
    UndefinedEffect,
    VectorClock,
    can_have_different_authors,
)


class UndefinedAction(CrdtError):
    """The action was undefined on a pair it is required to handle."""


class DivisionUndefined(CrdtError):
    """Left division of composed histories failed (non-causal input)."""


class LawViolation(CrdtError):
    pass


@dataclass(frozen=True)
class TaggedMessage:
    payload: Any
    timestamp: VectorClock
    author: str
    component: int

    @property
    def key(self) -> tuple:
        return (self.author, self.timestamp[self.author])


@dataclass(frozen=True)
class SemidirectState:
    inner: Any
    clock: VectorClock = ZERO
    # (author, author counter) -> TaggedMessage from the second component
    history: dict = field(default_factory=dict)


def linearize(entries):
    """Order history entries consistently with causality, deterministically.

    The total of a vector clock strictly increases along the causal order,
    so sorting by it first yields a topological order.
    """
    return sorted(entries, key=lambda e: (e.timestamp.total(), e.author, e.timestamp[e.author]))


def fold_action(act: Callable, message, entries):
    """Act on ``message`` by each entry in turn (first entry acts first)."""
    for entry in entries:
        acted = act(entry.payload, message)
        if acted is None:
            raise UndefinedAction(f"{entry.payload!r} |> {message!r} is undefined")
        message = acted
    return message


def compute_m_act(act: Callable, message, timestamp: VectorClock, history) -> Any:
    """Transform a first-component message by every concurrent history entry."""
    entries = history.values() if isinstance(history, dict) else history
    concurrent = [e for e in entries if e.timestamp.concurrent(timestamp)]
    return fold_action(act, message, linearize(concurrent))


class SemidirectProduct(Crdt):
    """``first`` and ``second`` share state space, initial state and eval.

    ``act(m2, m1)`` transforms a first-component message by a concurrent
    second-component message; it returns None where undefined.
    """

    def __init__(self, name: str, first: Crdt, second: Crdt, act: Callable,
                 monoid: Optional[CompressibleMonoid] = None):
        overlap = set(first.op_names) & set(second.op_names)
        if overlap:
            raise ValueError(f"components share operations {sorted(overlap)}")
        if set(first.message_types) & set(second.message_types):
            raise ValueError("components share message types")
        self.name = name
        self.first = first
        self.second = second
        self.act = act
        self.monoid = monoid
        self.op_names = tuple(first.op_names) + tuple(second.op_names)
        self.message_types = (TaggedMessage,)

    def component(self, index: int) -> Crdt:
        return self.first if index == 1 else self.second

    def component_of_op(self, op_name: str) -> int:
        if op_name in self.first.op_names:
            return 1
        if op_name in self.second.op_names:
            return 2
        raise self._unknown(Op(op_name))

    def component_of(self, payload) -> int:
        """Which component a raw payload belongs to (1 or 2)."""
        if self.first.owns(payload):
            return 1
        if self.second.owns(payload):
            return 2
        raise ValueError(f"{payload!r} belongs to neither component")

    def initial(self) -> SemidirectState:
        return SemidirectState(self.first.initial())

    def prepare(self, op: Op, state: SemidirectState, dot: Dot) -> TaggedMessage:
        replica = dot.replica
        stamp = state.clock.increment(replica)
        index = self.component_of_op(op.name)
        payload = self.component(index).prepare(op, state.inner, Dot(replica, stamp[replica]))
        return TaggedMessage(payload, stamp, replica, index)

    def effect(self, message: TaggedMessage, state: SemidirectState) -> Optional[SemidirectState]:
        clock = state.clock.merge(message.timestamp)
        if message.component == 2:
            if message.key in state.history:
                raise CrdtError(f"duplicate delivery of {message.key}")
            inner = self.second.effect(message.payload, state.inner)
            if inner is None:
                return None
            history = dict(state.history)
            history[message.key] = message
            return SemidirectState(inner, clock, history)
        acted = compute_m_act(self.act, message.payload, message.timestamp, state.history)
        inner = self.first.effect(acted, state.inner)
        if inner is None:
            return None
        return SemidirectState(inner, clock, state.history)

    def eval(self, state: SemidirectState):
        return self.first.eval(state.inner)

    def authors(self, message):
        return frozenset([message.author])

    def payload_authors(self, payload):
        return self.component(self.component_of(payload)).authors(payload)

    def gen_args(self, op_name, state, rng):
        index = self.component_of_op(op_name)
        return self.component(index).gen_args(op_name, state.inner, rng)

    def history_size(self, state) -> int:
        return len(state.history)

    def prune(self, state, frontier):
        return prune_stable(state, frontier)

    def apply_payload(self, payload, inner):
        """Effect of a raw component message on an inner state."""
        return self.component(self.component_of(payload)).effect(payload, inner)


def sp_prepare(product: SemidirectProduct, op: Op, state: SemidirectState, replica) -> TaggedMessage:
    return product.prepare(op, state, Dot(replica, state.clock[replica] + 1))


def sp_effect(product: SemidirectProduct, message: TaggedMessage, state: SemidirectState):
    result = product.effect(message, state)
    if result is None:
        raise UndefinedEffect(message, state)
    return result


def sp_eval(product: SemidirectProduct, state: SemidirectState):
    return product.eval(state)


def prune_stable(state: SemidirectState, frontier: VectorClock) -> SemidirectState:
    """Drop history entries that no future message can be concurrent with."""
    kept = {k: e for k, e in state.history.items() if not e.timestamp <= frontier}
    if len(kept) == len(state.history):
        return state
    return SemidirectState(state.inner, state.clock, kept)


# -- assumption checkers ---------------------------------------------------

def check_reordering(product: SemidirectProduct, state, m1, m2) -> bool:
    """m2 . (m1 . s) == (m2 |> m1) . (m2 . s), with both sides defined."""
    first, second = product.first, product.second
    s1 = first.effect(m1, state)
    s2 = second.effect(m2, state)
    if s1 is None or s2 is None:
        return False
    left = second.effect(m2, s1)
    acted = product.act(m2, m1)
    if acted is None or left is None:
        return False
    right = first.effect(acted, s2)
    return right is not None and left == right


def check_action_commutes(product: SemidirectProduct, m1, m2, m2b) -> bool:
    a = product.act(m2b, m1)
    b = product.act(m2, m1)
    if a is None or b is None:
        return False
    left = product.act(m2, a)
    right = product.act(m2b, b)
    return left is not None and left == right


def check_preserves_authors(product: SemidirectProduct, m1, author, m2) -> bool:
    acted = product.act(m2, m1)
    if acted is None:
        return True
    return author in product.first.authors(acted)


def admissible_reordering(product: SemidirectProduct, m1, m2) -> bool:
    return can_have_different_authors(product.first.authors(m1), product.second.authors(m2))


def admissible_action_commutes(product: SemidirectProduct, m1, m2, m2b) -> bool:
    return can_have_different_authors(
        product.first.authors(m1), product.second.authors(m2), product.second.authors(m2b))


# -- compressed product ----------------------------------------------------

@dataclass(frozen=True)
class CompressibleMonoid:
    """Commutative, left-cancellative composition on second-component messages.

    ``divide(h, h_prime)`` returns the message ``x`` with ``h_prime o x == h``,
    or None if there is none.
    """

    identity: Any
    compose: Callable[[Any, Any], Any]
    divide: Callable[[Any, Any], Any]
    admissible: Callable[[Any], bool] = lambda m: True


@dataclass(frozen=True)
class CompressedState:
    inner: Any
    composed: Any


@dataclass(frozen=True)
class CompressedMessage:
    payload: Any
    component: int
    author: str
    #: composition of second-component messages seen by the sender (first component only)
    attached: Any = None


class CompressedProduct(Crdt):
    """The product with its history replaced by one composed message."""

    def __init__(self, product: SemidirectProduct, monoid: Optional[CompressibleMonoid] = None):
        monoid = monoid or product.monoid
        if monoid is None:
            raise ValueError(f"{product.name} has no compressible monoid")
        self.product = product
        self.monoid = monoid
        self.name = f"{product.name}+comp"
        self.op_names = product.op_names
        self.message_types = (CompressedMessage,)

    def initial(self) -> CompressedState:
        return CompressedState(self.product.first.initial(), self.monoid.identity)

    def prepare(self, op, state: CompressedState, dot) -> CompressedMessage:
        index = self.product.component_of_op(op.name)
        payload = self.product.component(index).prepare(op, state.inner, dot)
        if index == 1:
            return CompressedMessage(payload, 1, dot.replica, state.composed)
        return CompressedMessage(payload, 2, dot.replica)

    def effect(self, message: CompressedMessage, state: CompressedState):
        if message.component == 2:
            inner = self.product.second.effect(message.payload, state.inner)
            if inner is None:
                return None
            return CompressedState(inner, self.monoid.compose(message.payload, state.composed))
        concurrent = self.monoid.divide(state.composed, message.attached)
        if concurrent is None:
            raise DivisionUndefined(f"{message.attached!r} does not divide {state.composed!r}")
        acted = self.product.act(concurrent, message.payload)
        if acted is None:
            raise UndefinedAction(f"{concurrent!r} |> {message.payload!r} is undefined")
        inner = self.product.first.effect(acted, state.inner)
        if inner is None:
            return None
        return CompressedState(inner, state.composed)

    def eval(self, state: CompressedState):
        return self.product.eval(SemidirectState(state.inner))

    def authors(self, message):
        return frozenset([message.author])

    def gen_args(self, op_name, state, rng):
        index = self.product.component_of_op(op_name)
        component = self.product.component(index)
        for _ in range(20):
            args = component.gen_args(op_name, state.inner, rng)
            if args is None or index == 1:
                return args
            message = component.prepare(Op(op_name, tuple(args)), state.inner, Dot("?", 1))
            if self.monoid.admissible(message):
                return args
        return None

    def history_size(self, state) -> int:
        return 1


def comp_prepare(product: CompressedProduct, op: Op, state: CompressedState, replica, counter=1):
    return product.prepare(op, state, Dot(replica, counter))


def comp_effect(product: CompressedProduct, message: CompressedMessage, state: CompressedState):
    result = product.effect(message, state)
    if result is None:
        raise UndefinedEffect(message, state)
    return result

