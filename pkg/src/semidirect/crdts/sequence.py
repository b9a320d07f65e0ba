"""Continuous sequence CRDT with exact rational positions, plus reverse and
range-remove extensions built as semidirect products."""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from ..core import ANY, Crdt, Id, Op
from ..product import CompressibleMonoid, SemidirectProduct


@functools.total_ordering
@dataclass(frozen=True)
class SignedRid:
    replica: str
    negative: bool = False

    def __neg__(self) -> SignedRid:
        return SignedRid(self.replica, not self.negative)

    def __lt__(self, other: SignedRid) -> bool:
        if self.negative != other.negative:
            # cross-sign ties: negative ids come first
            return self.negative
        if self.negative:
            return self.replica > other.replica
        return self.replica < other.replica


@functools.total_ordering
@dataclass(frozen=True)
class SeqId:
    position: Fraction
    rid: SignedRid

    def __neg__(self) -> SeqId:
        return SeqId(-self.position, -self.rid)

    def __lt__(self, other: SeqId) -> bool:
        if self.position != other.position:
            return self.position < other.position
        return self.rid < other.rid


def midpoint(left: Fraction, right: Fraction) -> Fraction:
    return (Fraction(left) + Fraction(right)) / 2


@dataclass(frozen=True)
class SeqState:
    elements: frozenset = frozenset()  # of (element, SeqId)
    removed: frozenset = frozenset()  # SeqIds deleted by remove

    def ordered(self) -> list:
        return sorted(self.elements, key=lambda pair: (pair[1], pair[0]))

    def negated(self) -> SeqState:
        return SeqState(frozenset((e, -i) for e, i in self.elements),
                        frozenset(-i for i in self.removed))


def seq_eval(state: SeqState) -> tuple:
    return tuple(e for e, _ in state.ordered())


@dataclass(frozen=True)
class SeqAdd:
    element: Any
    id: SeqId


@dataclass(frozen=True)
class SeqRemove:
    id: SeqId


class Sequence(Crdt):
    """Elements tagged with (position, replica) identifiers.

    Removed identifiers are remembered so that an add arriving after the
    remove of the same identifier stays removed; that keeps add and remove
    commuting unconditionally.
    """

    name = "seq"
    op_names = ("insert", "remove")
    message_types = (SeqAdd, SeqRemove, Id)
    commutative = True

    def initial(self) -> SeqState:
        return SeqState()

    def prepare(self, op: Op, state: SeqState, dot):
        items = state.ordered()
        if op.name == "insert":
            index, element = op.args
            if not 0 <= index <= len(items):
                raise IndexError(f"insert index {index} out of range")
            return SeqAdd(element, self.fresh_id(state, items, index, dot.replica))
        if op.name == "remove":
            (index,) = op.args
            return SeqRemove(items[index][1])
        raise self._unknown(op)

    @staticmethod
    def fresh_id(state: SeqState, items: list, index: int, replica: str) -> SeqId:
        if items:
            left = items[index - 1][1].position if index > 0 else items[0][1].position - 1
            right = items[index][1].position if index < len(items) else items[-1][1].position + 1
        else:
            left, right = Fraction(0), Fraction(1)
        used = {i for _, i in state.elements} | state.removed
        position = midpoint(left, right)
        rid = SignedRid(replica)
        while SeqId(position, rid) in used and left != right:
            position = midpoint(left, position)
        return SeqId(position, rid)

    def effect(self, message, state: SeqState):
        if isinstance(message, SeqAdd):
            if message.id in state.removed:
                return state
            return SeqState(state.elements | {(message.element, message.id)}, state.removed)
        if isinstance(message, SeqRemove):
            kept = frozenset(p for p in state.elements if p[1] != message.id)
            return SeqState(kept, state.removed | {message.id})
        if isinstance(message, Id):
            return state
        return None

    def eval(self, state: SeqState) -> tuple:
        return seq_eval(state)

    def authors(self, message):
        if isinstance(message, SeqAdd):
            return frozenset([message.id.rid.replica])
        return ANY

    def gen_args(self, op_name, state, rng):
        size = len(state.elements)
        if op_name == "insert":
            return (rng.randint(0, size), rng.choice("abcdefgh"))
        if size == 0:
            return None
        return (rng.randrange(size),)


@dataclass(frozen=True)
class Reverse:
    # parity of composed reversals; 1 for a prepared reverse, 0 is the identity
    flips: int = 1


class ReverseCrdt(Crdt):
    name = "seq.reverse"
    op_names = ("reverse",)
    message_types = (Reverse,)
    commutative = True

    def initial(self) -> SeqState:
        return SeqState()

    def prepare(self, op: Op, state, dot) -> Reverse:
        if op.name != "reverse":
            raise self._unknown(op)
        return Reverse()

    def effect(self, message: Reverse, state: SeqState) -> SeqState:
        return state.negated() if message.flips % 2 else state

    def eval(self, state):
        return seq_eval(state)


def reverse_act(m2: Reverse, m1):
    if not m2.flips % 2:
        return m1
    if isinstance(m1, SeqAdd):
        return SeqAdd(m1.element, -m1.id)
    if isinstance(m1, SeqRemove):
        return SeqRemove(-m1.id)
    return m1


REVERSE_MONOID = CompressibleMonoid(
    identity=Reverse(0),
    compose=lambda a, b: Reverse((a.flips + b.flips) % 2),
    divide=lambda h, h_prime: Reverse((h.flips - h_prime.flips) % 2),
)


def sequence_instance() -> Sequence:
    return Sequence()


def sequence_reverse_product() -> SemidirectProduct:
    return SemidirectProduct("seq-reverse", Sequence(), ReverseCrdt(), reverse_act, REVERSE_MONOID)


@dataclass(frozen=True)
class RangeRemove:
    low: SeqId
    high: SeqId

    def covers(self, ident: SeqId) -> bool:
        return self.low <= ident <= self.high


class RangeRemoveCrdt(Crdt):
    name = "seq.rremove"
    op_names = ("rremove",)
    message_types = (RangeRemove,)
    commutative = True

    def initial(self) -> SeqState:
        return SeqState()

    def prepare(self, op: Op, state: SeqState, dot) -> RangeRemove:
        if op.name != "rremove":
            raise self._unknown(op)
        start, stop = op.args
        items = state.ordered()
        if not 0 <= start <= stop < len(items):
            raise IndexError(f"rremove range {start}..{stop} out of range")
        return RangeRemove(items[start][1], items[stop][1])

    def effect(self, message: RangeRemove, state: SeqState) -> SeqState:
        kept = frozenset(p for p in state.elements if not message.covers(p[1]))
        return SeqState(kept, state.removed)

    def eval(self, state):
        return seq_eval(state)

    def gen_args(self, op_name, state, rng):
        size = len(state.elements)
        if size == 0:
            return None
        start = rng.randrange(size)
        return (start, rng.randrange(start, size))


def rremove_act(m2: RangeRemove, m1):
    if isinstance(m1, SeqAdd) and m2.covers(m1.id):
        return Id()
    return m1


def sequence_rremove_product() -> SemidirectProduct:
    return SemidirectProduct("seq-rremove", Sequence(), RangeRemoveCrdt(), rremove_act)
