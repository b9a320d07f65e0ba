"""Op-based CRDT abstraction, vector clocks and the single-replica protocol."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Iterable, NamedTuple, Optional, Union


class CrdtError(Exception):
    """Base class for errors raised by this package."""


class UndefinedEffect(CrdtError):
    """An effect returned undefined where the CRDT contract requires a value."""

    def __init__(self, message, state, detail: str = ""):
        self.message = message
        self.state = state
        text = f"effect undefined for {message!r} on {state!r}"
        super().__init__(f"{text}: {detail}" if detail else text)


class UnknownOperation(CrdtError):
    pass


class Dot(NamedTuple):
    """Unique identity of one issued operation: (issuing replica, its op counter)."""

    replica: str
    counter: int


class Op(NamedTuple):
    name: str
    args: tuple = ()


class _AnyAuthor:
    """Author set of formal messages: every replica may author them."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __contains__(self, replica) -> bool:
        return True

    def __repr__(self) -> str:
        return "ANY"


ANY = _AnyAuthor()
Authors = Union[frozenset, _AnyAuthor]


def can_have_different_authors(*author_sets: Authors) -> bool:
    """True if the messages admit pairwise-distinct authors.

    ANY offers unboundedly many replicas, so only the concrete singleton
    sets can clash.
    """
    concrete = [a for a in author_sets if a is not ANY]
    chosen: set = set()
    for authors in sorted(concrete, key=len):
        free = [r for r in sorted(authors) if r not in chosen]
        if not free:
            return False
        chosen.add(free[0])
    return True


@dataclass(frozen=True)
class Id:
    """The formal identity message; acts as ``id . s = s``."""


class CausalRelation(enum.Enum):
    BEFORE = "before"
    AFTER = "after"
    CONCURRENT = "concurrent"
    EQUAL = "equal"


class VectorClock:
    """Immutable sparse vector clock; absent entries read as 0."""

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Optional[dict] = None):
        clean = {}
        for replica, count in (entries or {}).items():
            if count < 0:
                raise ValueError(f"negative clock entry {replica}:{count}")
            if count:
                clean[replica] = count
        self._entries = clean
        self._hash = None

    def __getitem__(self, replica) -> int:
        return self._entries.get(replica, 0)

    def __iter__(self):
        return iter(sorted(self._entries))

    def items(self):
        return sorted(self._entries.items())

    def as_dict(self) -> dict:
        return dict(self.items())

    def total(self) -> int:
        return sum(self._entries.values())

    def increment(self, replica) -> VectorClock:
        bumped = dict(self._entries)
        bumped[replica] = bumped.get(replica, 0) + 1
        return VectorClock(bumped)

    def merge(self, other: VectorClock) -> VectorClock:
        merged = dict(self._entries)
        for replica, count in other._entries.items():
            if count > merged.get(replica, 0):
                merged[replica] = count
        return VectorClock(merged)

    def meet(self, other: VectorClock) -> VectorClock:
        return VectorClock({r: min(c, other[r]) for r, c in self._entries.items()})

    def __le__(self, other: VectorClock) -> bool:
        return all(count <= other[r] for r, count in self._entries.items())

    def __lt__(self, other: VectorClock) -> bool:
        return self <= other and self != other

    def compare(self, other: VectorClock) -> CausalRelation:
        below = self <= other
        above = other <= self
        if below and above:
            return CausalRelation.EQUAL
        if below:
            return CausalRelation.BEFORE
        if above:
            return CausalRelation.AFTER
        return CausalRelation.CONCURRENT

    def concurrent(self, other: VectorClock) -> bool:
        return not (self <= other) and not (other <= self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorClock):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = ",".join(f"{r}:{c}" for r, c in self.items())
        return "{" + inner + "}"


ZERO = VectorClock()


def vc_increment(vc: VectorClock, replica) -> VectorClock:
    return vc.increment(replica)


def vc_merge(a: VectorClock, b: VectorClock) -> VectorClock:
    return a.merge(b)


def vc_compare(a: VectorClock, b: VectorClock) -> CausalRelation:
    return a.compare(b)


def causal_deliverable(msg_ts: VectorClock, sender, local: VectorClock) -> bool:
    """Whether a message stamped ``msg_ts`` by ``sender`` can be delivered now.

    The receiver must have seen exactly the sender's previous messages and
    at least every other message the sender had seen.
    """
    if local[sender] != msg_ts[sender] - 1:
        return False
    return all(local[r] >= count for r, count in msg_ts.items() if r != sender)


class Crdt:
    """An op-based CRDT: prepare / effect / eval over immutable states.

    ``effect`` returns ``None`` when the message is undefined on the state.
    Subclasses list their operation names in ``op_names`` and their message
    classes in ``message_types``.
    """

    name = "crdt"
    op_names: tuple = ()
    message_types: tuple = ()
    #: every pair of messages commutes on every state
    commutative = False

    def initial(self):
        raise NotImplementedError

    def prepare(self, op: Op, state, dot: Dot):
        raise NotImplementedError

    def effect(self, message, state):
        raise NotImplementedError

    def eval(self, state):
        raise NotImplementedError

    def authors(self, message) -> Authors:
        return ANY

    def owns(self, message) -> bool:
        return isinstance(message, self.message_types)

    def gen_args(self, op_name: str, state, rng) -> Optional[tuple]:
        """Random arguments for ``op_name`` in ``state``; None if inapplicable."""
        return ()

    def random_op(self, state, rng, weights: Optional[dict] = None) -> Optional[Op]:
        weights = weights or {name: 1 for name in self.op_names}
        names = [n for n in self.op_names if weights.get(n, 0) > 0]
        while names:
            name = rng.choices(names, [weights[n] for n in names])[0]
            args = self.gen_args(name, state, rng)
            if args is not None:
                return Op(name, tuple(args))
            names.remove(name)
        return None

    def history_size(self, state) -> int:
        return 0

    def prune(self, state, frontier: VectorClock):
        return state

    def _unknown(self, op: Op):
        return UnknownOperation(f"{self.name}: unknown operation {op.name!r}")

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


@dataclass(frozen=True)
class LocalOp:
    op: Op
    dot: Dot


@dataclass(frozen=True)
class Receive:
    message: Any


def apply_effect(instance: Crdt, message, state):
    result = instance.effect(message, state)
    if result is None:
        raise UndefinedEffect(message, state)
    return result


def replica_step(instance: Crdt, state, event):
    """One step of the replica loop: returns ``(new_state, outbound or None)``."""
    if isinstance(event, LocalOp):
        message = instance.prepare(event.op, state, event.dot)
        return apply_effect(instance, message, state), message
    if isinstance(event, Receive):
        return apply_effect(instance, event.message, state), None
    raise TypeError(f"unknown replica event {event!r}")


def replay(instance: Crdt, messages: Iterable, state=None):
    """Apply messages in order from ``state`` (default: the initial state)."""
    state = instance.initial() if state is None else state
    for message in messages:
        state = instance.effect(message, state)
        if state is None:
            return None
    return state


def check_prepare_defined(instance: Crdt, op: Op, state, dot: Dot) -> bool:
    message = instance.prepare(op, state, dot)
    return instance.effect(message, state) is not None


def check_commute(instance: Crdt, state, m1, m2) -> bool:
    """Strengthened commutativity for one pair; vacuous if the pair is inadmissible."""
    if not can_have_different_authors(instance.authors(m1), instance.authors(m2)):
        return True
    s1 = instance.effect(m1, state)
    s2 = instance.effect(m2, state)
    if s1 is None or s2 is None:
        return True
    left = instance.effect(m1, s2)
    right = instance.effect(m2, s1)
    return left is not None and left == right
