"""Map CRDT with a higher-order map operation applying to every present value.

Each value remembers which homap messages it has absorbed. Without that,
an apply whose backlog says "this homap should reach the key" is ignored
when the key was meanwhile created by an apply issued after the homap, and
two such applies stop commuting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..core import Crdt, CrdtError, Dot, Op, replay
from ..encoding import sort_canonically
from ..product import SemidirectProduct


class ValueNotCommutative(CrdtError):
    pass


@dataclass(frozen=True)
class Homap:
    dot: Dot  # makes every issued homap distinct
    message: Any


@dataclass(frozen=True)
class Apply:
    """Apply ``message`` at ``key``; ``backlog`` homaps must reach the key as well."""

    key: str
    message: Any
    backlog: frozenset = frozenset()


@dataclass(frozen=True)
class Entry:
    value: Any
    absorbed: frozenset = frozenset()  # Homap messages already applied to value


def _absorb(value: Crdt, state, homaps):
    messages = [h.message for h in sort_canonically(homaps)]
    return replay(value, messages, state)


class _MapBase(Crdt):
    commutative = True

    def __init__(self, value: Crdt):
        self.value = value

    def initial(self) -> dict:
        return {}

    def eval(self, state: dict) -> dict:
        return {k: self.value.eval(e.value) for k, e in state.items()}

    def _inner_op(self, args) -> Op:
        name, *rest = args
        return Op(name, tuple(rest))


class KeyedMap(_MapBase):
    """Plain map: ``apply(k, op...)``, treating an absent value as initial."""

    op_names = ("apply",)
    message_types = (Apply,)

    def __init__(self, value: Crdt, keys=("a", "b", "c")):
        super().__init__(value)
        self.name = f"map({value.name})"
        self.keys = keys

    def prepare(self, op: Op, state, dot) -> Apply:
        if op.name != "apply":
            raise self._unknown(op)
        key, *inner = op.args
        current = state[key].value if key in state else self.value.initial()
        return Apply(key, self.value.prepare(self._inner_op(inner), current, dot))

    def effect(self, message: Apply, state: dict):
        entry = state.get(message.key, Entry(self.value.initial()))
        base = _absorb(self.value, entry.value, message.backlog - entry.absorbed)
        if base is None:
            return None
        updated = self.value.effect(message.message, base)
        if updated is None:
            return None
        out = dict(state)
        out[message.key] = Entry(updated, entry.absorbed | message.backlog)
        return out

    def gen_args(self, op_name, state, rng):
        inner = self.value.random_op(self.value.initial(), rng)
        return (rng.choice(self.keys), inner.name, *inner.args)


class HomapMap(_MapBase):
    """``homap(op...)``: apply one value message to every present value."""

    op_names = ("homap",)
    message_types = (Homap,)

    def __init__(self, value: Crdt):
        super().__init__(value)
        self.name = f"homap({value.name})"

    def prepare(self, op: Op, state, dot) -> Homap:
        if op.name != "homap":
            raise self._unknown(op)
        return Homap(dot, self.value.prepare(self._inner_op(op.args), self.value.initial(), dot))

    def effect(self, message: Homap, state: dict):
        out = {}
        for key, entry in state.items():
            updated = self.value.effect(message.message, entry.value)
            if updated is None:
                return None
            out[key] = Entry(updated, entry.absorbed | {message})
        return out

    def authors(self, message: Homap):
        return frozenset([message.dot.replica])

    def gen_args(self, op_name, state, rng):
        inner = self.value.random_op(self.value.initial(), rng)
        return (inner.name, *inner.args)


def homap_act(m2: Homap, m1: Apply) -> Apply:
    return Apply(m1.key, m1.message, m1.backlog | {m2})


def map_homap_product(value: Crdt, name: str = "map-homap") -> SemidirectProduct:
    if not value.commutative:
        raise ValueNotCommutative(f"{value.name} is not a commutative data type")
    return SemidirectProduct(name, KeyedMap(value), HomapMap(value), homap_act)
