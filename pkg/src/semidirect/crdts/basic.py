"""Commutative data types: the counter and the grow-only set."""

from __future__ import annotations

from dataclasses import dataclass

from ..core import Crdt, Op


@dataclass(frozen=True)
class Add:
    n: int


class Counter(Crdt):
    name = "counter"
    op_names = ("add",)
    message_types = (Add,)
    commutative = True

    def initial(self) -> int:
        return 0

    def prepare(self, op: Op, state, dot) -> Add:
        if op.name != "add":
            raise self._unknown(op)
        (n,) = op.args
        return Add(int(n))

    def effect(self, message, state):
        return message.n + state

    def eval(self, state) -> int:
        return state

    def gen_args(self, op_name, state, rng):
        return (rng.randint(-3, 5),)


@dataclass(frozen=True)
class GAdd:
    value: str


class GSet(Crdt):
    name = "gset"
    op_names = ("add",)
    message_types = (GAdd,)
    commutative = True

    def initial(self) -> frozenset:
        return frozenset()

    def prepare(self, op: Op, state, dot) -> GAdd:
        if op.name != "add":
            raise self._unknown(op)
        (value,) = op.args
        return GAdd(value)

    def effect(self, message, state):
        return state | {message.value}

    def eval(self, state) -> frozenset:
        return state

    def gen_args(self, op_name, state, rng):
        return (rng.choice("xyzw"),)
