"""Add-wins and remove-wins sets decomposed into commutative data types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..core import ANY, Crdt, Dot, Op
from ..product import SemidirectProduct

UNIVERSE = ("x", "y", "z")


@dataclass(frozen=True)
class AddToken:
    element: Any
    dot: Dot


@dataclass(frozen=True)
class RemoveKeep:
    """remove(a)(S'): drop add-tokens for ``element`` except those in ``keep``."""

    element: Any
    keep: frozenset = frozenset()


class _AwBase(Crdt):
    commutative = True

    def initial(self) -> frozenset:
        return frozenset()

    def eval(self, state: frozenset) -> frozenset:
        return frozenset(t.element for t in state)

    def gen_args(self, op_name, state, rng):
        return (rng.choice(UNIVERSE),)


class AwAdds(_AwBase):
    name = "aw-set.add"
    op_names = ("add",)
    message_types = (AddToken,)

    def prepare(self, op: Op, state, dot) -> AddToken:
        if op.name != "add":
            raise self._unknown(op)
        return AddToken(op.args[0], dot)

    def effect(self, message: AddToken, state):
        return state | {message}

    def authors(self, message: AddToken):
        return frozenset([message.dot.replica])


class AwRemoves(_AwBase):
    name = "aw-set.remove"
    op_names = ("remove",)
    message_types = (RemoveKeep,)

    def prepare(self, op: Op, state, dot) -> RemoveKeep:
        if op.name != "remove":
            raise self._unknown(op)
        return RemoveKeep(op.args[0])

    def effect(self, message: RemoveKeep, state):
        return frozenset(t for t in state if t.element != message.element or t in message.keep)


def aw_act(m2: AddToken, m1: RemoveKeep) -> RemoveKeep:
    if m2.element != m1.element:
        return m1
    return RemoveKeep(m1.element, m1.keep | {m2})


def add_wins_set() -> SemidirectProduct:
    return SemidirectProduct("aw-set", AwRemoves(), AwAdds(), aw_act)


# -- remove-wins ----------------------------------------------------------

@dataclass(frozen=True)
class RemoveToken:
    element: Any
    dot: Dot


@dataclass(frozen=True)
class AddKeep:
    """add(a)(S'): mark ``element`` added and cancel its remove-tokens not in ``keep``."""

    element: Any
    keep: frozenset = frozenset()


@dataclass(frozen=True)
class RwState:
    removes: frozenset = frozenset()
    added: frozenset = frozenset()


class _RwBase(Crdt):
    commutative = True

    def initial(self) -> RwState:
        return RwState()

    def eval(self, state: RwState) -> frozenset:
        blocked = {t.element for t in state.removes}
        return frozenset(a for a in state.added if a not in blocked)

    def gen_args(self, op_name, state, rng):
        return (rng.choice(UNIVERSE),)


class RwRemoves(_RwBase):
    name = "rw-set.remove"
    op_names = ("remove",)
    message_types = (RemoveToken,)

    def prepare(self, op: Op, state, dot) -> RemoveToken:
        if op.name != "remove":
            raise self._unknown(op)
        return RemoveToken(op.args[0], dot)

    def effect(self, message: RemoveToken, state: RwState):
        return RwState(state.removes | {message}, state.added)

    def authors(self, message: RemoveToken):
        return frozenset([message.dot.replica])


class RwAdds(_RwBase):
    name = "rw-set.add"
    op_names = ("add",)
    message_types = (AddKeep,)

    def prepare(self, op: Op, state, dot) -> AddKeep:
        if op.name != "add":
            raise self._unknown(op)
        return AddKeep(op.args[0])

    def effect(self, message: AddKeep, state: RwState):
        removes = frozenset(
            t for t in state.removes if t.element != message.element or t in message.keep)
        return RwState(removes, state.added | {message.element})


def rw_act(m2: RemoveToken, m1: AddKeep) -> AddKeep:
    if m2.element != m1.element:
        return m1
    return AddKeep(m1.element, m1.keep | {m2})


def remove_wins_set() -> SemidirectProduct:
    return SemidirectProduct("rw-set", RwAdds(), RwRemoves(), rw_act)
