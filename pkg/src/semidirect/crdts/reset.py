"""Reset-wins and observed-reset wrappers around a commutative data type."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..core import Crdt, CrdtError, Dot, Id, Op, replay
from ..encoding import sort_canonically
from ..product import SemidirectProduct


class ReplayUndefined(CrdtError):
    """Replaying a surviving log subset hit an undefined effect."""


class WithIdentity(Crdt):
    """``wrapped`` plus the formal identity message."""

    def __init__(self, wrapped: Crdt):
        self.wrapped = wrapped
        self.name = wrapped.name
        self.op_names = tuple(wrapped.op_names)
        self.message_types = tuple(wrapped.message_types) + (Id,)
        self.commutative = wrapped.commutative

    def initial(self):
        return self.wrapped.initial()

    def prepare(self, op, state, dot):
        return self.wrapped.prepare(op, state, dot)

    def effect(self, message, state):
        if isinstance(message, Id):
            return state
        return self.wrapped.effect(message, state)

    def eval(self, state):
        return self.wrapped.eval(state)

    def authors(self, message):
        return self.wrapped.authors(message)

    def gen_args(self, op_name, state, rng):
        return self.wrapped.gen_args(op_name, state, rng)


@dataclass(frozen=True)
class Reset:
    pass


class ResetCrdt(Crdt):
    op_names = ("reset",)
    message_types = (Reset,)
    commutative = True

    def __init__(self, wrapped: Crdt):
        self.wrapped = wrapped
        self.name = f"reset({wrapped.name})"

    def initial(self):
        return self.wrapped.initial()

    def prepare(self, op, state, dot) -> Reset:
        if op.name != "reset":
            raise self._unknown(op)
        return Reset()

    def effect(self, message, state):
        return self.wrapped.initial()

    def eval(self, state):
        return self.wrapped.eval(state)


def reset_wins(wrapped: Crdt) -> SemidirectProduct:
    return SemidirectProduct(
        f"reset-wins:{wrapped.name}", WithIdentity(wrapped), ResetCrdt(wrapped),
        lambda m2, m1: Id())


# -- observed reset ---------------------------------------------------------

@dataclass(frozen=True)
class Logged:
    """A wrapped message, made unique by the dot of the operation that issued it."""

    dot: Dot
    message: Any


@dataclass(frozen=True)
class ResetLog:
    """reset(L): keep only the logged messages in ``keep`` and replay them from scratch."""

    keep: frozenset = frozenset()


@dataclass(frozen=True)
class LoggedState:
    inner: Any
    log: frozenset = frozenset()


def replay_log(wrapped: Crdt, log) -> Any:
    # any order will do: the wrapped type is commutative
    state = replay(wrapped, [entry.message for entry in sort_canonically(log)])
    if state is None:
        raise ReplayUndefined(f"replaying {len(log)} logged messages is undefined")
    return state


class _LogBase(Crdt):
    commutative = True

    def __init__(self, wrapped: Crdt):
        self.wrapped = wrapped

    def initial(self) -> LoggedState:
        return LoggedState(self.wrapped.initial())

    def eval(self, state: LoggedState):
        return self.wrapped.eval(state.inner)


class LoggedOps(_LogBase):
    message_types = (Logged,)

    def __init__(self, wrapped: Crdt):
        super().__init__(wrapped)
        self.name = f"logged({wrapped.name})"
        self.op_names = tuple(wrapped.op_names)

    def prepare(self, op, state: LoggedState, dot) -> Logged:
        return Logged(dot, self.wrapped.prepare(op, state.inner, dot))

    def effect(self, message: Logged, state: LoggedState):
        inner = self.wrapped.effect(message.message, state.inner)
        if inner is None:
            return None
        return LoggedState(inner, state.log | {message})

    def authors(self, message: Logged):
        return frozenset([message.dot.replica])

    def gen_args(self, op_name, state, rng):
        return self.wrapped.gen_args(op_name, state.inner, rng)


class ResetOps(_LogBase):
    op_names = ("reset",)
    message_types = (ResetLog,)

    def __init__(self, wrapped: Crdt):
        super().__init__(wrapped)
        self.name = f"obs-reset({wrapped.name})"

    def prepare(self, op, state, dot) -> ResetLog:
        if op.name != "reset":
            raise self._unknown(op)
        return ResetLog()

    def effect(self, message: ResetLog, state: LoggedState):
        log = state.log & message.keep
        return LoggedState(replay_log(self.wrapped, log), log)


def observed_reset(wrapped: Crdt) -> SemidirectProduct:
    if not wrapped.commutative:
        raise CrdtError(f"{wrapped.name} is not a commutative data type")
    return SemidirectProduct(
        f"obs-reset:{wrapped.name}", ResetOps(wrapped), LoggedOps(wrapped),
        lambda m2, m1: ResetLog(m1.keep | {m2}))
