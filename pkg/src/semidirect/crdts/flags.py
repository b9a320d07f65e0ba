"""Enable-wins and disable-wins flags as products of commutative data types."""

from __future__ import annotations

from dataclasses import dataclass

from ..core import ANY, Crdt, Dot, Id, Op
from ..product import SemidirectProduct

ENABLED = "enabled"
DISABLED = "disabled"


@dataclass(frozen=True)
class Token:
    """One issued enable (or, for disable-wins, disable) message."""

    dot: Dot


@dataclass(frozen=True)
class Keep:
    """Intersect the token set with ``tokens``; prepared with the empty set."""

    tokens: frozenset = frozenset()


class _TokenFlag(Crdt):
    commutative = True

    def __init__(self, winner: str, initial=frozenset()):
        self.winner = winner
        self._initial = frozenset(initial)

    def initial(self) -> frozenset:
        return self._initial

    def eval(self, state: frozenset) -> str:
        loser = DISABLED if self.winner == ENABLED else ENABLED
        return self.winner if state else loser


class KeepFlag(_TokenFlag):
    message_types = (Keep,)

    def __init__(self, op_name: str, winner: str, initial=frozenset()):
        super().__init__(winner, initial)
        self.op_names = (op_name,)
        self.name = f"flag.{op_name}"

    def prepare(self, op: Op, state, dot) -> Keep:
        if op.name not in self.op_names:
            raise self._unknown(op)
        return Keep()

    def effect(self, message: Keep, state):
        return state & message.tokens


class TokenFlag(_TokenFlag):
    message_types = (Token,)

    def __init__(self, op_name: str, winner: str, initial=frozenset()):
        super().__init__(winner, initial)
        self.op_names = (op_name,)
        self.name = f"flag.{op_name}"

    def prepare(self, op: Op, state, dot) -> Token:
        if op.name not in self.op_names:
            raise self._unknown(op)
        return Token(dot)

    def effect(self, message: Token, state):
        return state | {message}

    def authors(self, message: Token):
        return frozenset([message.dot.replica])


def token_act(m2: Token, m1: Keep) -> Keep:
    return Keep(m1.tokens | {m2})


def enable_wins_flag() -> SemidirectProduct:
    return SemidirectProduct(
        "ew-flag", KeepFlag("disable", ENABLED), TokenFlag("enable", ENABLED), token_act)


# Stands for every disable causally before all operations, so that the
# disable-wins flag starts out disabled; no keep-set ever contains it.
INITIAL_DISABLE = Token(Dot("", 0))


def disable_wins_flag() -> SemidirectProduct:
    initial = {INITIAL_DISABLE}
    return SemidirectProduct(
        "dw-flag", KeepFlag("enable", DISABLED, initial), TokenFlag("disable", DISABLED, initial),
        token_act)


@dataclass(frozen=True)
class Enable:
    pass


@dataclass(frozen=True)
class Disable:
    pass


class _NaiveFlag(Crdt):
    commutative = True

    def initial(self):
        return DISABLED

    def eval(self, state):
        return state


class NaiveDisable(_NaiveFlag):
    name = "naive.disable"
    op_names = ("disable",)
    message_types = (Disable, Id)

    def prepare(self, op, state, dot):
        if op.name != "disable":
            raise self._unknown(op)
        return Disable()

    def effect(self, message, state):
        return state if isinstance(message, Id) else DISABLED


class NaiveEnable(_NaiveFlag):
    name = "naive.enable"
    op_names = ("enable",)
    message_types = (Enable,)

    def prepare(self, op, state, dot):
        if op.name != "enable":
            raise self._unknown(op)
        return Enable()

    def effect(self, message, state):
        return ENABLED


def naive_enable_wins_flag() -> SemidirectProduct:
    """The first-attempt flag on {enabled, disabled}: enable turns disable into id.

    It converges, but to ``enabled`` where enable-wins semantics say disabled.
    """
    return SemidirectProduct("ew-flag-naive", NaiveDisable(), NaiveEnable(), lambda m2, m1: Id())
