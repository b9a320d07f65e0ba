"""Register over a commutative semiring: plus operations acted on by times."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

from ..core import Crdt, Op
from ..product import CompressibleMonoid, LawViolation, SemidirectProduct


@dataclass(frozen=True)
class SemiringSpec:
    name: str
    plus: Callable[[Any, Any], Any]
    times: Callable[[Any, Any], Any]
    # user-facing operation names for the plus and times messages
    plus_name: str
    times_name: str
    initial: Any
    sample: Sequence
    one: Any = None
    # left division for times: x with times(divisor, x) == dividend, or None
    divide: Optional[Callable[[Any, Any], Any]] = None
    times_admissible: Callable[[Any], bool] = lambda t: True


def check_semiring_laws(spec: SemiringSpec) -> Optional[tuple]:
    """Return a counterexample triple, or None if the sample satisfies the laws."""
    plus, times = spec.plus, spec.times
    for a, b, c in itertools.product(spec.sample, repeat=3):
        if plus(a, b) != plus(b, a) or times(a, b) != times(b, a):
            return (a, b, c)
        if plus(plus(a, b), c) != plus(a, plus(b, c)):
            return (a, b, c)
        if times(times(a, b), c) != times(a, times(b, c)):
            return (a, b, c)
        if times(a, plus(b, c)) != plus(times(a, b), times(a, c)):
            return (a, b, c)
    return None


@dataclass(frozen=True)
class Plus:
    value: Any


@dataclass(frozen=True)
class Times:
    value: Any


class PlusRegister(Crdt):
    commutative = True
    message_types = (Plus,)

    def __init__(self, spec: SemiringSpec):
        self.spec = spec
        self.name = f"{spec.name}.{spec.plus_name}"
        self.op_names = (spec.plus_name,)

    def initial(self):
        return self.spec.initial

    def prepare(self, op: Op, state, dot) -> Plus:
        if op.name != self.spec.plus_name:
            raise self._unknown(op)
        return Plus(op.args[0])

    def effect(self, message, state):
        return self.spec.plus(message.value, state)

    def eval(self, state):
        return state

    def gen_args(self, op_name, state, rng):
        return (rng.choice(self.spec.sample),)


class TimesRegister(PlusRegister):
    message_types = (Times,)

    def __init__(self, spec: SemiringSpec):
        super().__init__(spec)
        self.name = f"{spec.name}.{spec.times_name}"
        self.op_names = (spec.times_name,)

    def prepare(self, op: Op, state, dot) -> Times:
        if op.name != self.spec.times_name:
            raise self._unknown(op)
        return Times(op.args[0])

    def effect(self, message, state):
        return self.spec.times(message.value, state)


def semiring_product(spec: SemiringSpec) -> SemidirectProduct:
    bad = check_semiring_laws(spec)
    if bad is not None:
        raise LawViolation(f"{spec.name}: semiring laws fail on {bad}")

    def act(m2, m1):
        return Plus(spec.times(m2.value, m1.value))

    monoid = None
    if spec.divide is not None:
        def divide(h, h_prime):
            quotient = spec.divide(h.value, h_prime.value)
            return None if quotient is None else Times(quotient)

        monoid = CompressibleMonoid(
            identity=Times(spec.one),
            compose=lambda a, b: Times(spec.times(a.value, b.value)),
            divide=divide,
            admissible=lambda m: spec.times_admissible(m.value),
        )
    return SemidirectProduct(spec.name, PlusRegister(spec), TimesRegister(spec), act, monoid)


def _exact_quotient(dividend: int, divisor: int):
    if divisor == 0 or dividend % divisor:
        return None
    return dividend // divisor


def _difference(total: int, part: int):
    return total - part if total >= part else None


ADD_MULT = SemiringSpec(
    "addmult", plus=lambda a, b: a + b, times=lambda a, b: a * b,
    plus_name="add", times_name="mult", initial=1, sample=(-2, -1, 0, 1, 2, 3),
    one=1, divide=_exact_quotient, times_admissible=lambda t: t != 0,
)
MIN_PLUS = SemiringSpec(
    "minplus", plus=min, times=lambda a, b: a + b,
    plus_name="min", times_name="add", initial=0, sample=(0, 1, 2, 3, 5),
    one=0, divide=_difference,
)
MAX_MIN = SemiringSpec(
    "maxmin", plus=max, times=min,
    plus_name="max", times_name="min", initial=0, sample=(0, 1, 2, 4, 7),
)
MIN_MAX = SemiringSpec(
    "minmax", plus=min, times=max,
    plus_name="min", times_name="max", initial=0, sample=(0, 1, 2, 4, 7),
)
