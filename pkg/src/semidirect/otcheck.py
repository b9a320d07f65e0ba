"""The product viewed as operational transformation, and back."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .core import CrdtError, Crdt, Dot, Op
from .product import SemidirectProduct, UndefinedAction


class ShapeViolation(CrdtError):
    """tf1 transformed a pair it must leave alone."""


def tf1(product: SemidirectProduct, m, l):
    """Transform ``m`` against a concurrent ``l``: only first by second changes."""
    if product.component_of(m) == 1 and product.component_of(l) == 2:
        acted = product.act(l, m)
        if acted is None:
            raise UndefinedAction(f"{l!r} |> {m!r} is undefined")
        return acted
    return m


def _apply(product, message, state):
    return None if state is None else product.apply_payload(message, state)


def check_tp1(product: SemidirectProduct, state, l, m) -> bool:
    """Both ways of applying a concurrent pair reach the same state.

    Each message is applied after the other, transformed against it.
    """
    left = _apply(product, tf1(product, m, l), _apply(product, l, state))
    right = _apply(product, tf1(product, l, m), _apply(product, m, state))
    return left is not None and left == right


def check_tp2(product: SemidirectProduct, k, l, m) -> bool:
    left = tf1(product, tf1(product, l, k), tf1(product, m, k))
    right = tf1(product, tf1(product, l, m), tf1(product, k, m))
    return left == right


@dataclass(frozen=True)
class TransformFn:
    first: Crdt
    second: Crdt
    tf1: Callable


def ot_from_product(product: SemidirectProduct) -> TransformFn:
    return TransformFn(product.first, product.second, lambda m, l: tf1(product, m, l))


def sample_messages(first: Crdt, second: Crdt, count: int = 12, seed: int = 0) -> list:
    """Messages prepared from the initial state by each component's operations."""
    rng = random.Random(seed)
    out = []
    for component in (first, second):
        for i in range(count):
            name = component.op_names[i % len(component.op_names)]
            args = component.gen_args(name, component.initial(), rng)
            if args is None:
                continue
            out.append(component.prepare(Op(name, tuple(args)), component.initial(),
                                         Dot(f"s{i % 3}", i + 1)))
    return out


def product_from_ot(first: Crdt, second: Crdt, tf: Callable, name: str = "from-ot",
                    samples: Optional[Iterable] = None, monoid=None) -> SemidirectProduct:
    """Rebuild a product whose action is ``o2 |> o1 = tf(o1, o2)``.

    Raises ShapeViolation if ``tf`` changes a sampled pair other than
    (first-component, second-component).
    """
    samples = list(samples) if samples is not None else sample_messages(first, second)
    for o in samples:
        for p in samples:
            if first.owns(o) and second.owns(p):
                continue
            if tf(o, p) != o:
                raise ShapeViolation(f"tf1({o!r}, {p!r}) must be {o!r}")
    return SemidirectProduct(name, first, second, lambda m2, m1: tf(m1, m2), monoid)


def round_trip(product: SemidirectProduct) -> SemidirectProduct:
    return product_from_ot(product.first, product.second, ot_from_product(product).tf1,
                           name=product.name, monoid=product.monoid)
