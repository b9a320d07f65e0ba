"""Instances by stable string name."""

from __future__ import annotations

from typing import Callable

from ..core import Crdt, CrdtError
from ..product import SemidirectProduct
from .basic import Counter, GSet
from .compact import CompactAwSet, CompactFlag, CompactObservedReset
from .flags import disable_wins_flag, enable_wins_flag, naive_enable_wins_flag
from .maps import map_homap_product
from .reset import observed_reset, reset_wins
from .semiring import ADD_MULT, MAX_MIN, MIN_MAX, MIN_PLUS, semiring_product
from .sequence import sequence_instance, sequence_rremove_product, sequence_reverse_product
from .sets import add_wins_set, remove_wins_set


class UnknownInstance(CrdtError):
    pass


_FACTORIES: dict = {}
_CONTROLS: set = set()
# wrappers taking a plain instance name after the colon
_WRAPPERS: dict = {}


def register(name: str, factory: Callable[[], Crdt], control: bool = False) -> None:
    """Register ``factory`` under ``name``; controls are skipped by ``names()``."""
    _FACTORIES[name] = factory
    if control:
        _CONTROLS.add(name)
    else:
        _CONTROLS.discard(name)


def _renamed(instance: Crdt, name: str) -> Crdt:
    instance.name = name
    return instance


def _homap_naive() -> SemidirectProduct:
    # the map and homap side by side, without the backlog transform
    product = map_homap_product(GSet(), name="map-homap-naive")
    product.act = lambda m2, m1: m1
    return product


register("counter", Counter)
register("gset", GSet)
register("seq", sequence_instance)
register("addmult", lambda: semiring_product(ADD_MULT))
register("minplus", lambda: semiring_product(MIN_PLUS))
register("maxmin", lambda: semiring_product(MAX_MIN))
register("minmax", lambda: semiring_product(MIN_MAX))
register("map-homap", lambda: map_homap_product(GSet()))
register("seq-reverse", sequence_reverse_product)
register("seq-rremove", sequence_rremove_product)
register("ew-flag", enable_wins_flag)
register("dw-flag", disable_wins_flag)
register("aw-set", add_wins_set)
register("rw-set", remove_wins_set)
register("ew-flag-compact", CompactFlag)
register("aw-set-compact", CompactAwSet)
register("ew-flag-naive", naive_enable_wins_flag, control=True)
register("map-homap-naive", _homap_naive, control=True)

# plain types that may be wrapped; all are commutative
WRAPPABLE = ("counter", "gset", "seq")
_WRAPPERS["reset-wins"] = reset_wins
_WRAPPERS["obs-reset"] = observed_reset
_WRAPPERS["obs-reset-compact"] = CompactObservedReset
_WRAPPERS["map-homap"] = lambda inner: map_homap_product(inner, name=f"map-homap:{inner.name}")

DEFAULT_WRAPPED = {"reset-wins": "counter", "obs-reset": "counter", "obs-reset-compact": "counter"}


def get(name: str) -> Crdt:
    if name in _FACTORIES:
        return _FACTORIES[name]()
    prefix, sep, inner = name.partition(":")
    if sep and prefix in _WRAPPERS and inner in WRAPPABLE:
        return _renamed(_WRAPPERS[prefix](_FACTORIES[inner]()), name)
    raise UnknownInstance(f"unknown instance {name!r}")


def names(include_controls: bool = False) -> list:
    """Every shipped instance name, wrappers applied to their default inner type."""
    out = [n for n in _FACTORIES if include_controls or n not in _CONTROLS]
    out += [f"{w}:{inner}" for w, inner in DEFAULT_WRAPPED.items()]
    return out


def is_control(name: str) -> bool:
    return name in _CONTROLS
