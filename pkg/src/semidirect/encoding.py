"""Canonical JSON encoding of states, messages and eval values.

Sets are sorted by their encoded form, mappings by key, fractions become
``"n/d"`` strings, dataclasses become objects tagged with their class name.
Two values with equal encodings compare equal for every purpose here.
"""

from __future__ import annotations

import dataclasses
import enum
import json
from fractions import Fraction

from .core import ANY, VectorClock


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _sort_key(encoded) -> str:
    return dumps(encoded)


def encode(obj):
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, float):
        raise TypeError("floats are not canonical; use Fraction")
    if isinstance(obj, enum.Enum):
        return obj.value
    if obj is ANY:
        return "*"
    if isinstance(obj, VectorClock):
        return obj.as_dict()
    if isinstance(obj, (frozenset, set)):
        return sorted((encode(x) for x in obj), key=_sort_key)
    if isinstance(obj, dict):
        if all(isinstance(k, str) for k in obj):
            return {k: encode(v) for k, v in obj.items()}
        pairs = [[encode(k), encode(v)] for k, v in obj.items()]
        return sorted(pairs, key=_sort_key)
    if dataclasses.is_dataclass(obj):
        out = {"type": type(obj).__name__}
        for f in dataclasses.fields(obj):
            out[f.name] = encode(getattr(obj, f.name))
        return out
    if isinstance(obj, tuple) and hasattr(obj, "_fields"):
        return {f: encode(getattr(obj, f)) for f in obj._fields}
    if isinstance(obj, (list, tuple)):
        return [encode(x) for x in obj]
    if hasattr(obj, "__json__"):
        return obj.__json__()
    raise TypeError(f"cannot encode {type(obj).__name__}: {obj!r}")


def canonical(obj) -> str:
    return dumps(encode(obj))


def sort_canonically(items):
    return tuple(sorted(items, key=canonical))
