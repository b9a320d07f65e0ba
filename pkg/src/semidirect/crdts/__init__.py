"""Concrete instances and the name registry."""

from .registry import UnknownInstance, get, is_control, names, register

__all__ = ["UnknownInstance", "get", "is_control", "names", "register"]
