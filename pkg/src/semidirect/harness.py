"""Deterministic multi-replica simulator over causal broadcast."""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Union

from .core import ZERO, Crdt, CrdtError, Dot, Op, UndefinedEffect, VectorClock, causal_deliverable
from .crdts import registry
from .encoding import canonical, dumps, encode


class HarnessError(CrdtError):
    pass


class NonCausalDelivery(HarnessError):
    pass


class ScenarioError(HarnessError):
    """A scenario references a bad replica or message, or an op is rejected."""


class BoundExceeded(HarnessError):
    pass


class ParseError(HarnessError):
    def __init__(self, text: str, position: str):
        self.position = position
        super().__init__(f"{position}: {text}")


# -- scenarios ---------------------------------------------------------------

@dataclass(frozen=True)
class OpEvent:
    replica: str
    op: str
    args: tuple = ()

    def to_json(self) -> dict:
        return {"type": "op", "replica": self.replica, "op": self.op, "args": list(self.args)}


@dataclass(frozen=True)
class DeliverEvent:
    to: str
    msg: int

    def to_json(self) -> dict:
        return {"type": "deliver", "to": self.to, "msg": self.msg}


@dataclass(frozen=True)
class DeliverAll:
    def to_json(self) -> dict:
        return {"type": "deliver_all"}


Event = Union[OpEvent, DeliverEvent, DeliverAll]


@dataclass
class Scenario:
    instance: str
    replicas: list
    events: list = field(default_factory=list)
    seed: int = 0

    def to_json(self) -> dict:
        return {"instance": self.instance, "replicas": list(self.replicas), "seed": self.seed,
                "events": [e.to_json() for e in self.events]}

    def dumps(self) -> str:
        return dumps(self.to_json())

    def op_count(self) -> int:
        return sum(isinstance(e, OpEvent) for e in self.events)


def _require(cond: bool, text: str, position: str) -> None:
    if not cond:
        raise ParseError(text, position)


def _parse_event(raw, where: str) -> Event:
    _require(isinstance(raw, dict), "event must be an object", where)
    kind = raw.get("type")
    if kind == "op":
        _require(isinstance(raw.get("replica"), str), "missing string 'replica'", where)
        _require(isinstance(raw.get("op"), str), "missing string 'op'", where)
        args = raw.get("args", [])
        _require(isinstance(args, list), "'args' must be a list", where)
        return OpEvent(raw["replica"], raw["op"], tuple(args))
    if kind == "deliver":
        _require(isinstance(raw.get("to"), str), "missing string 'to'", where)
        msg = raw.get("msg")
        _require(isinstance(msg, int) and not isinstance(msg, bool) and msg >= 0,
                 "'msg' must be a non-negative integer", where)
        return DeliverEvent(raw["to"], msg)
    if kind == "deliver_all":
        return DeliverAll()
    raise ParseError(f"unknown event type {kind!r}", where)


def scenario_from_json(doc) -> Scenario:
    _require(isinstance(doc, dict), "scenario must be an object", "$")
    _require(isinstance(doc.get("instance"), str), "missing string 'instance'", "$.instance")
    replicas = doc.get("replicas")
    _require(isinstance(replicas, list) and replicas and all(isinstance(r, str) for r in replicas),
             "'replicas' must be a non-empty list of strings", "$.replicas")
    _require(len(set(replicas)) == len(replicas), "duplicate replica id", "$.replicas")
    seed = doc.get("seed", 0)
    _require(isinstance(seed, int) and not isinstance(seed, bool), "'seed' must be an integer",
             "$.seed")
    events = doc.get("events", [])
    _require(isinstance(events, list), "'events' must be a list", "$.events")
    parsed = [_parse_event(e, f"$.events[{i}]") for i, e in enumerate(events)]
    return Scenario(doc["instance"], list(replicas), parsed, seed)


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, f"line {err.lineno} column {err.colno}") from None
    return scenario_from_json(doc)


# -- simulation --------------------------------------------------------------

@dataclass(frozen=True)
class Sent:
    index: int
    sender: str
    timestamp: VectorClock
    message: Any
    op: Op


@dataclass(frozen=True)
class Step:
    event: int  # index into the scenario's events
    kind: str
    replica: str
    msg: Optional[int]
    message: Any  # encoded message emitted or delivered
    evals: dict
    history: dict
    clocks: dict

    def to_json(self) -> dict:
        return {"event": self.event, "kind": self.kind, "replica": self.replica, "msg": self.msg,
                "message": self.message, "evals": self.evals, "history": self.history,
                "clocks": self.clocks}


@dataclass
class Trace:
    instance: str
    seed: int
    initial: dict
    steps: list = field(default_factory=list)

    @property
    def final(self) -> dict:
        return self.steps[-1].evals if self.steps else self.initial

    def to_json(self) -> dict:
        return {"instance": self.instance, "seed": self.seed, "initial": self.initial,
                "steps": [s.to_json() for s in self.steps], "final": self.final}

    def dumps(self) -> str:
        return dumps(self.to_json())


class Simulation:
    """Replicas of one instance exchanging messages over causal broadcast."""

    def __init__(self, instance: Crdt, replicas, seed: int = 0):
        if not replicas:
            raise ScenarioError("at least one replica is required")
        self.instance = instance
        self.replicas = sorted(replicas)
        self.rng = random.Random(seed)
        self.states = {r: instance.initial() for r in self.replicas}
        self.clocks = {r: ZERO for r in self.replicas}
        self.delivered = {r: set() for r in self.replicas}
        self.sent: list = []

    def _check_replica(self, replica) -> None:
        if replica not in self.states:
            raise ScenarioError(f"unknown replica {replica!r}")

    def local(self, replica, op: Op) -> Sent:
        self._check_replica(replica)
        stamp = self.clocks[replica].increment(replica)
        state = self.states[replica]
        try:
            message = self.instance.prepare(op, state, Dot(replica, stamp[replica]))
        except (IndexError, ValueError, TypeError, KeyError) as err:
            raise ScenarioError(f"{op.name}{tuple(op.args)} rejected at {replica}: {err}") from None
        result = self.instance.effect(message, state)
        if result is None:
            raise UndefinedEffect(message, state, "self-delivery of a prepared message")
        sent = Sent(len(self.sent), replica, stamp, message, op)
        self.sent.append(sent)
        self.states[replica] = result
        self.clocks[replica] = stamp
        self.delivered[replica].add(sent.index)
        return sent

    def can_deliver(self, replica, index: int) -> bool:
        sent = self.sent[index]
        return (index not in self.delivered[replica]
                and causal_deliverable(sent.timestamp, sent.sender, self.clocks[replica]))

    def deliver(self, replica, index: int) -> Sent:
        self._check_replica(replica)
        if not 0 <= index < len(self.sent):
            raise ScenarioError(f"message {index} has not been sent")
        if index in self.delivered[replica]:
            raise ScenarioError(f"message {index} already delivered to {replica}")
        sent = self.sent[index]
        if not causal_deliverable(sent.timestamp, sent.sender, self.clocks[replica]):
            raise NonCausalDelivery(
                f"message {index} {sent.timestamp!r} not deliverable at {replica} "
                f"{self.clocks[replica]!r}")
        result = self.instance.effect(sent.message, self.states[replica])
        if result is None:
            raise UndefinedEffect(sent.message, self.states[replica])
        self.states[replica] = result
        self.clocks[replica] = self.clocks[replica].merge(sent.timestamp)
        self.delivered[replica].add(index)
        return sent

    def pending(self, replica) -> list:
        return [s.index for s in self.sent if s.index not in self.delivered[replica]]

    def deliverable(self, replica) -> list:
        return [i for i in self.pending(replica) if self.can_deliver(replica, i)]

    def quiescent(self) -> bool:
        return all(len(self.delivered[r]) == len(self.sent) for r in self.replicas)

    def evals(self) -> dict:
        return {r: encode(self.instance.eval(s)) for r, s in self.states.items()}

    def history_sizes(self) -> dict:
        return {r: self.instance.history_size(s) for r, s in self.states.items()}

    def frontier(self) -> VectorClock:
        """Lower bound on the timestamp of anything any replica can still receive.

        Messages still in flight count too: a replica may yet receive one
        that is concurrent to entries every replica already knows.
        """
        bound = None
        clocks = list(self.clocks.values())
        clocks += [s.timestamp for s in self.sent
                   if any(s.index not in self.delivered[r] for r in self.replicas)]
        for clock in clocks:
            bound = clock if bound is None else bound.meet(clock)
        return bound if bound is not None else ZERO

    def prune(self) -> None:
        frontier = self.frontier()
        for r in self.replicas:
            self.states[r] = self.instance.prune(self.states[r], frontier)

    def snapshot(self, event: int, kind: str, replica, sent: Optional[Sent]) -> Step:
        return Step(
            event, kind, replica,
            None if sent is None else sent.index,
            None if sent is None else encode(sent.message),
            self.evals(), self.history_sizes(),
            {r: c.as_dict() for r, c in self.clocks.items()})


def resolve(name_or_instance) -> Crdt:
    if isinstance(name_or_instance, Crdt):
        return name_or_instance
    return registry.get(name_or_instance)


def run_scenario(scenario: Scenario, instance: Optional[Crdt] = None, prune: bool = False,
                 on_step: Optional[Callable] = None) -> Trace:
    """Execute every event in order and record one step per op or delivery.

    ``on_step(sim, step)`` is called after each recorded step. With
    ``prune`` set, stable history is discarded at every replica after each step.
    """
    instance = instance or registry.get(scenario.instance)
    sim = Simulation(instance, scenario.replicas, scenario.seed)
    trace = Trace(scenario.instance, scenario.seed, sim.evals())

    def record(i, kind, replica, sent):
        if prune:
            sim.prune()
        step = sim.snapshot(i, kind, replica, sent)
        trace.steps.append(step)
        if on_step is not None:
            on_step(sim, step)

    for i, event in enumerate(scenario.events):
        if isinstance(event, OpEvent):
            record(i, "op", event.replica, sim.local(event.replica, Op(event.op, tuple(event.args))))
        elif isinstance(event, DeliverEvent):
            record(i, "deliver", event.to, sim.deliver(event.to, event.msg))
        elif isinstance(event, DeliverAll):
            for replica, index in drain(sim):
                record(i, "deliver_all", replica, sim.deliver(replica, index))
        else:
            raise ScenarioError(f"unknown event {event!r}")
    return trace


def drain(sim: Simulation):
    """Yield (replica, message index) choices that deliver everything.

    Replicas are scanned in id order; each takes one deliverable message,
    chosen by the simulation's seeded generator. The caller delivers each
    choice before asking for the next.
    """
    while not sim.quiescent():
        progressed = False
        for replica in sim.replicas:
            candidates = sim.deliverable(replica)
            if candidates:
                progressed = True
                yield replica, sim.rng.choice(candidates)
        if not progressed:
            raise NonCausalDelivery("pending messages can never become deliverable")


def check_convergence(trace: Trace) -> bool:
    return len({canonical(v) for v in trace.final.values()}) <= 1


# -- random executions --------------------------------------------------------

def random_execution(instance, replicas=3, ops: int = 8, weights: Optional[dict] = None,
                     seed: int = 0, deliver_rate: float = 0.5) -> Scenario:
    """A seeded scenario of ``ops`` operations with random causal deliveries, ending in DeliverAll."""
    instance = resolve(instance)
    ids = [f"r{i}" for i in range(replicas)] if isinstance(replicas, int) else list(replicas)
    rng = random.Random(seed)
    sim = Simulation(instance, ids, seed)
    events: list = []
    issued = attempts = 0
    while issued < ops and attempts < ops * 20:
        attempts += 1
        choices = [(r, i) for r in sim.replicas for i in sim.deliverable(r)]
        if choices and rng.random() < deliver_rate:
            replica, index = rng.choice(choices)
            sim.deliver(replica, index)
            events.append(DeliverEvent(replica, index))
            continue
        replica = rng.choice(sim.replicas)
        op = instance.random_op(sim.states[replica], rng, weights)
        if op is None:
            continue
        sim.local(replica, op)
        events.append(OpEvent(replica, op.name, tuple(op.args)))
        issued += 1
    if ops:
        events.append(DeliverAll())
    return Scenario(instance.name, ids, events, seed)


def without_deliver_all(scenario: Scenario) -> Scenario:
    return Scenario(scenario.instance, scenario.replicas,
                    [e for e in scenario.events if not isinstance(e, DeliverAll)], scenario.seed)


# -- bounded-exhaustive delivery ---------------------------------------------

MAX_ENUMERATED = 8


def enumerate_deliveries(scenario: Scenario, instance: Optional[Crdt] = None,
                         bound: int = MAX_ENUMERATED) -> set:
    """Every final eval vector reachable by completing ``scenario`` causally.

    The scenario's explicit events run first (DeliverAll events are ignored);
    afterwards each replica receives its missing messages in every causal
    order. Replicas no longer interact then, so the vectors are the product
    of the per-replica outcome sets.
    """
    instance = instance or registry.get(scenario.instance)
    if scenario.op_count() > bound:
        raise BoundExceeded(f"{scenario.op_count()} messages exceeds the bound of {bound}")
    sim = Simulation(instance, scenario.replicas, scenario.seed)
    for event in scenario.events:
        if isinstance(event, OpEvent):
            sim.local(event.replica, Op(event.op, tuple(event.args)))
        elif isinstance(event, DeliverEvent):
            sim.deliver(event.to, event.msg)
    per_replica = [sorted(_outcomes(sim, r)) for r in sim.replicas]
    return {tuple(v) for v in itertools.product(*per_replica)}


def _outcomes(sim: Simulation, replica) -> set:
    instance = sim.instance
    results: set = set()
    seen: set = set()

    def visit(state, clock, delivered: frozenset):
        key = (delivered, canonical(state))
        if key in seen:
            return
        seen.add(key)
        waiting = [s for s in sim.sent if s.index not in delivered]
        if not waiting:
            results.add(canonical(instance.eval(state)))
            return
        for sent in waiting:
            if causal_deliverable(sent.timestamp, sent.sender, clock):
                nxt = instance.effect(sent.message, state)
                if nxt is None:
                    raise UndefinedEffect(sent.message, state)
                visit(nxt, clock.merge(sent.timestamp), delivered | {sent.index})

    visit(sim.states[replica], sim.clocks[replica], frozenset(sim.delivered[replica]))
    return results


# -- oracles and stability ------------------------------------------------------

@dataclass(frozen=True)
class LogEntry:
    kind: str  # "add" or "remove"
    element: Any
    timestamp: VectorClock


def polog_awset_oracle(history: Iterable[LogEntry]) -> frozenset:
    """Add-wins visible set: an add survives unless some remove of its element follows it."""
    history = list(history)
    return frozenset(
        m.element for m in history if m.kind == "add"
        and all(not (m.timestamp < r.timestamp)
                for r in history if r.kind == "remove" and r.element == m.element))


def polog_rwset_oracle(history: Iterable[LogEntry]) -> frozenset:
    """Remove-wins mirror: present iff added and every remove is followed by some add."""
    history = list(history)
    adds = [m for m in history if m.kind == "add"]
    return frozenset(
        a.element for a in adds
        if all(any(r.timestamp < b.timestamp for b in adds if b.element == a.element)
               for r in history if r.kind == "remove" and r.element == a.element))


# op names of flags and sets as add/remove entries of one element
FLAG_ELEMENT = "flag"
_LOG_KINDS = {
    "enable": "add", "disable": "remove", "add": "add", "remove": "remove",
}


def causal_history(sim: Simulation, replica) -> list:
    """The messages known at ``replica`` as a partially ordered log."""
    out = []
    for sent in sim.sent:
        if sent.index in sim.delivered[replica]:
            element = sent.op.args[0] if sent.op.args else FLAG_ELEMENT
            out.append(LogEntry(_LOG_KINDS[sent.op.name], element, sent.timestamp))
    return out


def stability_frontier(trace: Trace, step: int) -> VectorClock:
    """Entry-wise minimum of every replica's clock after ``step`` (-1: before any)."""
    if step < 0 or not trace.steps:
        return ZERO
    bound = None
    for clock in trace.steps[step].clocks.values():
        vc = VectorClock(clock)
        bound = vc if bound is None else bound.meet(vc)
    return bound if bound is not None else ZERO


# -- shrinking -----------------------------------------------------------------

def delete_event(scenario: Scenario, position: int) -> Scenario:
    """Remove one event; deleting an op also drops its deliveries and renumbers the rest."""
    event = scenario.events[position]
    events = list(scenario.events)
    del events[position]
    if isinstance(event, OpEvent):
        removed = sum(isinstance(e, OpEvent) for e in scenario.events[:position])
        renumbered = []
        for e in events:
            if isinstance(e, DeliverEvent):
                if e.msg == removed:
                    continue
                if e.msg > removed:
                    e = DeliverEvent(e.to, e.msg - 1)
            renumbered.append(e)
        events = renumbered
    return Scenario(scenario.instance, scenario.replicas, events, scenario.seed)


def shrink(scenario: Scenario, failing: Callable[[Scenario], bool]) -> Scenario:
    """Greedily delete events while ``failing`` still holds.

    DeliverAll events are kept so a shrunk run still ends quiescent;
    candidates that no longer run are skipped.
    """

    def still_fails(candidate):
        try:
            return failing(candidate)
        except CrdtError:
            return False

    current = scenario
    changed = True
    while changed:
        changed = False
        for position in range(len(current.events)):
            if isinstance(current.events[position], DeliverAll):
                continue
            candidate = delete_event(current, position)
            if still_fails(candidate):
                current = candidate
                changed = True
                break
    return current


def diverges(instance: Optional[Crdt] = None) -> Callable[[Scenario], bool]:
    return lambda scenario: not check_convergence(run_scenario(scenario, instance))


# -- bundled scenarios -----------------------------------------------------------

BUNDLED = ("addmult", "flag", "flag-naive", "minplus-anomaly", "slack")


def bundled_text(name: str) -> str:
    from importlib import resources
    return resources.files("semidirect").joinpath("scenarios").joinpath(f"{name}.json").read_text("utf-8")


def load_bundled(name: str) -> Scenario:
    return parse_scenario(bundled_text(name))
