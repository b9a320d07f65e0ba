import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from semidirect.core import Dot, Op, replay
from semidirect.crdts import UnknownInstance, get, is_control, names, register
from semidirect.crdts.basic import Counter
from semidirect.crdts.maps import ValueNotCommutative, map_homap_product
from semidirect.crdts.semiring import (
    ADD_MULT,
    MAX_MIN,
    MIN_MAX,
    MIN_PLUS,
    SemiringSpec,
    check_semiring_laws,
    semiring_product,
)
from semidirect.crdts.sequence import Sequence, midpoint
from semidirect.harness import DeliverAll, DeliverEvent, OpEvent, Scenario, check_convergence, run_scenario
from semidirect.product import LawViolation

ints = st.integers(-20, 20)


def run(instance, events, replicas=("A", "B")):
    trace = run_scenario(Scenario(instance, list(replicas), list(events)))
    assert check_convergence(trace)
    return trace.final


def op(replica, name, *args):
    return OpEvent(replica, name, args)


# -- semirings ---------------------------------------------------------------

@pytest.mark.parametrize("spec", [ADD_MULT, MIN_PLUS, MAX_MIN, MIN_MAX], ids=lambda s: s.name)
@given(a=ints, b=ints, c=ints)
def test_semiring_laws(spec, a, b, c):
    plus, times = spec.plus, spec.times
    assert plus(a, b) == plus(b, a)
    assert times(a, b) == times(b, a)
    assert plus(plus(a, b), c) == plus(a, plus(b, c))
    assert times(times(a, b), c) == times(a, times(b, c))
    assert times(a, plus(b, c)) == plus(times(a, b), times(a, c))


def test_law_violation():
    broken = SemiringSpec("plus-max", plus=lambda a, b: a + b, times=max, plus_name="add",
                          times_name="max", initial=0, sample=(0, 1, 2))
    assert check_semiring_laws(broken) is not None
    with pytest.raises(LawViolation):
        semiring_product(broken)


def test_minplus_concurrent():
    # A: add 1 (times), B: min 0 (plus) concurrently, from 0
    events = [op("A", "add", 1), op("B", "min", 0), DeliverAll()]
    assert run("minplus", events) == {"A": 1, "B": 1}


# -- map with homap -----------------------------------------------------------

def test_map_apply_and_homap():
    events = [op("A", "apply", "k", "add", "x"), DeliverAll(), op("B", "homap", "add", "y"), DeliverAll()]
    assert run("map-homap", events) == {"A": {"k": ["x", "y"]}, "B": {"k": ["x", "y"]}}


def test_homap_reaches_concurrently_created_key():
    events = [op("A", "apply", "new", "add", "x"), op("B", "homap", "add", "y"), DeliverAll()]
    assert run("map-homap", events)["A"] == {"new": ["x", "y"]}


def test_homap_misses_later_key():
    events = [op("B", "homap", "add", "y"), DeliverAll(), op("A", "apply", "k", "add", "x"), DeliverAll()]
    assert run("map-homap", events)["B"] == {"k": ["x"]}


def test_homap_backlog_after_key_exists():
    # B's second apply to k is issued after A's homap arrives at B, while C's
    # apply creating k is concurrent with the homap
    events = [
        op("A", "homap", "add", "h"),
        op("C", "apply", "k", "add", "c"),
        DeliverEvent("B", 0),
        op("B", "apply", "k", "add", "b"),
        DeliverAll(),
    ]
    final = run("map-homap", events, replicas=("A", "B", "C"))
    assert final["A"] == {"k": ["b", "c", "h"]}


def test_map_requires_commutative_values():
    with pytest.raises(ValueNotCommutative):
        map_homap_product(get("addmult"))
    assert get("map-homap:counter").name == "map-homap:counter"


def test_homap_naive_diverges():
    events = [op("A", "apply", "new", "add", "x"), op("B", "homap", "add", "y"), DeliverAll()]
    trace = run_scenario(Scenario("map-homap-naive", ["A", "B"], events))
    assert not check_convergence(trace)


# -- sequences ---------------------------------------------------------------

def test_midpoint():
    assert midpoint(Fraction(0), Fraction(1)) == Fraction(1, 2)
    assert midpoint(Fraction(1, 3), Fraction(1, 2)) == Fraction(5, 12)


def test_nested_inserts_match_list():
    seq = Sequence()
    state = seq.initial()
    reference = []
    rng = random.Random(7)
    for i in range(100):
        index = rng.choice([0, len(reference), rng.randint(0, len(reference))])
        message = seq.prepare(Op("insert", (index, i)), state, Dot("A", i + 1))
        state = seq.effect(message, state)
        reference.insert(index, i)
        assert list(seq.eval(state)) == reference
    # deep nesting at one spot keeps positions exact
    for i in range(100):
        state = seq.effect(seq.prepare(Op("insert", (1, "n")), state, Dot("B", i + 1)), state)
    assert len(seq.eval(state)) == 200


def test_sequence_remove():
    events = [op("A", "insert", 0, "a"), op("A", "insert", 1, "b"), DeliverAll(),
              op("B", "remove", 0), op("A", "insert", 1, "c"), DeliverAll()]
    assert run("seq", events)["A"] == ["c", "b"]


def test_reverse_involution():
    events = [op("A", "insert", 0, "a"), op("A", "insert", 1, "b"), op("A", "reverse"),
              op("A", "reverse"), DeliverAll()]
    assert run("seq-reverse", events)["B"] == ["a", "b"]


def test_reverse_with_concurrent_insert():
    # derived: the insert is arbitrated first, then the whole list flips
    events = [op("A", "insert", 0, "a"), op("A", "insert", 1, "b"), op("A", "insert", 2, "c"),
              DeliverAll(), op("A", "reverse"), op("B", "insert", 3, "d"), DeliverAll()]
    assert run("seq-reverse", events)["A"] == ["d", "c", "b", "a"]


def test_range_remove_swallows_concurrent_insert():
    base = [op("A", "insert", 0, "a"), op("A", "insert", 1, "b"), op("A", "insert", 2, "c"),
            DeliverAll(), op("A", "rremove", 0, 2)]
    inside = base + [op("B", "insert", 1, "x"), DeliverAll()]
    outside = base + [op("B", "insert", 3, "y"), DeliverAll()]
    assert run("seq-rremove", inside)["A"] == []
    assert run("seq-rremove", outside)["B"] == ["y"]


# -- flags and sets ---------------------------------------------------------

def test_enable_wins():
    events = [op("A", "enable"), DeliverAll(), op("A", "disable"), op("B", "enable"), DeliverAll()]
    assert run("ew-flag", events) == {"A": "enabled", "B": "enabled"}
    events = [op("A", "enable"), DeliverAll(), op("A", "disable"), DeliverAll()]
    assert run("ew-flag", events)["B"] == "disabled"


def test_disable_wins():
    assert run("dw-flag", [])["A"] == "disabled"
    events = [op("A", "enable"), DeliverAll()]
    assert run("dw-flag", events)["B"] == "enabled"
    events = [op("A", "enable"), DeliverAll(), op("A", "disable"), op("B", "enable"), DeliverAll()]
    assert run("dw-flag", events) == {"A": "disabled", "B": "disabled"}


def test_add_wins_set():
    events = [op("A", "add", "x"), op("A", "add", "y"), DeliverAll(),
              op("A", "remove", "x"), op("B", "add", "x"), op("B", "remove", "y"), DeliverAll()]
    assert run("aw-set", events)["A"] == ["x"]


def test_remove_wins_set():
    events = [op("A", "add", "x"), op("A", "add", "y"), DeliverAll(),
              op("A", "remove", "x"), op("B", "add", "x"), DeliverAll()]
    assert run("rw-set", events)["A"] == ["y"]
    events += [op("B", "add", "x"), DeliverAll()]
    assert run("rw-set", events)["A"] == ["x", "y"]


@pytest.mark.parametrize("plain, compact", [("ew-flag", "ew-flag-compact"), ("aw-set", "aw-set-compact")])
def test_compact_variants_match(plain, compact):
    from semidirect.harness import random_execution
    for seed in range(30):
        scenario = random_execution(plain, 3, 8, seed=seed)
        a = run_scenario(scenario)
        b = run_scenario(scenario, get(compact))
        assert [s.evals for s in a.steps] == [s.evals for s in b.steps]


# -- resets ----------------------------------------------------------------------

def test_reset_wins_concurrent_add():
    events = [op("A", "add", 5), op("B", "reset"), DeliverAll()]
    assert run("reset-wins:counter", events) == {"A": 0, "B": 0}


def test_observed_reset_concurrent_add():
    events = [op("A", "add", 5), op("B", "reset"), DeliverAll()]
    assert run("obs-reset:counter", events) == {"A": 5, "B": 5}
    assert run_scenario(Scenario("obs-reset-compact:counter", ["A", "B"], events)).final == {"A": 5, "B": 5}


def test_observed_reset_keeps_unseen():
    events = [op("A", "add", 2), DeliverAll(), op("B", "reset"), op("A", "add", 3), DeliverAll()]
    assert run("obs-reset:counter", events)["B"] == 3
    assert run("reset-wins:counter", events)["B"] == 0


def test_observed_reset_of_set():
    events = [op("A", "add", "x"), DeliverAll(), op("B", "reset"), op("A", "add", "y"), DeliverAll()]
    assert run("obs-reset:gset", events)["A"] == ["y"]


# -- registry -------------------------------------------------------------------

def test_registry():
    listed = names()
    assert len(listed) >= 13
    assert "ew-flag-naive" not in listed and "ew-flag-naive" in names(include_controls=True)
    assert is_control("map-homap-naive") and not is_control("aw-set")
    for name in names(include_controls=True):
        assert get(name).name == name
    with pytest.raises(UnknownInstance):
        get("nope")
    with pytest.raises(UnknownInstance):
        get("obs-reset:addmult")


def test_register_custom():
    register("tally", Counter)
    try:
        assert get("tally").eval(replay(get("tally"), [get("tally").prepare(Op("add", (2,)), 0, Dot("A", 1))])) == 2
    finally:
        from semidirect.crdts import registry
        registry._FACTORIES.pop("tally")
