import itertools

import pytest
from hypothesis import given, strategies as st

from semidirect.core import Dot, Op, VectorClock
from semidirect.crdts import get
from semidirect.crdts.semiring import ADD_MULT, Plus, Times, semiring_product
from semidirect.product import (
    CompressedProduct,
    DivisionUndefined,
    SemidirectState,
    TaggedMessage,
    check_action_commutes,
    check_preserves_authors,
    check_reordering,
    comp_effect,
    comp_prepare,
    compute_m_act,
    prune_stable,
    sp_effect,
    sp_eval,
    sp_prepare,
)

VC = VectorClock


@pytest.fixture
def addmult():
    return semiring_product(ADD_MULT)


def tagged(payload, clock, author, component):
    return TaggedMessage(payload, VC(clock), author, component)


def test_prepare_stamps_and_tags(addmult):
    state = addmult.initial()
    m = sp_prepare(addmult, Op("mult", (2,)), state, "A")
    assert m == tagged(Times(2), {"A": 1}, "A", 2)
    m = sp_prepare(addmult, Op("add", (4,)), state, "B")
    assert m.component == 1 and m.timestamp == VC({"B": 1})


def test_compute_m_act_only_concurrent(addmult):
    history = {
        ("A", 1): tagged(Times(5), {"A": 1}, "A", 2),  # causally before the add
        ("B", 1): tagged(Times(2), {"B": 1}, "B", 2),
        ("C", 1): tagged(Times(4), {"C": 1}, "C", 2),
    }
    acted = compute_m_act(addmult.act, Plus(1), VC({"A": 2}), history)
    assert acted == Plus(8)
    assert compute_m_act(addmult.act, Plus(3), VC({"A": 1, "B": 1, "C": 1, "D": 1}), history) == Plus(3)


def test_effect_second_records_history(addmult):
    state = sp_effect(addmult, tagged(Times(3), {"B": 1}, "B", 2), addmult.initial())
    assert state.inner == 3
    assert list(state.history) == [("B", 1)]
    state = sp_effect(addmult, tagged(Plus(2), {"A": 1}, "A", 1), state)
    # add 2 concurrent with mult 3 arrives as add 6
    assert sp_eval(addmult, state) == 9
    assert state.clock == VC({"A": 1, "B": 1})


def test_effect_undefined_raises():
    product = get("obs-reset:counter")
    with pytest.raises(Exception):
        sp_effect(product, "garbage", product.initial())


def test_prune_stable(addmult):
    entry = tagged(Times(3), {"B": 1}, "B", 2)
    later = tagged(Times(2), {"B": 2, "A": 1}, "B", 2)
    state = SemidirectState(6, VC({"A": 1, "B": 2}), {("B", 1): entry, ("B", 2): later})
    pruned = prune_stable(state, VC({"A": 0, "B": 1}))
    assert list(pruned.history) == [("B", 2)]
    assert pruned.inner == state.inner and pruned.clock == state.clock
    assert prune_stable(state, VC()) is state
    assert prune_stable(state, VC({"A": 1, "B": 2})).history == {}


def test_checkers(addmult):
    assert check_reordering(addmult, 1, Plus(2), Times(3))
    assert check_action_commutes(addmult, Plus(2), Times(3), Times(5))
    assert check_preserves_authors(addmult, Plus(2), "A", Times(3))


def test_identity_action_still_reorders():
    # the naive flag is algebraically fine; its fault is the outcome it picks
    naive = get("ew-flag-naive")
    flag = get("ew-flag")
    s = naive.initial().inner
    d = naive.first.prepare(Op("disable"), s, Dot("A", 1))
    e = naive.second.prepare(Op("enable"), s, Dot("B", 1))
    assert check_reordering(naive, s, d, e)
    d = flag.first.prepare(Op("disable"), flag.initial().inner, Dot("A", 1))
    e = flag.second.prepare(Op("enable"), flag.initial().inner, Dot("B", 1))
    assert check_reordering(flag, flag.initial().inner, d, e)


def test_compressed_addmult():
    comp = CompressedProduct(semiring_product(ADD_MULT))
    a = comp.initial()
    b = comp.initial()
    ma = comp_prepare(comp, Op("mult", (2,)), a, "A")
    a = comp_effect(comp, ma, a)
    mb = comp_prepare(comp, Op("add", (4,)), b, "B")
    b = comp_effect(comp, mb, b)
    assert mb.attached == Times(1)
    b = comp_effect(comp, ma, b)
    a = comp_effect(comp, mb, a)
    assert comp.eval(a) == comp.eval(b) == 10
    assert a.composed == b.composed == Times(2)


def test_compressed_division_undefined():
    comp = CompressedProduct(semiring_product(ADD_MULT))
    state = comp.initial()
    message = comp_prepare(comp, Op("add", (1,)), comp_effect(comp, comp_prepare(
        comp, Op("mult", (3,)), state, "A"), state), "A")
    # delivering without its causal predecessor leaves nothing to divide by
    with pytest.raises(DivisionUndefined):
        comp_effect(comp, message, state)


def test_compressed_needs_monoid():
    with pytest.raises(ValueError):
        CompressedProduct(get("aw-set"))


@pytest.mark.parametrize("name", ["addmult", "minplus", "seq-reverse"])
def test_monoid_divide_is_left_inverse(name):
    monoid = get(name).monoid
    product = get(name)
    rng_messages = []
    import random
    rng = random.Random(3)
    for i in range(20):
        args = CompressedProduct(product).gen_args(product.second.op_names[0], product.initial(), rng)
        rng_messages.append(product.second.prepare(Op(product.second.op_names[0], tuple(args)),
                                                   product.initial().inner, Dot("A", i + 1)))
    for x, y in itertools.product(rng_messages, repeat=2):
        assert monoid.divide(monoid.compose(y, x), y) == x
        assert monoid.compose(x, y) == monoid.compose(y, x)


@given(st.lists(st.sampled_from([1, -1, 2, 3, -2, 5]), max_size=6))
def test_addmult_divide_law(factors):
    monoid = semiring_product(ADD_MULT).monoid
    total = monoid.identity
    for f in factors:
        total = monoid.compose(Times(f), total)
    for f in factors:
        assert monoid.compose(Times(f), monoid.divide(total, Times(f))) == total


@given(st.permutations([("B", 3), ("C", 2), ("D", 5)]))
def test_history_order_irrelevant(order):
    product = semiring_product(ADD_MULT)
    history = {(r, 1): tagged(Times(v), {r: 1}, r, 2) for r, v in order}
    assert compute_m_act(product.act, Plus(1), VC({"A": 1}), history) == Plus(30)


def test_duplicate_delivery_rejected(addmult):
    m = tagged(Times(3), {"B": 1}, "B", 2)
    state = sp_effect(addmult, m, addmult.initial())
    with pytest.raises(Exception):
        sp_effect(addmult, m, state)

