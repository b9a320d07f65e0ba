import pytest

from semidirect.core import Dot
from semidirect.crdts import get
from semidirect.crdts.flags import Keep, Token
from semidirect.crdts.semiring import ADD_MULT, MIN_PLUS, Plus, PlusRegister, Times, TimesRegister, semiring_product
from semidirect.harness import random_execution, run_scenario
from semidirect.otcheck import (
    ShapeViolation,
    check_tp1,
    check_tp2,
    ot_from_product,
    product_from_ot,
    round_trip,
    sample_messages,
    tf1,
)


@pytest.fixture
def addmult():
    return semiring_product(ADD_MULT)


def test_tf1_shape(addmult):
    assert tf1(addmult, Plus(4), Times(2)) == Plus(8)
    assert tf1(addmult, Times(2), Plus(4)) == Times(2)
    assert tf1(addmult, Plus(4), Plus(7)) == Plus(4)
    assert tf1(addmult, Times(3), Plus(2)) == Times(3)
    assert tf1(addmult, Plus(2), Plus(5)) == Plus(2)
    assert tf1(addmult, Times(2), Times(5)) == Times(2)


def test_tp1_examples(addmult):
    # both sides are 6: (1 + 1) * 3 and 1 * 3 + 3
    assert addmult.apply_payload(Times(3), addmult.apply_payload(Plus(1), 1)) == 6
    assert check_tp1(addmult, 1, Plus(1), Times(3))
    assert check_tp1(addmult, 1, Times(3), Plus(2))
    assert check_tp1(addmult, 1, Plus(4), Plus(2))
    assert check_tp1(semiring_product(MIN_PLUS), 0, Times(1), Plus(0))


def test_tp1_fails_for_wrong_transform():
    naive = get("ew-flag")
    naive.act = lambda m2, m1: m1  # no transform at all
    t = Token(Dot("B", 1))
    assert not check_tp1(naive, frozenset(), t, Keep())
    assert check_tp1(get("ew-flag"), frozenset(), t, Keep())


def test_tp2_examples(addmult):
    assert check_tp2(addmult, Times(2), Times(3), Plus(1))
    assert check_tp2(addmult, Plus(1), Times(3), Plus(4))
    flag = get("ew-flag")
    assert check_tp2(flag, Token(Dot("A", 1)), Token(Dot("B", 1)), Keep())


def test_ot_from_product(addmult):
    ot = ot_from_product(addmult)
    assert ot.first is addmult.first
    assert ot.tf1(Plus(1), Times(7)) == Plus(7)


def test_product_from_ot_rejects_bad_shape():
    first, second = PlusRegister(ADD_MULT), TimesRegister(ADD_MULT)

    def tf(m, l):
        if isinstance(m, Times):
            return Times(m.value + 1)  # changes a second-component message
        return m

    with pytest.raises(ShapeViolation):
        product_from_ot(first, second, tf)


def test_sample_messages():
    first, second = PlusRegister(ADD_MULT), TimesRegister(ADD_MULT)
    samples = sample_messages(first, second, count=5)
    assert sum(isinstance(m, Plus) for m in samples) == 5
    assert sum(isinstance(m, Times) for m in samples) == 5


@pytest.mark.parametrize("name", ["addmult", "aw-set", "map-homap", "seq-rremove"])
def test_round_trip_trace_identical(name):
    product = get(name)
    rebuilt = round_trip(product)
    for seed in range(10):
        scenario = random_execution(product, 3, 10, seed=seed)
        assert run_scenario(scenario, product).dumps() == run_scenario(scenario, rebuilt).dumps()
