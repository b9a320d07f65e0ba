"""Acceptance criteria, one marker per criterion.

The terminal summary prints a PASS/FAIL line for each criterion number.
"""

import pytest

from semidirect.crdts import get, names
from semidirect.harness import check_convergence, load_bundled, run_scenario
from semidirect.product import CompressedProduct, SemidirectProduct
from semidirect.suites import (
    assumptions_suite,
    compressed_suite,
    convergence_suite,
    exhaustive_suite,
    oracle_suite,
    prune_suite,
    tp_suite,
)

INSTANCES = names()
PRODUCTS = [n for n in INSTANCES if isinstance(get(n), SemidirectProduct)]


def _assert_suite(result):
    assert result.passed, result.summary()


def _per_replica(trace, replica):
    """Eval of ``replica`` after each step that touched it, initial first."""
    seen = [trace.initial[replica]]
    for step in trace.steps:
        if step.replica == replica:
            seen.append(step.evals[replica])
    return seen


@pytest.mark.criterion(1, "add/mult scenario reaches 17 through the expected states")
def test_c1_addmult():
    trace = run_scenario(load_bundled("addmult"))
    assert trace.final == {"A": 17, "B": 17}
    assert _per_replica(trace, "A") == [1, 2, 3, 9, 17]
    assert _per_replica(trace, "B") == [1, 3, 7, 14, 17]


@pytest.mark.criterion(2, "flag scenario ends disabled; identity action gives enabled")
def test_c2_flag():
    assert run_scenario(load_bundled("flag")).final == {"A": "disabled", "B": "disabled"}
    naive = run_scenario(load_bundled("flag-naive"))
    assert naive.final == {"A": "enabled", "B": "enabled"}


@pytest.mark.criterion(3, "min-plus anomaly is 1 under plain and compressed products")
def test_c3_minplus():
    scenario = load_bundled("minplus-anomaly")
    assert run_scenario(scenario).final == {"A": 1, "B": 1}
    compressed = CompressedProduct(get("minplus"))
    assert run_scenario(scenario, compressed).final == {"A": 1, "B": 1}


def _slack_reference():
    # sequentialized: every apply concurrent with the homap goes first
    channels: dict = {}
    for key, user in [("general", "alice"), ("general", "bob"), ("random", "alice"),
                      ("random", "charlie"), ("memes", "alice")]:
        channels.setdefault(key, set()).add(user)
    for members in channels.values():
        members.add("dave")
    return {k: sorted(v) for k, v in channels.items()}


@pytest.mark.criterion(4, "slack scenario: dave in every channel, memes = {alice, dave}")
def test_c4_slack():
    trace = run_scenario(load_bundled("slack"))
    expected = _slack_reference()
    assert expected["memes"] == ["alice", "dave"]
    for replica in ("A", "B"):
        assert trace.final[replica] == expected
        assert all("dave" in members for members in trace.final[replica].values())


@pytest.mark.criterion(5, "200 random executions converge; bounded enumeration is singleton")
def test_c5_instance_count():
    assert len(INSTANCES) >= 13


@pytest.mark.criterion(5, "200 random executions converge; bounded enumeration is singleton")
@pytest.mark.parametrize("name", INSTANCES)
def test_c5_convergence(name):
    _assert_suite(convergence_suite(name, runs=200))
    _assert_suite(exhaustive_suite(name, schedules=12, messages=6))


@pytest.mark.criterion(6, "reordering, action-commutes, preserves-authors on 500 cases")
@pytest.mark.parametrize("name", PRODUCTS)
def test_c6_assumptions(name):
    result = assumptions_suite(name, cases=500)
    _assert_suite(result)
    for check in ("reordering", "action-commutes", "preserves-authors"):
        assert next(c for c in result.checks if c.name == check).cases >= 500


@pytest.mark.criterion(7, "TP1/TP2 on 500 cases; OT round-trip identical on 50 scenarios")
@pytest.mark.parametrize("name", PRODUCTS)
def test_c7_transformation(name):
    result = tp_suite(name, cases=500, scenarios=50)
    _assert_suite(result)
    counts = {c.name: c.cases for c in result.checks}
    assert counts["tp1"] >= 500 and counts["tp2"] >= 500 and counts["round-trip"] >= 50


@pytest.mark.criterion(8, "aw-set and ew-flag equal the log oracle at every step")
@pytest.mark.parametrize("name", ["aw-set", "ew-flag"])
def test_c8_oracle(name):
    _assert_suite(oracle_suite(name, runs=100))


@pytest.mark.criterion(9, "pruning never changes evals; stabilized history is empty")
@pytest.mark.parametrize("name", PRODUCTS)
def test_c9_prune(name):
    _assert_suite(prune_suite(name, runs=100))


@pytest.mark.criterion(10, "compressed and plain products agree; history is one message")
@pytest.mark.parametrize("name", ["addmult", "minplus", "seq-reverse"])
def test_c10_compressed(name):
    bundled = [load_bundled("minplus-anomaly")] if name == "minplus" else None
    _assert_suite(compressed_suite(name, runs=100, bundled=bundled))


@pytest.mark.criterion(10, "compressed and plain products agree; history is one message")
def test_c10_addmult_bundled():
    compressed = CompressedProduct(get("addmult"))
    trace = run_scenario(load_bundled("addmult"), compressed)
    assert trace.final == {"A": 17, "B": 17} and check_convergence(trace)
