"""Check suites run over seeded random executions.

Cases are harvested from real runs: at a replica's current state, the
messages it has not yet received are the ones that could still arrive, and
first-component messages are taken in the transformed form the replica
would apply now. Pairs and triples are restricted to mutually concurrent
messages, so they always have distinct authors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .core import CrdtError, Crdt, check_commute
from .encoding import canonical
from .harness import (
    Scenario,
    Simulation,
    causal_history,
    check_convergence,
    enumerate_deliveries,
    polog_awset_oracle,
    polog_rwset_oracle,
    random_execution,
    resolve,
    run_scenario,
    without_deliver_all,
)
from .otcheck import check_tp1, check_tp2, round_trip
from .product import (
    CompressedProduct,
    SemidirectProduct,
    UndefinedAction,
    check_action_commutes,
    check_preserves_authors,
    check_reordering,
    compute_m_act,
    fold_action,
)


class SuiteNotApplicable(CrdtError):
    pass


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    minimum: int = 1  # cases required for a pass

    def record(self, ok: bool, detail: Any = None) -> None:
        self.cases += 1
        if not ok and len(self.failures) < 5:
            self.failures.append(detail)
        elif not ok:
            self.failures.append(None)

    @property
    def passed(self) -> bool:
        return not self.failures and self.cases >= self.minimum

    def summary(self) -> dict:
        return {"check": self.name, "cases": self.cases, "failures": len(self.failures),
                "passed": self.passed}


@dataclass
class SuiteResult:
    suite: str
    instance: str
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def check(self, name: str, minimum: int = 1) -> CheckResult:
        result = CheckResult(name, minimum=minimum)
        self.checks.append(result)
        return result

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> dict:
        return {"suite": self.suite, "instance": self.instance, "passed": self.passed,
                "checks": [c.summary() for c in self.checks], **self.info}


def executions(instance, runs: int, seed: int = 0, ops: int = 10, replicas: int = 3):
    for i in range(runs):
        yield random_execution(instance, replicas, ops, seed=seed * 100_003 + i)


# -- harvesting ---------------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    payload: Any  # component message as it would be applied at the observing replica
    component: int
    author: str
    tagged: Any  # the broadcast message
    ready: bool  # causally deliverable right now


def concurrent(*cands: Candidate) -> bool:
    return all(a.tagged.timestamp.concurrent(b.tagged.timestamp)
               for a, b in itertools.combinations(cands, 2))


def observe(product: SemidirectProduct, sim: Simulation, replica):
    """The state at ``replica`` and the candidates still to arrive there."""
    state = sim.states[replica]
    out = []
    for index in sim.pending(replica):
        tagged = sim.sent[index].message
        payload = tagged.payload
        if tagged.component == 1:
            payload = compute_m_act(product.act, payload, tagged.timestamp, state.history)
        out.append(Candidate(payload, tagged.component, tagged.author, tagged,
                             sim.can_deliver(replica, index)))
    return state, out


def harvest(product: SemidirectProduct, visit: Callable, runs: int, seed: int,
            enough: Callable[[], bool], ops: int = 10, visit_pool: Optional[Callable] = None) -> int:
    """Walk random runs until ``enough()``.

    After every step, ``visit(sim, replica, state, candidates)`` sees each
    replica and ``visit_pool(pool, seen)`` sees every message version in the
    run, with ``seen`` a fresh set per run for deduplication.
    """
    used = 0
    for scenario in executions(product, runs, seed, ops):
        used += 1
        seen: set = set()

        def on_step(sim, step):
            for replica in sim.replicas:
                state, cands = observe(product, sim, replica)
                if cands:
                    visit(sim, replica, state, cands)
            if visit_pool is not None:
                visit_pool(message_pool(product, sim), seen)

        run_scenario(scenario, product, on_step=on_step)
        if enough():
            break
    return used


def message_pool(product: SemidirectProduct, sim: Simulation) -> list:
    """Every message sent so far, raw and as transformed at each replica still waiting for it."""
    out = {}
    for sent in sim.sent:
        tagged = sent.message
        out[(tagged.key, canonical(tagged.payload))] = Candidate(
            tagged.payload, tagged.component, tagged.author, tagged, False)
    for replica in sim.replicas:
        for cand in observe(product, sim, replica)[1]:
            out.setdefault((cand.tagged.key, canonical(cand.payload)), cand)
    return list(out.values())


def _key(*cands: Candidate) -> tuple:
    return tuple((c.tagged.key, canonical(c.payload)) for c in cands)


def _split(cands):
    ones = [c for c in cands if c.component == 1]
    twos = [c for c in cands if c.component == 2]
    return ones, twos


def _require_product(instance, suite: str) -> SemidirectProduct:
    if not isinstance(instance, SemidirectProduct):
        raise SuiteNotApplicable(f"{suite} needs a semidirect product; {instance.name} is not one")
    return instance


# -- suites ---------------------------------------------------------------------

def assumptions_suite(instance, cases: int = 500, seed: int = 0, max_runs: int = 600) -> SuiteResult:
    """The three action assumptions, component (iib), product commutation, fold order."""
    product = _require_product(resolve(instance), "assumptions")
    result = SuiteResult("assumptions", product.name)
    reorder = result.check("reordering", cases)
    commutes = result.check("action-commutes", cases)
    authors = result.check("preserves-authors", cases)
    comp1 = result.check("commute-first")
    comp2 = result.check("commute-second")
    pair = result.check("commute-product")
    perms = result.check("fold-order")
    checks = (reorder, commutes, authors, comp1, comp2, pair, perms)

    def visit(sim, replica, state, cands):
        inner = state.inner
        ones, twos = _split(cands)
        for m1 in ones:
            for m2 in twos:
                if not concurrent(m1, m2):
                    continue
                if reorder.cases < cases and m1.ready and m2.ready:
                    if (product.first.effect(m1.payload, inner) is not None
                            and product.second.effect(m2.payload, inner) is not None):
                        reorder.record(check_reordering(product, inner, m1.payload, m2.payload),
                                       (inner, m1.payload, m2.payload))
                if authors.cases < cases:
                    authors.record(check_preserves_authors(product, m1.payload, m1.author,
                                                           m2.payload), (m1.payload, m2.payload))
        ready = [c for c in cands if c.ready]
        for a, b in itertools.combinations(ready, 2):
            if not concurrent(a, b):
                continue
            if a.component == b.component and a.component == 1:
                comp1.record(check_commute(product.first, inner, a.payload, b.payload),
                             (inner, a.payload, b.payload))
            elif a.component == b.component:
                comp2.record(check_commute(product.second, inner, a.payload, b.payload),
                             (inner, a.payload, b.payload))
            if pair.cases < cases:
                ab = product.effect(b.tagged, product.effect(a.tagged, state))
                ba = product.effect(a.tagged, product.effect(b.tagged, state))
                pair.record(ab is not None and ab == ba, (a.tagged, b.tagged))
        for m1 in ones:
            if m1.ready and perms.cases < cases:
                _fold_orders(product, state, m1.tagged, perms)

    def visit_pool(pool, seen):
        ones, twos = _split(pool)
        for m1 in ones:
            for m2, m2b in itertools.combinations(twos, 2):
                key = _key(m1, m2, m2b)
                if commutes.cases >= cases or key in seen or not concurrent(m1, m2, m2b):
                    continue
                seen.add(key)
                commutes.record(check_action_commutes(product, m1.payload, m2.payload, m2b.payload),
                                (m1.payload, m2.payload, m2b.payload))

    def enough():
        return all(c.cases >= cases for c in (reorder, commutes, authors))

    result.info["runs"] = harvest(product, visit, max_runs, seed, enough, visit_pool=visit_pool)
    for c in checks[3:]:
        c.minimum = 0
    return result


def linear_extensions(entries):
    """Every ordering of ``entries`` that respects their causal order."""
    for order in itertools.permutations(entries):
        if all(not (later.timestamp < earlier.timestamp)
               for i, earlier in enumerate(order) for later in order[i + 1:]):
            yield order


def _fold_orders(product, state, tagged, check: CheckResult, limit: int = 4) -> None:
    entries = [e for e in state.history.values() if e.timestamp.concurrent(tagged.timestamp)]
    if not 2 <= len(entries) <= limit:
        return
    outcomes = set()
    try:
        for order in linear_extensions(entries):
            outcomes.add(canonical(fold_action(product.act, tagged.payload, order)))
    except UndefinedAction as err:
        check.record(False, str(err))
        return
    check.record(len(outcomes) == 1, (tagged, sorted(outcomes)))


def commute_suite(instance, runs: int = 100, seed: int = 0) -> SuiteResult:
    """Property (i) on every issued op and (iib) on concurrent deliverable pairs."""
    instance = resolve(instance)
    result = SuiteResult("commute", instance.name)
    prepared = result.check("prepare-defined")
    commute = result.check("commute", 0)
    for scenario in executions(instance, runs, seed):
        def on_step(sim, step):
            if step.kind == "op":
                # Simulation.local raises if the self-effect is undefined
                prepared.record(True)
            for replica in sim.replicas:
                ready = [sim.sent[i] for i in sim.deliverable(replica)]
                for a, b in itertools.combinations(ready, 2):
                    if a.timestamp.concurrent(b.timestamp):
                        commute.record(
                            _full_commute(instance, sim.states[replica], a.message, b.message),
                            (a.message, b.message))
        try:
            run_scenario(scenario, instance, on_step=on_step)
        except CrdtError as err:
            prepared.record(False, str(err))
    return result


def _full_commute(instance: Crdt, state, m1, m2) -> bool:
    s1 = instance.effect(m1, state)
    s2 = instance.effect(m2, state)
    if s1 is None or s2 is None:
        return False
    left = instance.effect(m2, s1)
    return left is not None and left == instance.effect(m1, s2)


def tp_suite(instance, cases: int = 500, scenarios: int = 50, seed: int = 0,
             max_runs: int = 600) -> SuiteResult:
    product = _require_product(resolve(instance), "tp")
    result = SuiteResult("tp", product.name)
    tp1 = result.check("tp1", cases)
    tp2 = result.check("tp2", cases)

    def visit(sim, replica, state, cands):
        ready = [c for c in cands if c.ready]
        for l, m in itertools.combinations(ready, 2):
            if tp1.cases < cases and concurrent(l, m):
                ok = check_tp1(product, state.inner, l.payload, m.payload)
                tp1.record(ok, (state.inner, l.payload, m.payload))

    def visit_pool(pool, seen):
        for k, l, m in itertools.permutations(pool, 3):
            if tp2.cases >= cases:
                return
            key = _key(k, l, m)
            if key in seen or not concurrent(k, l, m):
                continue
            seen.add(key)
            tp2.record(check_tp2(product, k.payload, l.payload, m.payload),
                       (k.payload, l.payload, m.payload))

    result.info["runs"] = harvest(product, visit, max_runs, seed,
                                  lambda: tp1.cases >= cases and tp2.cases >= cases,
                                  visit_pool=visit_pool)
    trip = result.check("round-trip", scenarios)
    rebuilt = round_trip(product)
    for scenario in executions(product, scenarios, seed):
        same = run_scenario(scenario, product).dumps() == run_scenario(scenario, rebuilt).dumps()
        trip.record(same, scenario.dumps())
    return result


ORACLES = {
    "aw-set": (polog_awset_oracle, False),
    "aw-set-compact": (polog_awset_oracle, False),
    "ew-flag": (polog_awset_oracle, True),
    "ew-flag-compact": (polog_awset_oracle, True),
    "rw-set": (polog_rwset_oracle, False),
    "dw-flag": (polog_rwset_oracle, True),
}


def oracle_view(name: str, history) -> Any:
    oracle, flag = ORACLES[name]
    visible = oracle(history)
    if flag:
        return "enabled" if visible else "disabled"
    return visible


def oracle_suite(instance, runs: int = 100, seed: int = 0) -> SuiteResult:
    """Compare every replica's value with the partially ordered log oracle at every step."""
    instance = resolve(instance)
    if instance.name not in ORACLES:
        raise SuiteNotApplicable(f"no log oracle for {instance.name}")
    result = SuiteResult("oracle", instance.name)
    check = result.check("polog", runs)
    for scenario in executions(instance, runs, seed):
        mismatches = []

        def on_step(sim, step):
            for replica in sim.replicas:
                expected = oracle_view(instance.name, causal_history(sim, replica))
                actual = instance.eval(sim.states[replica])
                if canonical(expected) != canonical(actual):
                    mismatches.append((step.event, replica, expected, actual))

        run_scenario(scenario, instance, on_step=on_step)
        check.record(not mismatches, (scenario.dumps(), mismatches[:1]))
    return result


def prune_suite(instance, runs: int = 100, seed: int = 0) -> SuiteResult:
    product = _require_product(resolve(instance), "prune")
    result = SuiteResult("prune", product.name)
    same = result.check("evals-unchanged", runs)
    empty = result.check("history-emptied", runs)
    for scenario in executions(product, runs, seed):
        plain = run_scenario(scenario, product)
        pruned = run_scenario(scenario, product, prune=True)
        same.record([s.evals for s in plain.steps] == [s.evals for s in pruned.steps],
                    scenario.dumps())
        final = pruned.steps[-1].history if pruned.steps else {}
        empty.record(all(size == 0 for size in final.values()), scenario.dumps())
    return result


def compressed_suite(instance, runs: int = 100, seed: int = 0,
                     bundled: Optional[list] = None) -> SuiteResult:
    product = _require_product(resolve(instance), "compressed")
    if product.monoid is None:
        raise SuiteNotApplicable(f"{product.name} has no compressible monoid")
    compressed = CompressedProduct(product)
    result = SuiteResult("compressed", product.name)
    agree = result.check("evals-agree", runs)
    single = result.check("single-composed", runs)
    second = product.second

    def composed_ok(sim, step):
        if not all(second.owns(s.composed) for s in sim.states.values()):
            flags.append(step.event)

    for scenario in executions(compressed, runs, seed):
        scenario = Scenario(product.name, scenario.replicas, scenario.events, scenario.seed)
        flags: list = []
        plain = run_scenario(scenario, product)
        comp = run_scenario(scenario, compressed, on_step=composed_ok)
        agree.record([s.evals for s in plain.steps] == [s.evals for s in comp.steps],
                     scenario.dumps())
        single.record(not flags, scenario.dumps())
    for scenario in bundled or []:
        flags = []
        plain = run_scenario(scenario, product)
        comp = run_scenario(scenario, compressed, on_step=composed_ok)
        check = result.check(f"bundled-{scenario.instance}")
        check.record(plain.final == comp.final and not flags, scenario.dumps())
        result.info.setdefault("bundled", []).append(comp.final)
    return result


def convergence_suite(instance, runs: int = 200, seed: int = 0, ops: int = 10,
                      replicas: int = 3) -> SuiteResult:
    instance = resolve(instance)
    result = SuiteResult("convergence", instance.name)
    check = result.check("converged", runs)
    for scenario in executions(instance, runs, seed, ops, replicas):
        check.record(check_convergence(run_scenario(scenario, instance)), scenario.dumps())
    return result


def exhaustive_suite(instance, schedules: int = 30, seed: int = 0, messages: int = 6) -> SuiteResult:
    """Every causal completion of small schedules reaches one common value."""
    instance = resolve(instance)
    result = SuiteResult("exhaustive", instance.name)
    check = result.check("singleton", schedules)
    for i in range(schedules):
        # sizes cycle through 1..messages operations
        size = 1 + i % messages
        scenario = random_execution(instance, 3, size, seed=seed * 100_003 + i)
        outcomes = enumerate_deliveries(without_deliver_all(scenario), instance)
        ok = len(outcomes) == 1 and len(set(next(iter(outcomes)))) == 1
        check.record(ok, (scenario.dumps(), sorted(outcomes)))
    return result


SUITES = {
    "assumptions": assumptions_suite,
    "tp": tp_suite,
    "oracle": oracle_suite,
    "compressed": compressed_suite,
    "prune": prune_suite,
    "commute": commute_suite,
    "convergence": convergence_suite,
    "exhaustive": exhaustive_suite,
}


def applicable(instance, suite: str) -> bool:
    instance = resolve(instance)
    if suite in ("assumptions", "tp", "prune"):
        return isinstance(instance, SemidirectProduct)
    if suite == "compressed":
        return isinstance(instance, SemidirectProduct) and instance.monoid is not None
    if suite == "oracle":
        return instance.name in ORACLES
    return suite in SUITES
