import math

import pytest
from hypothesis import given, settings, strategies as st

from metric_repair import (CapabilityError, Constraint, Database, OracleBudget, RandomSpec, Weights,
                           brute_force_optimal, build_metric, gen_random, instance_from_dict, key, milp_optimal,
                           repair_cost)
from metric_repair.oracle import search_space
from metric_repair.constraints import Everything

from conftest import consistent


def test_pid_discrete(pid_discrete):
    i = pid_discrete
    rep = brute_force_optimal(i.db, i.metric, i.constraint, i.weights)
    assert rep.cost == pytest.approx(4.2, abs=1e-9)
    assert rep.info["assignments"] == 8 ** 6


def test_pid_hamming_optimum(pid_hamming):
    # exhaustive search over all 8**6 placements of the six movable cells
    i = pid_hamming
    rep = brute_force_optimal(i.db, i.metric, i.constraint, i.weights)
    assert rep.cost == pytest.approx(5.2, abs=1e-9)
    assert consistent(i, rep.assignment)
    assert milp_optimal(i.db, i.metric, i.constraint, i.weights).cost == pytest.approx(5.2, abs=1e-9)


def test_consistent_input_costs_nothing():
    m = build_metric({"kind": "discrete", "points": ["a", "b"]})
    db = Database.from_records(["A"], [("1", "A", "a"), ("2", "A", "b")])
    rep = brute_force_optimal(db, m, Constraint(key(1)), Weights({"A": 1}))
    assert rep.cost == 0 and rep.changed_cells(db) == []


def test_first_minimum_in_enumeration_order():
    m = build_metric({"kind": "line", "points": [0, 1, 2]})
    db = Database.from_records(["A"], [("1", "A", 1), ("2", "A", 1)])
    rep = brute_force_optimal(db, m, Constraint(key(1)), Weights({"A": 1}))
    # cell "1" is the most significant digit, so it takes the leftmost point first
    assert rep.assignment == {"1": 0, "2": 1}


def test_budget_error_names_the_size():
    m = build_metric({"kind": "discrete", "points": list("abcd")})
    db = Database.from_records(["A"], [(str(k), "A", "a") for k in range(4)])
    with pytest.raises(CapabilityError, match="256"):
        brute_force_optimal(db, m, Constraint(key(1)), Weights({"A": 1}), budget=OracleBudget(100))
    with pytest.raises(ValueError):
        OracleBudget(0)


def test_tau_restricts_domains():
    m = build_metric({"kind": "line", "points": [0, 1, 5]})
    db = Database.from_records(["A", "B"], [("1", "A", 0), ("2", "B", 5)])
    cells, domains, costs = search_space(db, m, Weights({"A": 1, "B": 2}), tau=1)
    assert [list(d) for d in domains] == [[0, 1], [2]]
    assert [list(c) for c in costs] == [[0, 1], [0]]


def test_locked_cells_stay():
    m = build_metric({"kind": "line", "points": [0, 1]})
    db = Database.from_records(["A", "B"], [("1", "A", 0), ("2", "B", 1)])
    rep = brute_force_optimal(db, m, Constraint(key(1) & Everything()), Weights({"A": "locked", "B": 1}))
    assert rep.assignment == {"1": 0, "2": 1}


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.sampled_from(["inclusion", "key", "foreign_key", "cap", "closed"]),
       st.sampled_from([None, 1.0, 3.0]))
def test_milp_agrees_with_enumeration(seed, template, tau):
    inst = instance_from_dict(gen_random(RandomSpec(4, (2, 2), "matrix", template, (0.5, 2.0), tau=tau,
                                                    seed=seed)))
    a = brute_force_optimal(inst.db, inst.metric, inst.constraint, inst.weights, tau)
    b = milp_optimal(inst.db, inst.metric, inst.constraint, inst.weights, tau)
    assert (a is None) == (b is None)
    if a is not None:
        assert b.cost == pytest.approx(a.cost, abs=1e-7)
        assert consistent(inst, b.assignment)


def test_milp_refuses_disjunctions():
    inst = instance_from_dict(gen_random(RandomSpec(3, (1, 1), "line", "none", seed=0)))
    with pytest.raises(CapabilityError):
        milp_optimal(inst.db, inst.metric, Constraint(key(1) | key(2)), inst.weights)


def test_cost_matches_repair_cost():
    inst = instance_from_dict(gen_random(RandomSpec(4, (2, 1), "graph", "inclusion", (0.5, 2), seed=3)))
    rep = brute_force_optimal(inst.db, inst.metric, inst.constraint, inst.weights)
    assert rep.cost == pytest.approx(repair_cost(inst.db, rep.assignment, inst.metric, inst.weights))
    assert math.isfinite(rep.cost)
