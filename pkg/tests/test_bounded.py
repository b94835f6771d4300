import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metric_repair import (CapabilityError, Constraint, Database, RandomSpec, Weights, brute_force_optimal,
                           build_metric, candidate_values_full_line, contracted_satisfies, gen_random, inclusion,
                           instance_from_dict, key, solve_bounded_full_line, solve_bounded_line,
                           solve_tree_metric, within_bound)
from metric_repair.constraints import LeAtom

from conftest import consistent


def test_candidate_set_example():
    db = Database.from_records(["A", "B"], [("1", "A", 0), ("2", "B", 10)])
    w = Weights({"A": 1, "B": 2})
    assert candidate_values_full_line(db, w, 3) == [-6, -3, 0, 3, 4, 6, 7, 10, 13, 16]


def test_candidate_set_tau_zero_is_values():
    db = Database.from_records(["A", "B"], [("1", "A", 2), ("2", "B", 5), ("3", "A", 5)])
    assert candidate_values_full_line(db, Weights({"A": 1, "B": 3}), 0) == [2, 5]


def test_candidates_skip_locked_attributes():
    db = Database.from_records(["A", "B"], [("1", "A", 0), ("2", "B", 10)])
    assert candidate_values_full_line(db, Weights({"A": 1, "B": "locked"}), 1) == [-1, 0, 1, 9, 10, 11]


def test_contracted_satisfies():
    db = Database.from_records(["A", "B"], [("1", "A", 0), ("2", "A", 3), ("3", "B", 3)])
    g = Constraint(key(1))
    assert contracted_satisfies([db.cell("1")], g, 0, db.signature)
    assert not contracted_satisfies([db.cell("1"), db.cell("2")], g, 0, db.signature)
    assert contracted_satisfies([], g, 0, db.signature)
    assert not contracted_satisfies([db.cell("1")], g, 0, db.signature, offset=(1, 0))


def _instance(seed, tau, kind="line", n=5, cells=(2, 2), template="random"):
    return instance_from_dict(gen_random(RandomSpec(n, cells, kind, template, (0.5, 2.0),
                                                    override_prob=0.3, tau=tau, seed=seed)))


def _non_crossing(inst, assignment):
    x = dict(zip(inst.metric.points, inst.metric.coords))
    for a in inst.db.signature.attributes:
        cells = [c for c in inst.db.cells if c.attr == a]
        for c in cells:
            for d in cells:
                if x[c.value] < x[d.value] and x[assignment[c.id]] > x[assignment[d.id]]:
                    return False
    return True


@settings(max_examples=60)
@given(st.integers(0, 10**6), st.sampled_from([0, 0.5, 1, 2, 3.5, 100]))
def test_matches_bounded_oracle(seed, tau):
    inst = _instance(seed, tau)
    rep = solve_bounded_line(inst.db, inst.metric, inst.constraint, inst.weights, tau)
    ref = brute_force_optimal(inst.db, inst.metric, inst.constraint, inst.weights, tau)
    assert (rep is None) == (ref is None)
    if rep is not None:
        assert rep.cost == pytest.approx(ref.cost, abs=1e-9)
        assert consistent(inst, rep.assignment)
        assert within_bound(inst.db, rep.assignment, inst.metric, inst.weights, tau)
        assert _non_crossing(inst, rep.assignment)


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_unbounded_matches_tree_solver(seed):
    inst = _instance(seed, None)
    a = solve_bounded_line(inst.db, inst.metric, inst.constraint, inst.weights, None)
    b = solve_tree_metric(inst.db, inst.metric, inst.constraint, inst.weights)
    assert (a is None) == (b is None)
    if a is not None:
        assert a.cost == pytest.approx(b.cost, abs=1e-9)
        big = solve_bounded_line(inst.db, inst.metric, inst.constraint, inst.weights, 1e6)
        assert big.cost == pytest.approx(a.cost, abs=1e-9)


def test_tau_zero_is_identity_or_nothing():
    m = build_metric({"kind": "line", "points": [0, 1]})
    db = Database.from_records(["A"], [("1", "A", 0), ("2", "A", 0)])
    assert solve_bounded_line(db, m, Constraint(key(1)), Weights({"A": 1}), 0) is None
    rep = solve_bounded_line(db, m, Constraint(key(1)), Weights({"A": 1}), 1)
    assert rep.cost == 1 and sorted(rep.assignment.values()) == [0, 1]


def test_empty_point_must_allow_locked_profile():
    m = build_metric({"kind": "line", "points": [0, 1]})
    db = Database.from_records(["A", "B"], [("1", "A", 0), ("2", "B", 1)])
    w = Weights({"A": 1, "B": "locked"})
    # B is locked at 1 and needs an A next to it
    rep = solve_bounded_line(db, m, Constraint(inclusion(2, 1)), w, 5)
    assert rep.assignment == {"1": 1, "2": 1}


def test_accepts_plain_coordinates_and_rejects_other_metrics():
    db = Database.from_records(["A"], [("1", "A", 0), ("2", "A", 0)])
    rep = solve_bounded_line(db, [0, 2, 5], Constraint(key(1)), Weights({"A": 1}), 2)
    assert rep.cost == 2
    with pytest.raises(Exception):
        solve_bounded_line(db, build_metric({"kind": "discrete", "points": [0, 2]}),
                           Constraint(key(1)), Weights({"A": 1}), 2)


# --- whole real line ---------------------------------------------------------------

def _grid_oracle(db, gamma, weights, tau, step):
    vals = [float(v) for v in db.values()]
    reach = max(weights.of(a) for a in db.signature.attributes if not weights.locked(a)) * tau
    lo, hi = min(vals) - reach, max(vals) + reach
    grid = sorted({round(x, 9) for x in np.arange(lo, hi + step / 2, step)} | set(vals))
    m = build_metric({"kind": "line", "points": grid})
    return brute_force_optimal(db, m, gamma, weights, tau)


@pytest.mark.parametrize("seed", range(8))
def test_full_line_not_worse_than_grid(seed):
    rng = np.random.default_rng(seed)
    n = 3
    recs = [(str(i), "AB"[i % 2], float(rng.integers(0, 5))) for i in range(n)]
    db = Database.from_records(["A", "B"], recs)
    w = Weights({"A": 1, "B": float(rng.choice([0.5, 1, 2]))})
    gamma = Constraint(inclusion(1, 2))
    tau = float(rng.choice([0.5, 1, 1.5]))
    rep = solve_bounded_full_line(db, gamma, w, tau)
    ref = _grid_oracle(db, gamma, w, tau, 0.25)
    assert (rep is None) == (ref is None)
    if rep is not None:
        assert rep.cost <= ref.cost + 1e-6
        assert within_bound(db, rep.assignment, lambda a, b: abs(float(a) - float(b)), w, tau)


def test_full_line_needs_an_invented_point():
    # A at 0 and B at 4 may each move 2: they can only meet at 2, which is not a database value
    db = Database.from_records(["A", "B"], [("1", "A", 0.0), ("2", "B", 4.0)])
    rep = solve_bounded_full_line(db, Constraint(inclusion(1, 2)), Weights({"A": 1, "B": 1}), 2)
    assert rep.assignment == {"1": 2.0, "2": 2.0} and rep.cost == 4


@pytest.mark.parametrize("gamma", [Constraint(key(1)), Constraint(inclusion(1, 2), {0.0: LeAtom(1, 1)}),
                                   Constraint(~LeAtom(1, 0))])
def test_full_line_refuses(gamma):
    db = Database.from_records(["A", "B"], [("1", "A", 0.0), ("2", "A", 4.0), ("3", "B", 4.0)])
    with pytest.raises(CapabilityError):
        solve_bounded_full_line(db, gamma, Weights({"A": 1, "B": 1}), 1)
