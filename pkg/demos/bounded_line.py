"""Bounded repairs on the line: tightening the movement bound, and moving to values outside the database.

Run: python3 demos/bounded_line.py
"""

from metric_repair import (Constraint, Database, Weights, build_metric, candidate_values_full_line, inclusion, key,
                           solve_bounded_full_line, solve_bounded_line)


def main():
    line = build_metric({"kind": "line", "points": [0, 1, 2, 3, 4, 5, 6]})
    db = Database.from_records(["A"], [("a", "A", 3), ("b", "A", 3), ("c", "A", 3), ("d", "A", 3)])
    print("four A-cells on 3 under a key constraint; the bound limits each move")
    for tau in (None, 3, 2, 1):
        rep = solve_bounded_line(db, line, Constraint(key(1)), Weights({"A": 1}), tau)
        text = "no repair" if rep is None else f"cost {rep.cost:g}, {dict(sorted(rep.assignment.items()))}"
        print(f"  tau={tau}: {text}")

    print("\nan A-cell needs a B-cell; values may be any real number")
    db = Database.from_records(["A", "B"], [("a", "A", 0.0), ("b", "B", 5.0)])
    w = Weights({"A": 1, "B": 1.5})
    for tau in (2, 2.5, 4):
        print(f"  tau={tau}: candidates {candidate_values_full_line(db, w, tau)}")
        rep = solve_bounded_full_line(db, Constraint(inclusion(1, 2)), w, tau)
        print(f"          {'no repair' if rep is None else f'cost {rep.cost:g}, {rep.assignment}'}")


if __name__ == "__main__":
    main()
