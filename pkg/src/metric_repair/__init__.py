"""Minimum-cost repairs of metric databases under coincidence constraints.

Exact on tree, line and discrete metrics; randomized approximation on general
finite metrics through sampled tree embeddings; exact bounded-movement repairs
on the line; brute-force and 0/1-program oracles for checking.
"""

from .approx import ApproxConfig, make_non_inventive, repair_general, repair_infinite
from .bounded import (candidate_values_full_line, contracted_satisfies, solve_bounded_full_line,
                      solve_bounded_line)
from .constraints import (And, Constraint, Everything, ExplicitSet, GeAtom, InclAtom, KeyAtom, LeAtom, Not, Or,
                          ProfileExpr, ZeroOnly, closed_under_addition, eval_membership, expr_from_json,
                          foreign_key, inclusion, key)
from .core import (LOCKED, CapabilityError, Cell, ContractViolation, Database, InputError, Instance, Repair,
                   RepairError, Signature, ValidationReport, Weights, check_consistency, profile_of, repair_cost,
                   validate_instance, within_bound)
from .embed import EmbeddedTree, StretchReport, dominance_violations, sample_frt_tree, stretch_statistics
from .gen import (RandomSpec, gen_apx_3sc, gen_random, gen_sat_bounded, gen_x3c_bounded, nurse_instance,
                  pid_instance)
from .io import instance_from_dict, load_instance
from .metric import (CastResult, Metric, Steiner, TreeMetric, binarize, build_metric, discrete_to_star,
                     line_to_tree, metric_to_tree)
from .oracle import OracleBudget, brute_force_optimal, milp_optimal
from .tree_solver import (PlacementTable, combine_internal, reconstruct_assignment, solve_tree, solve_tree_metric,
                          subtree_counts)

__version__ = "0.1.0"
