"""Instance and result JSON."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .constraints import Constraint, expr_from_json
from .core import Cell, Database, Instance, InputError, Repair, Signature, Weights
from .metric import Steiner, build_metric

SIG_DIGITS = 12


def _require(doc: Mapping, key: str, kind: type | tuple):
    if key not in doc:
        raise InputError(f"instance is missing '{key}'")
    val = doc[key]
    if not isinstance(val, kind):
        raise InputError(f"'{key}' has the wrong type ({type(val).__name__})")
    return val


def constraint_from_json(obj: Mapping) -> Constraint:
    if not isinstance(obj, Mapping):
        raise InputError("'constraint' must be an object")
    kind = obj.get("kind", "uniform")
    if kind not in ("uniform", "pointwise"):
        raise InputError(f"constraint kind must be 'uniform' or 'pointwise', got {kind!r}")
    try:
        default = expr_from_json(obj["expr"])
        overrides = {k: expr_from_json(e) for k, e in obj.get("overrides", {}).items()}
    except KeyError:
        raise InputError("constraint needs 'expr'") from None
    except ValueError as e:
        raise InputError(f"bad constraint: {e}") from None
    if kind == "uniform" and overrides:
        raise InputError("a uniform constraint cannot have overrides")
    return Constraint(default, overrides)


def constraint_to_json(gamma: Constraint, q: int) -> dict:
    if gamma.uniform:
        return {"kind": "uniform", "expr": gamma.default.to_json(q)}
    return {"kind": "pointwise", "expr": gamma.default.to_json(q),
            "overrides": {str(k): e.to_json(q) for k, e in gamma.overrides.items()}}


def instance_from_dict(doc: Mapping[str, Any]) -> Instance:
    """Parse and check an instance document; raises :class:`InputError` on any problem."""
    if not isinstance(doc, Mapping):
        raise InputError("instance must be a JSON object")
    sig = Signature(tuple(_require(doc, "signature", list)))
    raw_w = _require(doc, "weights", dict)
    unknown = [a for a in raw_w if a not in sig.attributes]
    if unknown:
        raise InputError(f"weights for unknown attributes {unknown}")
    for a, w in raw_w.items():
        if w != "locked" and (isinstance(w, bool) or not isinstance(w, (int, float))):
            raise InputError(f"weight of {a!r} must be a number or \"locked\"")
    weights = Weights(raw_w)
    weights.check(sig)
    metric = build_metric(_require(doc, "metric", dict))
    gamma = constraint_from_json(_require(doc, "constraint", dict))
    try:
        gamma.check_arity(sig.q)
    except ValueError as e:
        raise InputError(str(e)) from None
    cells = []
    for rec in _require(doc, "cells", list):
        if not isinstance(rec, Mapping) or not {"id", "attr", "value"} <= set(rec):
            raise InputError(f"cell record needs id, attr and value: {rec!r}")
        if rec["value"] not in metric.index:
            raise InputError(f"cell {rec['id']!r} has value {rec['value']!r}, which is not a metric point")
        cells.append(Cell(str(rec["id"]), rec["attr"], rec["value"]))
    db = Database(sig, tuple(cells))
    for v in gamma.overrides:
        if v not in metric.index:
            raise InputError(f"constraint override for unknown point {v!r}")
    tau = doc.get("tau")
    if tau is not None:
        if isinstance(tau, bool) or not isinstance(tau, (int, float)) or tau < 0:
            raise InputError("tau must be a nonnegative number")
        tau = float(tau)
    return Instance(db, metric, gamma, weights, tau)


def parse_instance_text(text: str, source: str = "<input>") -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{source}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    return instance_from_dict(doc)


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    return parse_instance_text(text, str(path))


def instance_doc(signature, weights: Mapping, metric: Mapping, constraint: Mapping, cells,
                 tau: float | None = None) -> dict:
    """Assemble an instance document; ``cells`` is a list of ``(id, attr, value)``."""
    doc = {
        "signature": list(signature),
        "weights": dict(weights),
        "metric": dict(metric),
        "constraint": dict(constraint),
        "cells": [{"id": i, "attr": a, "value": v} for i, a, v in cells],
    }
    if tau is not None:
        doc["tau"] = tau
    return doc


def round_floats(obj: Any) -> Any:
    """Round every float to 12 significant digits so output text is stable."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Mapping):
        return {str(k): round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist())
    if isinstance(obj, Steiner):
        return str(obj)
    return str(obj)


def dumps(obj: Any, pretty: bool = False) -> str:
    return json.dumps(round_floats(obj), indent=2 if pretty else None,
                      separators=None if pretty else (",", ":"), ensure_ascii=False)


def repair_doc(db: Database, rep: Repair | None, solver: str, **extra) -> dict:
    if rep is None:
        doc = {"status": "no_repair", "solver": solver, "cost": None, "assignment": None,
               "changed_cells": []}
    else:
        doc = {"status": "repaired", "solver": solver, "cost": rep.cost,
               "assignment": {c.id: rep.assignment[c.id] for c in db.cells},
               "changed_cells": rep.changed_cells(db)}
    doc.update(extra)
    return doc
