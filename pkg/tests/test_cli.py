import json
import subprocess
import sys

import pytest

from metric_repair import RandomSpec, gen_random, gen_x3c_bounded, pid_instance
from metric_repair.cli import EXIT_INVALID, EXIT_NO_REPAIR, EXIT_OK, EXIT_REFUSED, main
from metric_repair.gen import X3C_SETS, X6


def _write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_repair_tree_metric(tmp_path, capsys):
    code, out = _run(capsys, "repair", _write(tmp_path, "pid.json", pid_instance("discrete")))
    assert code == EXIT_OK
    assert out["solver"] == "tree_exact" and out["status"] == "repaired"
    assert out["cost"] == pytest.approx(4.2)
    assert set(out["changed_cells"]) <= set(out["assignment"])


def test_repair_general_metric(tmp_path, capsys):
    code, out = _run(capsys, "repair", _write(tmp_path, "pid.json", pid_instance("hamming")), "--seed", "7")
    assert code == EXIT_OK
    assert out["solver"] == "frt_approx" and out["trials"] == 7 and out["seed"] == 7
    assert len(out["diagnostics"]["per_trial"]) == 7


def test_repair_bounded_line(tmp_path, capsys):
    doc = gen_random(RandomSpec(5, (2, 2), "line", "inclusion", tau=3, seed=1))
    code, out = _run(capsys, "repair", _write(tmp_path, "b.json", doc))
    assert out["solver"] == "bounded_line_dp" and code in (EXIT_OK, EXIT_NO_REPAIR)


def test_bounded_general_metric_uses_oracle_or_refuses(tmp_path, capsys):
    path = _write(tmp_path, "x3c.json", gen_x3c_bounded(X6, X3C_SETS))
    code, out = _run(capsys, "repair", path)
    assert code == EXIT_OK and out["solver"] == "bounded_oracle" and out["cost"] == 6
    code, out = _run(capsys, "repair", path, "--budget", "10")
    assert code == EXIT_REFUSED and out["status"] == "refused"


def test_no_repair_exit_code(tmp_path, capsys):
    S = {k: v for k, v in X3C_SETS.items() if k != "s3"}
    code, out = _run(capsys, "repair", _write(tmp_path, "x.json", gen_x3c_bounded(X6, S)))
    assert code == EXIT_NO_REPAIR and out["status"] == "no_repair" and out["cost"] is None


def test_invalid_json_reports_position(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"signature": [\n  "A",\n}')
    code, out = _run(capsys, "validate", str(p))
    assert code == EXIT_INVALID and "line 3" in out["message"]


def test_missing_file(tmp_path, capsys):
    code, out = _run(capsys, "repair", str(tmp_path / "nope.json"))
    assert code == EXIT_INVALID


def test_invalid_metric(tmp_path, capsys):
    doc = pid_instance("hamming")
    doc["metric"]["dist"][0][1] = 7
    code, out = _run(capsys, "validate", _write(tmp_path, "m.json", doc))
    assert code == EXIT_INVALID


def test_validate_reports_consistency(tmp_path, capsys):
    code, out = _run(capsys, "validate", _write(tmp_path, "pid.json", pid_instance("discrete")))
    assert code == EXIT_OK and out["valid"] and not out["consistent"] and out["violating_points"]


def test_oracle_command(tmp_path, capsys):
    code, out = _run(capsys, "oracle", _write(tmp_path, "pid.json", pid_instance("discrete")))
    assert code == EXIT_OK and out["cost"] == pytest.approx(4.2) and out["assignments"] == 8 ** 6
    code, out = _run(capsys, "oracle", _write(tmp_path, "pid.json", pid_instance("discrete")), "--budget", "5")
    assert code == EXIT_REFUSED


def test_embed_stats(tmp_path, capsys):
    code, out = _run(capsys, "embed-stats", _write(tmp_path, "pid.json", pid_instance("hamming")),
                     "--samples", "20")
    assert code == EXIT_OK and out["dominance_ok"] and out["samples"] == 20


@pytest.mark.parametrize("argv", [
    ["gen", "random", "--seed", "1"],
    ["gen", "random", "--metric", "graph", "--cells", "2,1,1", "--locked", "3", "--tau", "1"],
    ["gen", "x3c"], ["gen", "apx3sc", "--S", "s1:x1,x2,x3;s2:x4,x5,x6"], ["gen", "sat"],
    ["gen", "pid", "--metric", "hamming"], ["gen", "nurse"],
])
def test_gen_round_trips_through_validate(argv, tmp_path, capsys):
    code, doc = _run(capsys, *argv)
    assert code == EXIT_OK
    code, out = _run(capsys, "validate", _write(tmp_path, "g.json", doc))
    assert code == EXIT_OK


def test_gen_bad_arguments(capsys):
    code, out = _run(capsys, "gen", "random", "--metric", "torus")
    assert code == EXIT_INVALID
    code, out = _run(capsys, "gen", "sat", "--cnf", "1,a")
    assert code == EXIT_INVALID


def test_pretty_output(tmp_path, capsys):
    main(["gen", "pid", "--pretty"])
    assert capsys.readouterr().out.startswith("{\n  ")


def _strip(text: str) -> str:
    doc = json.loads(text)
    doc.pop("elapsed_ms", None)
    return json.dumps(doc, sort_keys=True)


def test_installed_entry_point_is_deterministic(tmp_path):
    path = _write(tmp_path, "pid.json", pid_instance("hamming"))
    cmd = [sys.executable, "-m", "metric_repair.cli", "repair", path, "--seed", "3"]
    a = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    assert _strip(a) == _strip(b)


def test_pid_hamming_golden(tmp_path, capsys):
    from pathlib import Path
    want = json.loads((Path(__file__).parent / "golden" / "pid_hamming_seed7.json").read_text())
    code, out = _run(capsys, "repair", _write(tmp_path, "pid.json", pid_instance("hamming")),
                     "--seed", "7", "--epsilon", "0.01")
    out.pop("elapsed_ms")
    assert code == EXIT_OK and out == want
    assert 5.3 <= out["cost"] <= 5.3 * 2 * 3
