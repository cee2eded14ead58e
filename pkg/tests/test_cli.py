import csv
import io
import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from online_subsidy import adversaries
from online_subsidy.cli import EXIT_CAPABILITY, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, main
from online_subsidy.model import Allocation
from online_subsidy.valuations import Additive


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def test_run_table2(capsys):
    code, out, err = run(capsys, "run", "--gen", "table2", "--n", "4", "--m", "6", "--epsilon", "1/2", "--policy", "max-marginal")
    assert code == EXIT_OK
    table = rows(out)
    assert list(table[0]) == ["step", "item", "agent", "le", "total_subsidy", "total_subsidy_float_lossy", "bound", "slack"]
    assert [r["agent"] for r in table] == ["0"] * 6
    assert F(table[-1]["total_subsidy"]) >= 18 - F(1, 2)
    assert json.loads(err)["total"] == table[-1]["total_subsidy"]


def test_run_empty_instance(capsys, tmp_path):
    path = write_json(tmp_path / "empty.json", Additive([], 2).to_json())
    code, out, err = run(capsys, "run", "--instance", path, "--format", "jsonl")
    assert code == EXIT_OK and out == ""
    assert json.loads(err)["total"] == "0"


def test_run_rank_one_hard_is_rejected_then_breaks_le(capsys):
    args = ["run", "--gen", "rank-one-hard", "--n", "3", "--epsilon", "1/100", "--policy", "rank-one"]
    code, _, err = run(capsys, *args)
    assert code == EXIT_VIOLATION and "range" in err
    code, out, _ = run(capsys, *args, "--allow-invalid")
    assert code == EXIT_VIOLATION
    assert [r["le"] for r in rows(out)] == ["1", "1", "1", "0", "0", "1"]


def test_run_rank_one_hard_capped(capsys):
    code, out, _ = run(capsys, "run", "--gen", "rank-one-hard-capped", "--n", "3", "--epsilon", "1/100", "--policy", "rank-one")
    assert code == EXIT_OK
    total = F(rows(out)[-1]["total_subsidy"])
    assert total <= 5
    assert total < 5 - F(9, 50)


def test_random_generator_needs_seed(capsys):
    code, _, err = run(capsys, "run", "--gen", "random-additive")
    assert code == EXIT_USAGE and "seed" in err


def test_random_run_is_reproducible(capsys):
    args = ["run", "--gen", "random-k-demand", "--n", "3", "--m", "6", "--seed", "4", "--format", "jsonl"]
    assert run(capsys, *args) == run(capsys, *args)


def test_unproven_policy_needs_flag(capsys):
    code, _, _ = run(capsys, "run", "--gen", "table2", "--policy", "min-value")
    assert code == EXIT_USAGE
    code, out, _ = run(capsys, "run", "--gen", "table2", "--policy", "min-value", "--allow-unproven")
    assert rows(out)[0]["bound"] == ""


def test_adversary_exhaustive(capsys):
    code, out, _ = run(capsys, "adversary", "--class", "binary-submodular", "--policy", "exhaustive")
    body = json.loads(out)
    assert code == EXIT_OK and body["branches"] == body["defeated"] == 16


def test_adversary_restricted(capsys):
    code, out, _ = run(capsys, "adversary", "--class", "restricted-additive", "--n", "4", "--policy", "greedy-min-value")
    body = json.loads(out)
    assert body["kind"] == "subsidy-lower-bound" and body["certified_bound"] == "6" == body["total_subsidy"]


def test_adversary_budget(capsys):
    code, out, _ = run(capsys, "adversary", "--class", "budget-additive", "--policy", "max-marginal")
    body = json.loads(out)
    assert body["kind"] == "le-violation" and body["witness"] == [1, 0]


def test_unknown_class_is_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        main(["adversary", "--class", "nope", "--policy", "exhaustive"])
    assert err.value.code == EXIT_USAGE


def test_verify(capsys, tmp_path):
    v = adversaries.additive_table2(2, 2, F(1, 2))
    inst = write_json(tmp_path / "v.json", v.to_json())
    alloc = write_json(tmp_path / "x.json", Allocation.from_assignment(2, [0, 0]).to_json())
    code, out, _ = run(capsys, "verify", "--instance", inst, "--allocation", alloc)
    body = json.loads(out)
    assert code == EXIT_OK and body["locally_efficient"] and body["total"] == "27/16"
    bad = write_json(tmp_path / "y.json", Allocation.from_assignment(2, [1, 1]).to_json())
    body = json.loads(run(capsys, "verify", "--instance", inst, "--allocation", bad)[1])
    assert not body["locally_efficient"] and body["witness"] == [1, 0]


def test_verify_capability(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("ONLINE_SUBSIDY_MAX_AGENTS", "2")
    inst = write_json(tmp_path / "v.json", Additive([[1, 1, 1]]).to_json())
    alloc = write_json(tmp_path / "x.json", Allocation.from_assignment(3, [0]).to_json())
    assert run(capsys, "verify", "--instance", inst, "--allocation", alloc)[0] == EXIT_CAPABILITY


def test_missing_file(capsys, tmp_path):
    assert run(capsys, "validate", "--instance", str(tmp_path / "none.json"))[0] == EXIT_USAGE


def test_validate(capsys, tmp_path):
    good = write_json(tmp_path / "g.json", Additive([[F(1, 2)]]).to_json())
    assert run(capsys, "validate", "--instance", good)[0] == EXIT_OK
    bad = write_json(tmp_path / "b.json", Additive([[F(3, 2)]]).to_json())
    code, out, _ = run(capsys, "validate", "--instance", bad)
    assert code == EXIT_VIOLATION and json.loads(out)["violation"]["kind"] == "range"


def test_sweep_table2_grows_with_m(capsys):
    code, out, _ = run(capsys, "sweep", "--class", "additive", "--gen", "table2", "--n", "2", "--m", "2,4,8", "--seed", "0")
    totals = [F(r["subsidy"]) for r in rows(out)]
    assert code == EXIT_OK and totals == sorted(totals) and totals[-1] > 7


def test_sweep_identical(capsys):
    code, out, _ = run(capsys, "sweep", "--class", "identical-monotone", "--n", "3", "--m", "2-5", "--trials", "3", "--seed", "1", "--verify")
    assert code == EXIT_OK
    assert all(F(r["subsidy"]) <= 2 for r in rows(out))


def test_sweep_k_demand(capsys):
    code, out, _ = run(capsys, "sweep", "--class", "k-demand", "--k", "2", "--n", "3", "--m", "4,16", "--trials", "3", "--seed", "2")
    table = rows(out)
    assert code == EXIT_OK and len(table) == 6
    assert all(F(r["subsidy"]) <= 4 for r in table)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "online_subsidy", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "sweep" in proc.stdout
