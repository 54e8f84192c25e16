import csv
import io
import json
import os
import subprocess
import sys

import pytest

from sandwichmat.cli import main, parse_spec
from sandwichmat.textio import parse_matrices


@pytest.fixture(autouse=True)
def restore_budget_env():
    # --budget writes SANDWICH_BUDGET into the process environment
    saved = os.environ.get("SANDWICH_BUDGET")
    yield
    if saved is None:
        os.environ.pop("SANDWICH_BUDGET", None)
    else:
        os.environ["SANDWICH_BUDGET"] = saved


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_json(capsys):
    code, out, _ = run(capsys, "analyze", "--q", "3", "--m", "2", "--n", "3", "--rank", "1", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    top = rep["dclasses"][1]
    assert (top["nR"], top["nL"], top["hSize"]) == (3, 9, 2)
    assert rep["regular_formula"] == rep["regular_enumerated"]
    assert rep["idempotents_formula"] == rep["idempotents_enumerated"]


def test_analyze_zero_semigroup(capsys):
    code, out, _ = run(capsys, "analyze", "--q", "2", "--m", "2", "--n", "2", "--rank", "0", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["size"] == 16 and "zero semigroup" in rep["note"]


def test_analyze_from_file_matches_rank(capsys, tmp_path):
    path = tmp_path / "A.mat"
    path.write_text("2 2 2\n1 1\n1 1\n")
    _, by_file, _ = run(capsys, "analyze", "--q", "2", "--m", "2", "--n", "2", "--sandwich-file", str(path), "--format", "json")
    _, by_rank, _ = run(capsys, "analyze", "--q", "2", "--m", "2", "--n", "2", "--rank", "1", "--format", "json")
    a, b = json.loads(by_file), json.loads(by_rank)
    assert not a["normalized"] and b["normalized"]
    for key in ("size", "regular_formula", "idempotents_formula", "dclasses", "regular_enumerated"):
        assert a[key] == b[key]


def test_analyze_text(capsys):
    code, out, _ = run(capsys, "analyze", "--q", "2", "--m", "2", "--n", "3", "--rank", "2")
    assert code == 0 and "sandwich rank 2" in out


def test_eggbox_csv_ordinary_dclass(capsys):
    code, out, _ = run(capsys, "eggbox", "--q", "3", "--m", "2", "--n", "3", "--rank", "1",
                       "--scope", "mdclass:1", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 52
    assert len({r["rKey"] for r in rows}) == 4 and len({r["lKey"] for r in rows}) == 13
    assert {r["size"] for r in rows} == {"2"}


def test_eggbox_dot_chain(capsys):
    code, out, _ = run(capsys, "eggbox", "--q", "2", "--m", "2", "--n", "3", "--rank", "2", "--format", "dot")
    assert code == 0 and out.startswith("digraph")
    assert out.count("->") == 2


def test_eggbox_zero_rank_single_node(capsys):
    code, out, _ = run(capsys, "eggbox", "--q", "2", "--m", "2", "--n", "2", "--rank", "0", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and len(rep["dclasses"]) == 1 and rep["order"] == []


def test_eggbox_is_deterministic(capsys, tmp_path):
    args = ["eggbox", "--q", "3", "--m", "2", "--n", "2", "--rank", "1", "--scope", "all", "--format", "dot"]
    outs = []
    for t in ("1", "4"):
        out = tmp_path / f"e{t}.dot"
        assert main(args + ["--threads", t, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_generators_full(capsys):
    code, out, _ = run(capsys, "generators", "--target", "full", "--q", "2", "--m", "2", "--n", "3", "--rank", "2",
                       "--necessity")
    assert code == 0
    mats = parse_matrices(out)
    assert len(mats) == 7 and all(M.shape == (2, 3) for M in mats)
    assert "certified True" in out and "necessity check: ok" in out


def test_generators_json(capsys):
    code, out, _ = run(capsys, "generators", "--target", "ideal:1", "--q", "2", "--m", "2", "--n", "3", "--rank", "2",
                       "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["claimed_size"] == 6 and rep["closure_size"] == rep["target_size"] == 19


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--left", "q=2,m=2,n=2,rank=0", "--right", "q=4,m=2,n=1,rank=0")
    assert code == 0 and out.startswith("isomorphic")
    code, out, _ = run(capsys, "classify", "--left", "q=2,m=2,n=2,rank=1", "--right", "q=2,m=2,n=2,rank=2",
                       "--format", "json")
    assert code == 0 and json.loads(out)["isomorphic"] is False


def test_classify_with_sandwich_file(capsys, tmp_path):
    path = tmp_path / "A.mat"
    path.write_text("2 2 2\n0 1\n1 0\n")
    code, out, _ = run(capsys, "classify", "--left", f"sandwich={path}", "--right", "q=2,m=2,n=2,rank=2",
                       "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["isomorphic"] and rep["witness_check"] == "bijective homomorphism"


def test_formulas(capsys):
    code, out, _ = run(capsys, "formulas", "--q", "2", "--m", "2", "--n", "2", "--rank", "1", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["regular"] == 5 and rep["idempotents"] == 5 and rep["ranks"]["full"] == 6


def test_verify_subset_and_mutation(capsys):
    code, out, _ = run(capsys, "verify", "--only", "counts", "--grid", "2:2:2:1,3:2:3:1")
    assert code == 0 and out.splitlines()[-1] == "2 passed, 0 failed"
    code, out, err = run(capsys, "verify", "--only", "counts", "--grid", "2:2:2:1", "--mutate")
    assert code == 1 and "FAIL" in out and "counterexample" in err


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "analyze", "--q", "2", "--m", "2")[0] == 2
    assert run(capsys, "analyze", "--q", "6", "--m", "2", "--n", "2", "--rank", "1")[0] == 2
    assert run(capsys, "analyze", "--q", "2", "--m", "2", "--n", "2", "--rank", "3")[0] == 2
    assert run(capsys, "eggbox", "--q", "2", "--m", "2", "--n", "2", "--rank", "1", "--scope", "bogus")[0] == 2
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "verify", "--only", "nothing")[0] == 2
    assert run(capsys, "analyze", "--q", "2", "--m", "2", "--n", "2", "--rank", "1", "--budget", "0")[0] == 2
    assert run(capsys, "analyze", "--q", "2", "--m", "2", "--n", "2", "--sandwich-file", str(tmp_path / "none"))[0] == 2
    code, _, err = run(capsys, "eggbox", "--q", "3", "--m", "3", "--n", "3", "--rank", "1", "--scope", "all",
                       "--budget", "1000")
    assert code == 3 and "budget" in err


def test_parse_spec():
    ctx = parse_spec("q=2,m=2,n=3,rank=1")
    assert (ctx.q, ctx.m, ctx.n, ctx.r) == (2, 2, 3, 1)
    with pytest.raises(Exception):
        parse_spec("q=2;m=2")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sandwichmat", "formulas", "--q", "2", "--m", "1", "--n", "1",
                           "--rank", "1"], capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and "regular 2" in proc.stdout
