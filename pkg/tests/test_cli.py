import io
import json
import shutil
import subprocess

import pytest

from structree.cli import run
from structree.fixtures import get_fixture
from structree.group_oracle import dump_group


def call(*argv, stdin=""):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err, io.StringIO(stdin))
    return code, out.getvalue(), err.getvalue()


def test_ball_text_and_json():
    code, out, _ = call("ball", "--fixture", "f2", "--radius", "2")
    assert code == 0 and "17 vertices" in out
    code, out, _ = call("ball", "--fixture", "f2", "--radius", "2", "--format", "json")
    data = json.loads(out)
    assert data["per_depth"] == [1, 4, 12]


def test_ball_dot():
    code, out, _ = call("ball", "--fixture", "ring", "--radius", "3", "--format", "dot")
    assert code == 0 and out.startswith("graph")


def test_cuts_marks_optimal_cuts():
    code, out, _ = call("cuts", "--fixture", "fig1", "--radius", "6")
    assert code == 0
    assert out.splitlines()[0].startswith("6 certified cuts")
    assert out.count("* weight") == 6


def test_cuts_with_seed_and_explicit_rays():
    code, out, _ = call("cuts", "--fixture", "fig1", "--radius", "5", "--seed-vertex", "0,1")
    assert code == 0 and "with a boundary vertex at 0,1" in out
    code, out, _ = call("cuts", "--fixture", "grid", "--radius", "5", "--k", "2", "--rays", "explicit")
    assert code == 0 and "min weight none" in out


def test_structure_tree_and_blocks():
    code, out, _ = call("structure-tree", "--fixture", "pgl", "--radius", "5", "--emit-blocks")
    assert code == 0 and "κ = 1" in out and "6 vertices" in out
    code, out, _ = call("blocks", "--fixture", "pgl", "--radius", "5", "--format", "json")
    data = json.loads(out)
    assert any(b.get("ends") == "0" for b in data["blocks"])


def test_tree_decomp_methods():
    code, out, _ = call("tree-decomp", "--fixture", "f2", "--radius", "4")
    assert code == 0 and "width 1" in out
    code, out, _ = call("tree-decomp", "--fixture", "pgl", "--radius", "5", "--method", "structure")
    assert code == 0 and "width 5" in out


def test_grammar_and_presentation():
    code, out, _ = call("grammar", "--fixture", "f2")
    assert code == 0 and out.splitlines()[0] == "S ->"
    code, out, _ = call("grammar", "--fixture", "pgl", "--presentation", "--check", "4")
    assert code == 0 and out.startswith("⟨ S") and "check up to length 4: pass" in out
    code, out, _ = call("grammar", "--fixture", "dinf", "--k", "1", "--check", "4")
    assert code == 2 and "FAIL" in out


def test_word_problem_from_stdin():
    code, out, _ = call("wp", "--fixture", "dinf", stdin="t a t a\n# comment\n\na t\n")
    assert code == 0
    assert out.splitlines() == ["ACCEPT (ε,1)", "REJECT (a,t)"]


def test_word_problem_json():
    code, out, _ = call("wp", "--fixture", "pgl", "--format", "json", stdin="b b b\n")
    assert json.loads(out)["results"][0]["verdict"] == "ACCEPT"


def test_group_file(tmp_path):
    p = tmp_path / "g.yaml"
    p.write_text(dump_group(get_fixture("dinf").oracle()), encoding="utf-8")
    code, out, _ = call("wp", "--group-file", str(p), stdin="t t\n")
    assert out.strip() == "ACCEPT (ε,1)"
    code, out, _ = call("ball", "--group-file", str(p), "--radius", "2")
    assert code == 0


def test_bad_group_file(tmp_path):
    p = tmp_path / "g.yaml"
    p.write_text("type: free\n", encoding="utf-8")
    code, _, err = call("wp", "--group-file", str(p))
    assert code == 1
    assert err.startswith("error: GroupFileError:") and ":1:" in err
    assert err.count("\n") == 1


def test_graph_of_groups():
    code, out, _ = call("graph-of-groups", "--fixture", "pgl", "--radius", "5")
    assert code == 0 and "order 3" in out and "order 2" in out
    code, _, err = call("graph-of-groups", "--fixture", "ring", "--radius", "6")
    assert code == 1 and "InputError" in err


def test_verify_exit_codes():
    code, out, _ = call("verify", "--fixture", "pgl", "--radius", "4")
    assert code == 0 and "FAIL" not in out
    code, out, _ = call("verify", "--fixture", "pgl", "--radius", "4", "--format", "json")
    assert all(r["passed"] for r in json.loads(out)["rows"])


def test_errors_and_exit_codes():
    code, _, err = call("ball", "--fixture", "f2", "--radius", "1")
    assert code == 1 and err == "error: InputError: radius must be at least 2, got 1\n"
    code, _, err = call("cuts", "--fixture", "f2", "--tau", "0")
    assert code == 1 and "tau" in err
    code, _, err = call("nonsense")
    assert code == 1 and err.startswith("error: usage:")
    code, _, err = call("structure-tree", "--fixture", "grid", "--radius", "4")
    assert code == 1 and "no optimal cuts" in err
    code, _, err = call("blocks", "--fixture", "dinf", "--format", "dot")
    assert code != 0
    code, _, err = call("cuts", "--fixture", "f2", "--rays", "explicit", "--seed-vertex", "zzz")
    assert code != 0 and err.startswith("error:")


def test_cut_from_decomposition_error_code(tmp_path):
    from structree.errors import ConsistencyError, WindowTooSmallError

    assert ConsistencyError.exit_code == 2 and WindowTooSmallError.exit_code == 3


def test_outputs_are_deterministic():
    first = call("cuts", "--fixture", "zz2", "--radius", "5", "--format", "json")
    second = call("cuts", "--fixture", "zz2", "--radius", "5", "--format", "json")
    assert first == second


@pytest.mark.skipif(shutil.which("structree") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["structree", "wp", "--fixture", "f2"], input="a a^-1\n", capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "ACCEPT (ε,1)"
