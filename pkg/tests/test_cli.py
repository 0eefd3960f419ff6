import json
import os
import subprocess
import sys

import pytest

from rhmember.automata import Fsa
from rhmember.autostruct import AutomaticStructure, builtin_shortlex_abelian
from rhmember.cli import main
from rhmember.stallings import StallingsGraph

HERE = os.path.dirname(os.path.abspath(__file__))
INSTANCE = os.path.join(HERE, "..", "instances", "z2_free_z.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fold_summary(capsys):
    code, out, _ = run(capsys, "fold", "--gens", "a*a,a*b")
    assert code == 0 and out.strip() == "2 vertices, 3 edges, rank 2, index ∞"
    code, out, _ = run(capsys, "fold", "--gens", "")
    assert code == 0 and "rank 0" in out and out.startswith("1 vertices")
    code, out, _ = run(capsys, "fold", "--gens", "a*a^-1")
    assert code == 0 and out.startswith("1 vertices, 0 edges")


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "fold", "--gens", "a**b")
    assert code == 3 and "position" in err


def test_graph_roundtrip(capsys, tmp_path):
    out_json = tmp_path / "g.json"
    dot = tmp_path / "g.dot"
    code, _, _ = run(capsys, "fold", "--gens", "a*a,a*b,b*a*b", "--out", str(out_json),
                     "--dot", str(dot))
    assert code == 0
    data = json.loads(out_json.read_text())
    g = StallingsGraph.from_dict(data)
    assert g.to_dict() == data
    assert "doublecircle" in dot.read_text()


def test_json_flag_in_either_position(capsys):
    _, a, _ = run(capsys, "--json", "rank", "--gens", "a*a,a*b")
    _, b, _ = run(capsys, "rank", "--gens", "a*a,a*b", "--json")
    assert a == b and json.loads(a)["rank"] == 2


def test_index_intersect_conjugate(capsys):
    code, out, _ = run(capsys, "index", "--gens", "a*a,b*b,a*b")
    assert code == 0 and out.strip() == "index 2"
    code, out, _ = run(capsys, "--json", "intersect", "--gens1", "a", "--gens2", "a*a,b")
    assert code == 0 and json.loads(out)["basis"] == ["a*a"]
    code, _, _ = run(capsys, "conjugate", "--gens1", "b", "--gens2", "a*b*a^-1")
    assert code == 0
    code, _, _ = run(capsys, "conjugate", "--gens1", "a", "--gens2", "b")
    assert code == 1


def test_complete(capsys, tmp_path):
    pres = tmp_path / "z2.json"
    pres.write_text(json.dumps({"alphabet": ["a", "b"], "relators": ["a*b*a^-1*b^-1"]}))
    code, _, _ = run(capsys, "--trace-dir", str(tmp_path / "t"), "complete", "--presentation",
                     str(pres), "--subgroup", "a", "--element", "b*a*b^-1", "--rounds", "10")
    assert code == 0 and os.listdir(tmp_path / "t")
    code, _, _ = run(capsys, "complete", "--presentation", str(pres), "--subgroup", "a",
                     "--element", "b", "--rounds", "3")
    assert code == 2


def test_member_exit_codes(capsys, tmp_path):
    code, out, _ = run(capsys, "member", "--presentation", INSTANCE, "--subgroup", "t",
                       "--element", "t*t*t")
    assert code == 0 and out.strip() == "member"
    cert = tmp_path / "cert.json"
    code, _, _ = run(capsys, "member", "--presentation", INSTANCE, "--subgroup", "t",
                     "--element", "a", "--certificate", str(cert))
    assert code == 1
    data = json.loads(cert.read_text())
    assert data["verdict"] == "non-member" and data["element"] == "a"
    code, _, _ = run(capsys, "member", "--presentation", INSTANCE, "--subgroup", "t",
                     "--element", "a", "--budget", "1")
    assert code == 2


def test_member_bundle_errors(capsys, tmp_path):
    code, _, _ = run(capsys, "member", "--presentation", str(tmp_path / "missing.json"),
                     "--subgroup", "t", "--element", "a")
    assert code == 4
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run(capsys, "member", "--presentation", str(bad), "--subgroup", "t",
                     "--element", "a")
    assert code == 3


def test_panic_exit_code(capsys, tmp_path):
    pres = tmp_path / "z2.json"
    pres.write_text(json.dumps({"alphabet": ["a", "b"], "relators": ["a*b*a^-1*b^-1"]}))
    code, _, err = run(capsys, "member", "--presentation", str(pres), "--structure", "free:a,b",
                       "--subgroup", "a", "--element", "b")
    assert code == 5 and "panic" in err


def test_oracle(capsys):
    code, _, _ = run(capsys, "oracle", "--presentation", INSTANCE, "--subgroup", "t",
                     "--element", "a")
    assert code == 1
    code, _, _ = run(capsys, "oracle", "--family", "abelian", "--alphabet", "a,b",
                     "--subgroup", "a^2,b", "--element", "a")
    assert code == 1
    for family in ("free", "abelian"):
        code, _, _ = run(capsys, "oracle", "--family", family, "--alphabet", "a,b",
                         "--subgroup", "a*b", "--element", "")
        assert code == 0
    code, _, _ = run(capsys, "oracle", "--presentation", INSTANCE, "--subgroup", "a*t",
                     "--element", "a")
    assert code == 6


def test_l_stallings_and_structure_bundles(capsys, tmp_path):
    code, out, _ = run(capsys, "l-stallings", "--structure", "abelian:a,b", "--subgroup",
                       "a^2,b", "--element", "a*a*b^-1")
    assert code == 0 and out.startswith("certified: 2 vertices, 3 edges")
    code, _, _ = run(capsys, "l-stallings", "--structure", "abelian:a,b", "--subgroup",
                     "a^2*b", "--budget", "5")
    assert code == 2
    bundle = tmp_path / "z2"
    code, _, _ = run(capsys, "validate-structure", "--structure", "abelian:a,b",
                     "--export", str(bundle))
    assert code == 0
    loaded = AutomaticStructure.load(str(bundle))
    ref = builtin_shortlex_abelian(2)
    assert Fsa.from_dict(loaded.acceptor.to_dict()).to_dict() == ref.acceptor.to_dict()
    code, _, _ = run(capsys, "l-stallings", "--structure", str(bundle), "--subgroup", "a^2,b",
                     "--element", "a")
    assert code == 1


def test_negative_budget_rejected(capsys):
    with pytest.raises(SystemExit):
        main(["member", "--presentation", INSTANCE, "--element", "a", "--budget", "-1"])


def test_reports_are_deterministic(tmp_path):
    cmd = [sys.executable, "-m", "rhmember", "--json", "--seed", "7", "member",
           "--presentation", INSTANCE, "--subgroup", "a*b", "--element", "a"]
    first = subprocess.run(cmd, capture_output=True, text=True)
    second = subprocess.run(cmd, capture_output=True, text=True)
    assert first.returncode == second.returncode == 1
    assert first.stdout == second.stdout and first.stdout
