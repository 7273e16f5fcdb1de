import json
import subprocess
import sys

import pytest

from ks_forge import _json
from ks_forge.assignments import Verdict
from ks_forge.cli import build_parser, main
from ks_forge.diagram import Diagram, load_data
from ks_forge.reductions import WitnessSet

SUBCOMMANDS = ["validate", "solve", "indefinite", "reduce", "iterate", "witness",
               "sweep", "taylor", "classify", "sample", "export"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sweep_command(capsys):
    code, out, _ = run(capsys, "sweep", "--lo", "0.802", "--hi", "0.9999", "--n", "10000")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "p1,f,df,gap" and len(lines) == 10_001


def test_solve_unsat(capsys):
    code, out, err = run(capsys, "solve", "--diagram", "data/fig2_anchor.json",
                         "--premise", "a=1", "--premise", "b=1", "--premise", "c=0")
    assert code == 1 and "Unsatisfiable" in err
    assert Verdict.from_json(json.loads(out)).satisfiable is False


def test_solve_sat_roundtrip(capsys, tmp_path):
    prem = tmp_path / "p.json"
    prem.write_text(json.dumps([{"id": "a", "req": "one"}, {"id": "b", "req": "one"}]))
    code, out, _ = run(capsys, "solve", "--diagram", "fig2_anchor.json", "--premises", str(prem))
    assert code == 0
    v = Verdict.from_json(json.loads(out))
    assert v.witness["c"] == 1


def test_solve_frame(capsys):
    code, out, _ = run(capsys, "solve", "--diagram", "peres57.json", "--frame")
    assert code == 1 and json.loads(out)["mode"] == "frame"


def test_taylor_command(capsys):
    code, out, _ = run(capsys, "taylor")
    assert code == 0
    assert abs(json.loads(out)["m"] - 1.2658) <= 1e-3


def test_validate_and_indefinite(capsys):
    code, out, _ = run(capsys, "validate", "--diagram", "strong_ks.json")
    assert code == 0 and json.loads(out)["passed"]
    code, out, _ = run(capsys, "indefinite", "--diagram", "strong_ks.json")
    assert code == 0 and json.loads(out)["value_indefinite"] is True
    code, _, _ = run(capsys, "indefinite", "--diagram", "fig2_anchor.json", "--b-id", "c")
    assert code == 1


def test_validate_failure(capsys, tmp_path):
    bad = {"observables": [{"id": "x", "vector": [1, 0, 0]}, {"id": "y", "vector": [0, 1, 0]},
                           {"id": "z", "vector": [0, 0.6, 0.8]}], "contexts": [["x", "y", "z"]]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, _, _ = run(capsys, "validate", "--diagram", str(path))
    assert code == 1


def test_witness_overlap_and_out(capsys, tmp_path):
    out = tmp_path / "w.json"
    code, stdout, _ = run(capsys, "witness", "--overlap", "0.9", "--out", str(out))
    assert code == 0 and stdout == ""
    w = WitnessSet.from_json(_json.loads(out.read_text()))
    assert len(w.chain) == 3


def test_witness_vectors(capsys):
    code, out, _ = run(capsys, "witness", "--a", "1,0,0", "--b", "0.6,0.8,0")
    assert code == 0
    assert Diagram.from_json(json.loads(out)).is_realized


def test_reduce_and_iterate(capsys):
    code, out, _ = run(capsys, "reduce", "--overlap", "0.5", "--x", "0.7")
    assert code == 0 and json.loads(out)["c"][0] == pytest.approx(0.7)
    code, out, _ = run(capsys, "iterate", "--overlap", "0.9")
    data = json.loads(out)
    assert code == 0 and data["steps"] == 3 and data["final_overlap"] <= 3 / 14 ** 0.5
    code, _, err = run(capsys, "reduce", "--overlap", "0.5", "--x", "0.3")
    assert code == 2 and err.count("\n") == 1


def test_classify_and_vector_checks(capsys, caplog):
    code, out, _ = run(capsys, "classify", "--a", "1,0,0", "--b", "0,1,0")
    assert code == 0 and json.loads(out)["kind"] == "orthogonal-definite"
    code, out, _ = run(capsys, "classify", "--a", "1.001,0,0", "--b", "1,0,0")
    assert code == 0 and json.loads(out)["kind"] == "parallel-definite"
    assert "normalizing" in caplog.text
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--a", "2,0,0", "--b", "1,0,0"])
    assert exc.value.code == 2


def test_sample(capsys):
    argv = ["sample", "--samples", "20000", "--eps", "0.01", "--seed", "4"]
    code, out, _ = run(capsys, *argv)
    data = json.loads(out)
    assert code == 0 and set(data) == {"eps", "samples", "fraction", "seed"}
    _, again, _ = run(capsys, *argv, "--jobs", "2")
    assert again == out
    with pytest.raises(SystemExit) as exc:
        main(["sample", "--samples", "10"])
    assert exc.value.code == 2


def test_export(capsys, tmp_path):
    code, out, _ = run(capsys, "export", "--diagram", "fig2_anchor.json", "--premise", "a=1", "--premise", "b=1")
    assert code == 0 and '"c" [label="c", shape=square]' in out
    asg = tmp_path / "a.json"
    asg.write_text('{"a": 0}')
    code, out, _ = run(capsys, "export", "--diagram", "fig1_reduction.json", "--assignment", str(asg))
    assert '"a" [label="a", shape=circle]' in out


def test_usage_errors(capsys):
    for argv in (["solve", "--diagram", "x.json", "--bogus"], ["frobnicate"], [],
                 ["solve", "--diagram", "fig1_reduction.json", "--premise", "a=7"],
                 ["sweep", "--lo", "0.9"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2
    code, _, err = run(capsys, "validate", "--diagram", "missing.json")
    assert code == 2 and "no such file" in err
    code, _, _ = run(capsys, "witness", "--overlap", "0.5", "--a", "1,0,0")
    assert code == 2
    code, _, _ = run(capsys, "sweep", "--lo", "0.5", "--hi", "0.9", "--n", "10")
    assert code == 2


def test_no_prefix_matching():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["sample", "--see", "1"])


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_help_texts(sub, capsys):
    with pytest.raises(SystemExit) as exc:
        main([sub, "--help"])
    assert exc.value.code == 0
    assert "usage: ks-forge " + sub in capsys.readouterr().out


def test_env_data_dir(capsys, tmp_path, monkeypatch):
    load_data("fig1_reduction.json").save(tmp_path / "only.json")
    monkeypatch.setenv("KS_FORGE_DATA", str(tmp_path))
    code, out, _ = run(capsys, "validate", "--diagram", "only.json")
    assert code == 0 and json.loads(out)["unrealized"] is True


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "ks_forge", "taylor"], capture_output=True, text=True)
    assert out.returncode == 0 and '"m"' in out.stdout
