"""End-to-end command line behavior, run in process through main()."""

import json
import os

import numpy as np
import pytest

from qesco import state_from_dict
from qesco.cli import main


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_charges_json_single_degree(capsys):
    code, doc = run_json(capsys, ["charges", "--L", "2", "--b", "3", "--N", "8"])
    assert code == 0
    assert doc["command"] == "charges"
    assert doc["L"] == 2 and doc["b"] == 3.0
    (entry,) = doc["results"]
    assert entry["N"] == 8
    assert entry["reality_ok"]
    assert entry["charges"] == pytest.approx([-5.0, 5.0], abs=1e-10)


def test_charges_output_is_bit_stable(tmp_path):
    argv = ["charges", "--L", "3", "--b", "5", "--N-range", "2:5"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_charges_csv_roundtrips_doubles(capsys):
    code = main(["charges", "--L", "2", "--b", "1", "--N", "7",
                 "--format", "csv"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "L,b,parity,N,k,F_real,F_imag"
    assert len(lines) == 3
    vals = [float(row.split(",")[5]) for row in lines[1:]]
    assert vals == pytest.approx([-np.sqrt(15.0), np.sqrt(15.0)], rel=1e-16)


def test_charges_table_preset(capsys):
    code, doc = run_json(capsys, ["charges", "--table1"])
    assert code == 0
    assert doc["table1"] and doc["L"] == 4 and doc["b"] == 5.0
    by_n = {e["N"]: e["charges"] for e in doc["results"]}
    assert set(by_n) == {3, 30, 100, 200, 300, 1000, 3000, 30000}
    assert by_n[3][0] == pytest.approx(-15.611, abs=5e-3)
    assert by_n[100][1] == pytest.approx(-15.0, abs=1e-9)


def test_complex_charges_need_opt_in(capsys):
    argv = ["charges", "--parity", "odd", "--L", "1", "--b", "0", "--N", "1"]
    assert main(argv) == 3
    capsys.readouterr()
    code, doc = run_json(capsys, argv + ["--allow-complex"])
    assert code == 0
    (entry,) = doc["results"]
    assert not entry["reality_ok"]
    assert entry["charges"] == []
    pairs = sorted(tuple(p) for p in entry["complex_charges"])
    assert pairs[0] == pytest.approx((0.0, -2.0), abs=1e-10)
    assert pairs[1] == pytest.approx((0.0, 2.0), abs=1e-10)


def test_state_json_roundtrip(capsys):
    code, doc = run_json(capsys, ["state", "--L", "2", "--b", "1",
                                  "--N", "3", "--branch", "-1"])
    assert code == 0
    assert doc["passed"]
    assert doc["residual"]["passed"]
    assert doc["shooting"]["converged"]
    assert doc["ghost"]["value"] <= 1e-9 * doc["ghost"]["scale"]
    st = state_from_dict(doc)
    assert st.N == 3 and st.params.L == 2
    assert st.E == 7.0


def test_state_csv_layout(capsys):
    code = main(["state", "--L", "2", "--b", "1", "--N", "3",
                 "--branch", "-1", "--format", "csv"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("parity,N,L,b,epsilon,branch,F,E,n,h_n")
    assert len(lines) == 1 + 4          # one row per coefficient
    last = lines[-1].split(",")
    assert last[8] == "3" and float(last[9]) == 1.0


def test_state_with_wrong_charge_fails(capsys):
    code = main(["state", "--L", "2", "--b", "1", "--N", "3",
                 "--F", "3.14159"])
    assert code == 3
    doc = json.loads(capsys.readouterr().out)
    assert not doc["passed"]
    assert doc["F"] == 3.14159


def test_state_with_exact_charge_passes(capsys):
    F = float(np.sqrt(1.0 + 2.0 * 3.0))
    code, doc = run_json(capsys, ["state", "--L", "2", "--b", "1",
                                  "--N", "3", "--F", repr(F)])
    assert code == 0
    assert doc["passed"]


def test_missing_arguments_exit_2(capsys):
    assert main(["charges", "--b", "1", "--N", "4"]) == 2      # no --L
    assert main(["state", "--L", "2"]) == 2                     # no --N
    assert main(["charges", "--L", "2"]) == 2                   # no degree
    assert main(["charges", "--L", "2", "--N-range", "5:1"]) == 2
    assert main(["charges", "--L", "0", "--N", "4"]) == 2       # bad domain
    capsys.readouterr()


def test_unwritable_out_exits_4(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("x")
    code = main(["charges", "--L", "2", "--N", "4",
                 "--out", str(blocker / "sub" / "o.json")])
    assert code == 4
    capsys.readouterr()


def test_out_dir_env_resolves_relative_paths(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QESCO_OUT_DIR", str(tmp_path))
    code = main(["charges", "--L", "2", "--N", "4", "--out", "sub/c.json"])
    assert code == 0
    doc = json.loads((tmp_path / "sub" / "c.json").read_text())
    assert doc["results"][0]["N"] == 4
    # absolute paths ignore the env var
    target = tmp_path / "abs.json"
    assert main(["charges", "--L", "2", "--N", "4",
                 "--out", str(target)]) == 0
    assert target.exists()
    capsys.readouterr()


def test_verify_subcommand(capsys):
    code, doc = run_json(capsys, ["verify", "--n-cases", "2", "--seed", "11"])
    assert code == 0
    assert doc["command"] == "verify"
    assert doc["passed"]
    assert doc["n_cases"] == 2
    assert set(doc["checks"]) >= {"residual", "ghost", "dual_route",
                                  "factorization", "elimination", "shooting"}


def test_verify_csv_trailer(capsys):
    code = main(["verify", "--n-cases", "2", "--seed", "11",
                 "--format", "csv"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "check,count,worst,tol,passed"
    assert lines[-1] == "all,2,,,True"


def test_basis_json(capsys):
    code, doc = run_json(capsys, ["basis", "--L", "2", "--b", "1",
                                  "--N-range", "1:4", "--branch", "1",
                                  "--f-grid", "7"])
    assert code == 0
    assert doc["command"] == "basis"
    assert doc["N_values"] == [1, 2, 3, 4]
    assert doc["n_states"] == 4
    assert len(doc["Q"]) == 4 and len(doc["Q"][0]) == 4
    assert doc["biorthogonality_residual"] < 1e-10
    assert len(doc["sweep"]["F"]) == 7
    assert doc["sweep"]["max_imag"] < 1e-8
    assert doc["pseudo_norm_signs"] == [-1, 1, -1, 1]


def test_basis_csv_rows_match_grid(capsys):
    code = main(["basis", "--L", "2", "--b", "1", "--N-range", "1:3",
                 "--branch", "1", "--f-grid", "9", "--format", "csv"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "F,E_0,E_1,E_2,max_imag"
    assert len(lines) == 1 + 9


def test_basis_degenerate_exits_3(capsys):
    assert main(["basis", "--L", "1", "--b", "0", "--N-range", "0:2"]) == 3
    capsys.readouterr()


def test_basis_needs_range(capsys):
    assert main(["basis", "--L", "2", "--b", "1", "--N", "4"]) == 2
    capsys.readouterr()
