from __future__ import annotations

import json
import subprocess
import sys

import pytest

from orbitforge.cli import main, run


def report(argv):
    return run(argv)


def test_solve_ff_report():
    code, rep = report(["solve-ff", "--type", "A2", "--gamma", "", "--K", "1", "--seeds", '{"a1":"2","a2":"3"}'])
    assert code == 0
    assert rep["result"]["c"]["1,1"] == "7/5"
    assert rep["verification"]["verified"] is True
    assert isinstance(rep["timing"]["elapsed_approx"], float)


def test_good_and_cybe():
    code, rep = report(["good", "--type", "B2", "--gamma", "2"])
    assert code == 0 and rep["result"]["good"] is True
    assert rep["verification"]["verified"] is True
    code, rep = report(["good", "--type", "G2", "--gamma", ""])
    assert code == 0 and rep["result"]["good"] is False
    code, rep = report(["verify-cybe", "--type", "A1"])
    assert code == 0 and rep["result"]["invariant"] is True


def test_exit_codes():
    assert report(["solve-ff", "--type", "A2", "--seeds", '{"a1":"2","a2":"-2"}'])[0] == 2
    assert report(["cohomology", "--type", "B2", "--lambda", "1,1", "--samples", "[[1,0]]"])[0] == 2
    assert report(["solve-ff", "--type", "A2", "--K", "1/0", "--seeds", "{}"])[0] == 1
    assert report(["solve-ff", "--type", "A2", "--seeds", '{"a1":"2.5","a2":"1"}'])[0] == 1
    assert report(["orbit", "--type", "A2", "--gamma", "1,2"])[0] == 1
    assert report(["orbit", "--type", "B1"])[0] == 1
    assert report(["frobnicate"])[0] == 1
    assert report([])[0] == 1


def test_orbit_and_root_system():
    code, rep = report(["orbit", "--type", "A2", "--gamma", "1"])
    assert code == 0 and rep["result"]["betti"] == [1, 1, 1]
    assert rep["result"]["gamma"] == [1]
    code, rep = report(["root-system", "--type", "G2"])
    assert rep["result"]["counts"]["roots"] == 12


def test_parametrize_both_directions():
    code, rep = report(["parametrize", "--type", "A2", "--lambda", "1.0986122886681098,0.6931471805599453"])
    assert code == 0
    c = rep["result"]["c_approx"]
    assert abs(c["1,1"] - 1.4) < 1e-12
    code, rep = report(["parametrize", "--type", "A2", "--coeffs", '{"1,0":"2","0,1":"3","1,1":"7/5"}'])
    assert code == 0 and rep["verification"]["verified"]
    lam = rep["result"]["parametrization"]["lambda_approx"]
    assert abs(lam[0] - 1.0986122886681098) < 1e-9


def test_cohomology_modes():
    code, rep = report(["cohomology", "--type", "A2", "--K", "1"])
    assert rep["result"]["h_dims"] == [1, 0, 2, 0, 2, 0, 1]
    code, rep = report(["cohomology", "--type", "D4", "--gamma", "2", "--max-degree", "2"])
    assert code == 0 and rep["result"]["h_dims"] == [1, 0, 3]
    code, rep = report(
        ["cohomology", "--type", "A2", "--lambda", "1,1", "--samples", '[["1","1"],["2","-3"]]']
    )
    assert code == 0 and [p["h_dims"][2] for p in rep["result"]["profiles"]] == [2, 2]


def test_catalog_sweep_parallel_matches_serial():
    _, serial = report(["catalog"])
    _, parallel = report(["catalog", "--jobs", "2"])
    assert serial["result"] == parallel["result"]
    assert serial["verification"]["verified"]
    keys = [r["key"] for r in serial["result"]["entries"]]
    assert keys == sorted(keys)


@pytest.mark.parametrize(
    "argv",
    [
        ["solve-ff", "--type", "A3", "--seeds", '{"a1":"1","a2":"2","a3":"3"}'],
        ["good", "--type", "A2"],
        ["orbit", "--type", "B2", "--gamma", "2"],
        ["cohomology", "--type", "A2", "--gamma", "1"],
    ],
)
def test_json_round_trip(argv, capsys):
    assert main(argv) == 0
    out = capsys.readouterr().out
    text = json.dumps(json.loads(out), sort_keys=True, indent=2)
    assert text == out.rstrip("\n")


def test_out_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    assert main(["verify-cybe", "--type", "A2", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["result"]["invariant"] is True


def test_console_script_streams():
    proc = subprocess.run(
        [sys.executable, "-m", "orbitforge.cli", "solve-ff", "--type", "A2", "--seeds", '{"a1":"2","a2":"-2"}'],
        capture_output=True,
        text=True,
        env={"ORBITFORGE_LOG": "debug", "PATH": ""},
    )
    assert proc.returncode == 2
    assert json.loads(proc.stdout)["error"]["type"] == "InadmissibleSeedError"
    assert "zero denominator" in proc.stderr


def test_seeds_as_list():
    code, rep = report(["solve-ff", "--type", "A3", "--seeds", "1,2,3"])
    assert code == 0 and rep["result"] == report(
        ["solve-ff", "--type", "A3", "--seeds", '{"a1":"1","a2":"2","a3":"3"}'])[1]["result"]
    assert report(["solve-ff", "--type", "A3", "--seeds", "1,2"])[0] == 1
