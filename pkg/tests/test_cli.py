import csv
import os
import subprocess
import sys

import pytest

from kslab import cli
from kslab.states import GaussianSpec, parse_state_spec


def run(argv, capsys):
    code = cli.parse_and_dispatch(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_check_relations_csv(tmp_path, capsys):
    out_csv = tmp_path / "rel.csv"
    code, out, _ = run(["check-relations", "--n", "1", "--c", "1", "--grid", "1024", "--a", "1.0", "--out", str(out_csv)], capsys)
    assert code == 0
    assert out_csv.read_text().splitlines()[0] == "name,residual,tolerance,status"
    rows = list(csv.reader(out_csv.open()))[1:]
    assert all(r[3] in ("pass", "reported") for r in rows)
    assert any(r[0] == "comm_A2n_B1" and r[3] == "reported" for r in rows)


def test_fantasy_check(capsys):
    code, out, _ = run(["fantasy-check", "--bound", "50"], capsys)
    assert code == 0
    assert "odd multiple" in out and "0 consistent" in out


def test_divisibility_message(capsys):
    code, _, err = run(["check-relations", "--n", "3", "--grid", "100"], capsys)
    assert code == 1
    assert "N must be divisible by 12; minimal valid N: 108" in err


@pytest.mark.parametrize(
    "argv, fragment",
    [
        (["frobnicate"], "invalid choice"),
        (["check-relations", "--n", "abc"], "invalid int"),
        (["audit", "--delta", "0.6"], "delta"),
        (["sweep-disturbance", "--n-list", "2,x"], "comma-separated"),
        (["check-relations", "--state", "gaussian:x0=0,width=1"], "malformed state field"),
        (["check-relations", "--state", "lorentzian:x0=0"], "unknown state kind"),
        (["fantasy-check", "--bound", "0"], "--bound"),
        (["two-dof", "--grid", "100"], "divisible by 8"),
    ],
)
def test_validation_errors(argv, fragment, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1
    assert fragment in err


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(["mermin", "--out", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == 1 and "not writable" in err


def test_tolerance_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(cli, "EXACT_TOL", 0.0)
    code, _, err = run(["check-relations", "--n", "1", "--grid", "256"], capsys)
    assert code == 2
    assert "FAILED" in err and "residual" in err


def test_mermin_and_two_dof(tmp_path, capsys):
    code, out, _ = run(["mermin", "--json", str(tmp_path / "m.json")], capsys)
    assert code == 0 and "consistent assignments: 0 of 16" in out
    code, out, _ = run(["two-dof", "--out", str(tmp_path / "t.csv")], capsys)
    assert code == 0
    assert (tmp_path / "t.csv").read_text().startswith("name,residual,tolerance,status\n")


def test_sweep_outputs(tmp_path, capsys):
    argv = [
        "sweep-disturbance", "--n-list", "2,4", "--k-max", "1",
        "--state", "gaussian:x0=0,p0=0,sigma=0.0833333",
        "--out", str(tmp_path / "s.csv"), "--json", str(tmp_path / "s.json"), "--svg", str(tmp_path / "s.svg"),
    ]
    code, out, _ = run(argv, capsys)
    assert code == 0 and "slope" in out
    header = (tmp_path / "s.csv").read_text().splitlines()[0]
    assert header == "n,k,state_id,delta_norm,sym_delta_norm,product_delta_norm"
    assert (tmp_path / "s.svg").read_text().startswith("<svg")


def test_audit_outputs(tmp_path, capsys):
    code, out, _ = run(
        ["audit", "--n", "8", "--grid", "4096", "--k-max", "1", "--state", "gaussian:sigma=0.0833333333",
         "--json", str(tmp_path / "a.json"), "--out", str(tmp_path / "a.csv")],
        capsys,
    )
    assert code == 0 and "contradiction=True" in out and "verdict: pass" in out
    assert '"overall": "pass"' in (tmp_path / "a.json").read_text()


def test_bell_small(capsys):
    code, out, _ = run(["bell", "--samples", "100000", "--pairs", "5", "--seed", "3"], capsys)
    assert code == 0 and "pass rates" in out


def test_parse_state_spec():
    assert parse_state_spec("gaussian:x0=0.1,p0=-1,sigma=0.1") == GaussianSpec(0.1, -1.0, 0.1)
    assert parse_state_spec("gaussian:") == GaussianSpec()


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "kslab", "fantasy-check", "--bound", "3"], capture_output=True, text=True, env=os.environ
    )
    assert res.returncode == 0 and "0 consistent" in res.stdout


def test_outputs_are_byte_identical(tmp_path, capsys):
    blobs = []
    for tag in ("a", "b"):
        run(["check-relations", "--n", "2", "--grid", "512", "--out", str(tmp_path / f"{tag}.csv"),
             "--json", str(tmp_path / f"{tag}.json")], capsys)
        blobs.append(((tmp_path / f"{tag}.csv").read_bytes(), (tmp_path / f"{tag}.json").read_bytes()))
    assert blobs[0] == blobs[1]
