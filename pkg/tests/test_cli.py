import json

import pytest

from sshkink import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_window_gap(capsys):
    code, out, err = run(capsys, "spectrum", "--W", "1", "--delta", "0.2", "--L", "200", "--window")
    doc = json.loads(out)
    assert code == 0 and abs(doc["gap"] - 0.4) <= 0.05
    assert doc["band_edges"] == pytest.approx([0.4, 2.0])
    assert doc["schema_version"] == 1 and doc["config"]["L"] == 200


def test_spectrum_gapless_warns(capsys):
    code, out, err = run(capsys, "spectrum", "--W", "1", "--delta", "0", "--L", "50")
    assert code == 0
    assert "GapClosed" in err
    assert json.loads(out)["warnings"]


@pytest.mark.parametrize("argv", [
    ["spectrum", "--W", "abc", "--delta", "0.2", "--L", "10"],
    ["bogus"],
    ["decay", "--side", "up"],
])
def test_malformed_flags_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2


def test_validation_errors_exit_2(capsys, tmp_path):
    assert run(capsys, "spectrum", "--W", "1", "--delta", "1", "--L", "10")[0] == 2
    assert run(capsys, "spectrum", "--W", "1", "--delta", "0.2")[0] == 2
    assert run(capsys, "verify", "--suite", "nope")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert run(capsys, "decay", "--input", str(bad), "--tail", "5:20")[0] == 2
    assert run(capsys, "hessian", "--sizes", "4,x")[0] == 2


def test_minimize_not_converged_writes_partial(capsys, tmp_path):
    out = tmp_path / "m.json"
    code, _, err = run(capsys, "minimize", "--L", "10", "--max-iters", "3", "--out", str(out))
    assert code == 4
    doc = json.loads(out.read_text())
    assert doc["critical_point"]["converged"] is False


def test_kink_decay_round_trip(capsys, tmp_path, ref_params):
    kink = tmp_path / "kink.json"
    table = tmp_path / "kink.csv"
    code, _, _ = run(capsys, "kink", "--half-width", "60", "--W", repr(ref_params.W),
                     "--delta", repr(ref_params.delta), "--out", str(kink), "--csv", str(table))
    assert code == 0
    doc = json.loads(kink.read_text())
    assert doc["critical_point"]["converged"] and doc["critical_point"]["residual_norm"] <= 1e-10
    lines = table.read_text().splitlines()
    assert lines[0] == "n,t_n,u_n" and "\r" not in table.read_text()
    for side in ("right", "left"):
        code, out, _ = run(capsys, "decay", "--input", str(kink), "--tail", "5:45", "--side", side)
        fit = json.loads(out)["fit"]
        assert code == 0 and fit["alpha"] > 0 and fit["r_squared"] > 0.99


def test_verify_schatten_reproducible(capsys):
    argv = ["verify", "--suite", "schatten", "--draws", "1000", "--seed", "7"]
    code_a, a, _ = run(capsys, *argv)
    code_b, b, _ = run(capsys, *argv)
    assert code_a == code_b == 0
    assert a.encode() == b.encode()
    assert json.loads(a)["passed"] is True


def test_verify_all_suites(capsys):
    code, out, err = run(capsys, "verify", "--draws", "20", "--seed", "1")
    assert code == 0
    assert "FAIL" not in err


def test_hessian_scan(capsys):
    code, out, _ = run(capsys, "hessian", "--sizes", "20,40")
    scan = json.loads(out)["scan"]
    assert code == 0 and all(r["lambda_min"] > 0 for r in scan)
