import csv
import io
import json
from crum.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_families_list(capsys):
    code, out, _ = run_cli(capsys, "families", "list")
    assert code == 0
    for name in ("hermite", "laguerre", "jacobi", "q_hermite", "askey_wilson"):
        assert name in out


def test_chain_writes_report(tmp_path, capsys):
    out_file = tmp_path / "report.json"
    code, out, err = run_cli(capsys, "chain", "--family", "q_hermite",
                             "--param", "q=0.5", "--depth", "2", "--nmax", "5",
                             "--out", str(out_file))
    assert code == 0
    report = json.loads(out_file.read_text())
    assert report["schema"] == "crum-report/1"
    assert report["status"] == "pass"
    assert report["config"]["family"] == "q_hermite"
    assert out == ""          # nothing but the report may reach stdout


def test_chain_stdout_only_json(capsys):
    code, out, err = run_cli(capsys, "chain", "--family", "hermite",
                             "--depth", "1", "--nmax", "3", "--out", "-")
    assert code == 0
    parsed = json.loads(out)   # stdout must parse as a single JSON document
    assert parsed["family"] == "hermite"


def test_parameter_error_exit_code(capsys):
    code, out, err = run_cli(capsys, "chain", "--family", "laguerre",
                             "--param", "g=0.5", "--depth", "1")
    assert code == 2
    assert "g > 1" in err


def test_malformed_param_exit_code(capsys):
    code, _, err = run_cli(capsys, "chain", "--family", "hermite", "--param", "oops")
    assert code == 2


def test_unknown_subcommand_usage_error(capsys):
    assert main(["frobnicate"]) == 2


def test_limit_csv(tmp_path, capsys):
    out_csv = tmp_path / "limits.csv"
    code, _, _ = run_cli(capsys, "limit", "--mode", "c-to-inf",
                         "--c", "10,100,1000", "--csv", str(out_csv))
    assert code == 0
    text = out_csv.read_text()
    assert "\r" not in text                      # LF line endings
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows[0]["mode"] == "c_to_inf"
    slopes = {float(r["fitted_slope"]) for r in rows}
    assert all(abs(s - 1.0) <= 0.25 for s in slopes)


def test_scan_gamma0_csv(capsys):
    code, out, _ = run_cli(capsys, "scan-gamma0", "--csv", "-")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["mode"] for r in rows} == {"gamma_to_0"}
    assert {"label", "parameter", "max_error", "fitted_slope"} <= set(rows[0])


def test_verify_subcommand_round_trip(tmp_path, capsys):
    out_file = tmp_path / "report.json"
    run_cli(capsys, "chain", "--family", "hermite", "--depth", "1",
            "--nmax", "3", "--out", str(out_file))
    code, _, err = run_cli(capsys, "verify", str(out_file))
    assert code == 0
    assert "re-verified hermite" in err


def test_seed_env_override(tmp_path, capsys, monkeypatch):
    out_file = tmp_path / "report.json"
    monkeypatch.setenv("CRUM_SEED", "777")
    run_cli(capsys, "chain", "--family", "hermite", "--depth", "1",
            "--nmax", "3", "--out", str(out_file))
    report = json.loads(out_file.read_text())
    assert report["seed"] == 777
