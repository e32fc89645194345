import csv
import io
import json

import mpmath as mp
import pytest

from qpainleve import cli, qpvi

QUICK = {
    "check-lemmas": ["-K", "2", "--n-max", "2", "--pair-weight-cap", "3"],
    "check-braiding": ["--max-weight", "1", "--matrix-points", "3"],
    "eval-tau": ["-K", "4", "-N", "3"],
    "check-bilinear": ["-K", "4", "-N", "3", "--tol", "1e-6"],
    "check-qpvi": ["-K", "4", "-N", "3", "--tol", "1e-5", "--steps", "2", "--trace", "1", "--convention-probe"],
    "check-riemann": ["-K", "5", "-N", "3", "--tol", "1e-3"],
}


def run(capsys, argv):
    code = cli.main(argv)
    return code, capsys.readouterr()


@pytest.mark.parametrize("command", sorted(QUICK))
def test_quick_runs_pass(capsys, command):
    code, out = run(capsys, [command] + QUICK[command])
    assert code == 0, out.out[-2000:]
    data = json.loads(out.out)
    if command != "eval-tau":
        assert data and all(r["pass"] for r in data)
        assert {"identity", "params", "mode", "pass", "witness"} <= set(data[0])


def test_corrupted_identity_exits_one(capsys, monkeypatch):
    real = qpvi.bilinear_terms

    def broken(fam, t, ctx):
        terms = real(fam, t, ctx)
        terms["bilinear_3"] = terms["bilinear_3"] + [mp.mpf("1e-3") * abs(terms["bilinear_3"][0])]
        return terms

    monkeypatch.setattr(qpvi, "bilinear_terms", broken)
    code, out = run(capsys, ["check-bilinear"] + QUICK["check-bilinear"])
    assert code == 1
    verdicts = {r["identity"]: r["pass"] for r in json.loads(out.out)}
    assert verdicts["bilinear_3"] is False and verdicts["bilinear_1"] is True


def test_resonance_exits_two(capsys):
    code, out = run(capsys, ["eval-tau", "-K", "2", "-N", "1", "--sigma", "0.5"])
    assert code == 2
    assert "ResonanceError" in out.err


def test_bad_domain_exits_two(capsys):
    code, out = run(capsys, ["check-riemann", "-K", "2", "-N", "1", "--q", "0.3", "--t", "0.1"])
    assert code == 2 and "DomainError" in out.err


def test_grid_csv(capsys):
    code, out = run(capsys, ["eval-tau", "-K", "3", "-N", "2", "--family", "formula", "--grid", "0.01,2,3"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out.out)))
    assert rows[0] == ["t", "formula_tau1", "formula_tau2", "formula_tau3", "formula_tau4"]
    assert len(rows) == 4
    assert mp.mpf(rows[2][0]) == 2 * mp.mpf(rows[1][0])


def test_eval_tau_structure(capsys):
    code, out = run(capsys, ["eval-tau", "-K", "3", "-N", "2"])
    data = json.loads(out.out)
    assert set(data["families"]) == {"bilinear", "formula"}
    assert set(data["families"]["formula"]["tau1"]) == {"t", "qt", "t/q"}
    assert data["metadata"]["K"] == 3


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"weight_cap": 3, "fourier_window": 2, "q": 0.25, "family": "formula"}))
    _, out = run(capsys, ["eval-tau", "--config", str(cfg)])
    data = json.loads(out.out)
    assert data["metadata"]["K"] == 3 and data["metadata"]["q"] == "0.25"
    assert set(data["families"]) == {"formula"}
    _, out = run(capsys, ["eval-tau", "--config", str(cfg), "-K", "2"])
    assert json.loads(out.out)["metadata"]["K"] == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"weigth_cap": 3}))
    with pytest.raises(SystemExit):
        cli.main(["eval-tau", "--config", str(cfg)])


def test_output_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out = run(capsys, ["check-lemmas"] + QUICK["check-lemmas"] + ["-o", str(target)])
    assert code == 0 and out.out == ""
    assert json.loads(target.read_text())[0]["identity"] == "transpose"


@pytest.mark.parametrize("command", ["check-lemmas", "check-bilinear", "eval-tau"])
def test_reruns_are_byte_identical(capsys, command):
    first = run(capsys, [command] + QUICK[command])[1].out
    second = run(capsys, [command] + QUICK[command])[1].out
    assert first == second


def test_worker_processes_keep_the_report_identical(capsys, monkeypatch):
    argv = ["check-braiding"] + QUICK["check-braiding"]
    serial = run(capsys, argv)[1].out
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    parallel = run(capsys, argv)[1].out
    assert serial == parallel
