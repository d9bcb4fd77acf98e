import csv
import io
import json
import subprocess
import sys

import pytest

from rqfi.cli import ConfigError, main, parse_grid


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_grid():
    assert parse_grid("0.1:6:200") == (0.1, 6.0, 200, False)
    assert parse_grid("1e-3:10:5@geometric") == (1e-3, 10.0, 5, True)
    assert parse_grid("2") == (2.0, 2.0, 1, False)
    for bad in ("0:1:5@geometric", "1:0:5", "a:b:c", "1:2", "1:2:3@log"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_functionals(capsys):
    code, out, _ = run(["functionals", "--psf", "gaussian", "--xr", "1", "--eta", "0.4",
                        "--s", "0.1:6:200"], capsys)
    assert code == 0
    data = rows(out)
    assert len(data) == 200
    assert list(data[0]) == ["s", "delta", "gamma", "beta", "dk2", "eps_plus_sq",
                             "eps_minus_sq", "f_plus", "f_minus"]
    code, out, _ = run(["functionals", "--s", "1"], capsys)
    assert float(rows(out)[0]["delta"]) == pytest.approx(0.882497, abs=1e-6)


def test_eta_out_of_range(capsys):
    code, _, err = run(["functionals", "--eta", "0.7", "--s", "1"], capsys)
    assert code == 2
    assert "--eta" in err and "eta <= 1/2" in err


def test_bad_grid_exit(capsys):
    code, _, err = run(["bound", "--s", "0:1:3@geometric"], capsys)
    assert code == 2 and "--s" in err


def test_bound(capsys):
    code, out, _ = run(["bound", "--eta", "0.5", "--s", "0.001"], capsys)
    assert code == 0
    assert float(rows(out)[0]["normalized_bound"]) == pytest.approx(0.5, abs=1e-4)
    code, out, _ = run(["bound", "--s", "0.01:10:7@geometric"], capsys)
    assert len(rows(out)) == 21


def test_qfi_thermal(capsys):
    code, out, _ = run(["qfi", "--source", "thermal", "--N", "1e6", "--eta", "1e-6", "--s", "0.01"], capsys)
    assert code == 0
    val = float(rows(out)[0]["qfi_normalized"])
    assert 0 < val < 0.25


def test_qfi_corr_thermal(capsys):
    def value(s):
        _, out, _ = run(["qfi", "--source", "corr-thermal", "--w", "-1", "--N", "1",
                         "--eta", "1e-4", "--s", s], capsys)
        return float(rows(out)[0]["qfi"])

    assert value("1") > value("10")


def test_qfi_tmsv_variants(capsys):
    code, out, _ = run(["qfi", "--source", "tmsv", "--xi", "0.3", "--s", "0.5:2:3"], capsys)
    data = rows(out)
    assert code == 0 and len(data) == 6
    assert {r["params"].split("variant=")[1] for r in data} == {"squared_derivative", "as_printed"}


def test_qfi_json(capsys):
    code, out, _ = run(["qfi", "--source", "fock", "--N-plus", "1", "--N-minus", "1",
                        "--s", "1", "--format", "json"], capsys)
    data = json.loads(out)
    assert code == 0 and data[0]["family"] == "fock" and isinstance(data[0]["qfi"], float)


def test_bad_source_params(capsys):
    code, _, err = run(["qfi", "--source", "corr-thermal", "--w", "2", "--s", "1"], capsys)
    assert code == 2 and "corr-thermal" in err


def test_oracle_tmsv(capsys):
    code, out, _ = run(["oracle", "--xi", "0.3", "--eta", "0.4", "--s", "1"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "squared_derivative"


def test_oracle_fock(capsys):
    code, out, _ = run(["oracle", "--source", "fock", "--N-plus", "1", "--N-minus", "1",
                        "--s", "1"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["points"][0]["rel_dev"] < 1e-3


def test_oracle_budget_exit(capsys):
    code, _, err = run(["oracle", "--source", "thermal", "--N", "1", "--s", "1", "--n-max", "2"], capsys)
    assert code == 3 and "image_tail" in err


def test_measure(tmp_path, capsys):
    out = tmp_path / "run.json"
    samples = tmp_path / "counts.csv"
    code, _, _ = run(["measure", "--output", str(out), "--samples-csv", str(samples)], capsys)
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["variance_ratio"] == pytest.approx(0.8800336008278958, rel=1e-12)
    assert len(samples.read_text().splitlines()) == 10_001


def test_measure_validation(capsys):
    assert run(["measure", "--repeats", "10"], capsys)[0] == 2
    assert run(["measure", "--grid", "5:6:50", "--s", "0.5", "--N-minus", "0"], capsys)[0] == 3


def test_figures(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["figures", "--output", str(a)], capsys)[0] == 0
    assert run(["figures", "--output", str(b)], capsys)[0] == 0
    files = sorted(p.name for p in a.iterdir())
    assert files == ["fig2.csv", "fig3.csv", "fig4.csv", "fig5.csv", "fig6.csv", "manifest.json"]
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["schema"] == "v1" and "code_version" in manifest
    fig2 = rows((a / "fig2.csv").read_text())
    assert len(fig2) == 400
    assert float(fig2[0]["bound_eta0.5"]) == pytest.approx(0.5, abs=1e-4)


def test_figures_threads_identical(tmp_path, capsys, monkeypatch):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["figures", "--output", str(a), "--s", "0.01:5:30@geometric"], capsys)
    monkeypatch.setenv("RQFI_THREADS", "4")
    run(["figures", "--output", str(b), "--s", "0.01:5:30@geometric"], capsys)
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()


def test_figures_io_error(capsys):
    code, _, err = run(["figures", "--output", "/etc/passwd/x"], capsys)
    assert code == 4 and "I/O" in err


def test_bad_threads(capsys, monkeypatch):
    monkeypatch.setenv("RQFI_THREADS", "many")
    assert run(["bound", "--s", "1"], capsys)[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rqfi", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
