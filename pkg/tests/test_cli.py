import csv
import io as _io
import json
import subprocess
import sys

import pytest

from bridgeloss import io
from bridgeloss.cli import main
from bridgeloss.conductivity import TA
from bridgeloss.resonance import DcmParams, synthesize_trace


def rows_of(text):
    return list(csv.DictReader(_io.StringIO(text)))


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    d = tmp_path_factory.mktemp("suite")
    assert main(["synth", "suite", "--out-dir", str(d), "--seed", "3"]) == 0
    return d


def test_conductivity_table(capsys):
    assert main(["conductivity", "--material", "al", "--t", "0.4:1.15:0.05", "--f", "6.15e9"]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert len(rows) == 16
    assert float(rows[0]["T"]) == 0.4 and float(rows[-1]["T"]) == pytest.approx(1.15)


def test_conductivity_low_t_row(capsys):
    assert main(["conductivity", "--material", "ta", "--t", str(0.01 * TA.tc), "--f", "6GHz"]) == 0
    row = rows_of(capsys.readouterr().out)[0]
    assert float(row["s2"]) == pytest.approx(76.85, rel=0.005)


def test_conductivity_json_format(capsys):
    assert main(["conductivity", "--t", "500mK", "--f", "6GHz", "--format", "json"]) == 0
    body = json.loads(capsys.readouterr().out)["body"]
    assert body["columns"][0] == "T" and len(body["rows"]) == 1


def test_usage_errors(capsys, tmp_path):
    assert main(["conductivity", "--material", "nb", "--t", "1", "--f", "6e9"]) == 2
    assert "unknown material" in capsys.readouterr().err
    assert main(["conductivity", "--t", "1 GHz", "--f", "6e9"]) == 2
    assert main(["predict", "--p", "2"]) == 2
    assert main(["conductivity", "--t", "1", "--f", "6e9", "--config", str(tmp_path / "no.toml")]) == 2
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_synth_byte_identical(tmp_path, suite):
    again = tmp_path / "again"
    assert main(["synth", "suite", "--out-dir", str(again), "--seed", "3"]) == 0
    files = sorted(p.name for p in suite.iterdir())
    assert files == sorted(p.name for p in again.iterdir())
    assert len(files) == 18
    for name in files:
        assert (suite / name).read_bytes() == (again / name).read_bytes()
    other = tmp_path / "other"
    main(["synth", "trace", "--out-dir", str(other), "--seed", "4"])
    assert (other / "trace_nab8.csv").read_bytes() != (suite / "trace_nab8.csv").read_bytes()


def test_synth_noise_free_is_exact(tmp_path):
    main(["synth", "trace", "--out-dir", str(tmp_path), "--noise", "0"])
    t = io.read_trace(tmp_path / "trace_nab35.csv")
    q_i = 4.5e5
    fit_out = tmp_path / "out"
    assert main(["fit", str(tmp_path / "trace_nab35.csv"), "--out-dir", str(fit_out)]) == 0
    rep = json.loads((fit_out / "fit_report.json").read_text())["body"]["fits"][0]
    assert rep["q_i"] == pytest.approx(q_i, rel=1e-8)
    assert len(t.freqs) == 401


def test_fit_batch_deterministic(tmp_path, suite):
    traces = sorted(str(p) for p in suite.glob("trace_*.csv") if ".meta" not in p.name)
    assert len(traces) == 4
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["fit", *traces, "--out-dir", str(a)]) == 0
    assert main(["fit", *traces, "--out-dir", str(b), "--jobs", "4", "--overlay"]) == 0
    ta, tb = (a / "fit_report.json").read_text(), (b / "fit_report.json").read_text()
    assert io.report_body_text(ta) == io.report_body_text(tb)
    fits = json.loads(ta)["body"]["fits"]
    assert [f["file"] for f in fits] == traces
    assert all(0.3 < f["n_p"] < 3 for f in fits)
    assert len(rows_of((a / "fit_report.csv").read_text())) == 4
    assert (b / "trace_nab0_overlay.csv").exists()


def test_fit_low_and_high_power_pair(tmp_path):
    p = DcmParams.from_qi(6.15e9, 4.5e5, 3e5, 0.05, 0.8 - 0.3j)
    for name, power in (("low", -83.0), ("high", -33.0)):
        io.write_trace(tmp_path / f"{name}.csv",
                       synthesize_trace(p, noise_sigma=0.01, seed=1, applied_power=power))
    out = tmp_path / "out"
    assert main(["fit", str(tmp_path / "low.csv"), str(tmp_path / "high.csv"), "--out-dir", str(out)]) == 0
    fits = json.loads((out / "fit_report.json").read_text())["body"]["fits"]
    assert fits[1]["n_p"] / fits[0]["n_p"] == pytest.approx(1e5, rel=0.05)
    # residual_rms is relative to |baseline|, the same units as the injected noise
    assert all(f["converged"] and f["residual_rms"] < 0.01 for f in fits)


def test_fit_records_parse_error(tmp_path, suite):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    out = tmp_path / "out"
    assert main(["fit", str(empty), "--out-dir", str(out)]) == 2
    body = json.loads((out / "fit_report.json").read_text())["body"]
    assert body["errors"][0]["error"].startswith("parse")
    good = str(suite / "trace_nab8.csv")
    assert main(["fit", str(empty), good, "--out-dir", str(out)]) == 0
    body = json.loads((out / "fit_report.json").read_text())["body"]
    assert len(body["fits"]) == 1 and len(body["errors"]) == 1


def test_sweep_participation(tmp_path, suite):
    sweeps = [str(suite / f"tsweep_nab{n}.csv") for n in (8, 20, 35)]
    out = tmp_path / "out"
    args = ["sweep", *sweeps, "--baseline", str(suite / "tsweep_nab0.csv"), "--out-dir", str(out)]
    assert main(args + ["--delta", "--curves"]) == 0
    fits = json.loads((out / "sweep_report.json").read_text())["body"]["participation_fits"]
    ps = [f["p"] for f in fits]
    assert len(ps) == 3 and ps[0] < ps[1] < ps[2]
    assert ps == pytest.approx([0.0085, 0.02, 0.042], rel=0.05)
    assert (out / "tsweep_nab35_delta.csv").exists() and (out / "tsweep_nab35_model.csv").exists()
    assert main(args + ["--shared", "--name", "shared"]) == 0
    shared = json.loads((out / "shared.json").read_text())["body"]["participation_fits"]
    assert len(shared) == 4 and len({f["q_other_inv"] for f in shared}) == 1


def test_sweep_delta_needs_baseline(tmp_path, suite):
    assert main(["sweep", str(suite / "tsweep_nab8.csv"), "--delta", "--out-dir", str(tmp_path)]) == 2


def test_power_sweep(tmp_path, suite):
    assert main(["sweep", str(suite / "psweep_nab35.csv"), "--out-dir", str(tmp_path)]) == 0
    row = json.loads((tmp_path / "sweep_report.json").read_text())["body"]["power_fits"][0]
    assert row["q_const_inv"] == pytest.approx(5e-7, rel=0.1)
    assert min(row["q_tls0_inv"], row["n_c"], row["beta"], row["q_const_inv"]) >= 0


def test_predict_table(capsys, caplog):
    assert main(["predict", "--t", "0.01,1.1,1.3"]) == 0
    captured = capsys.readouterr()
    rows = rows_of(captured.out)
    at = {(float(r["T"]), float(r["p"])): float(r["df_over_f0"]) for r in rows}
    assert all(at[(0.01, p)] == 0.0 for p in (0, 0.006, 0.02, 0.034))
    shifts = [at[(1.1, p)] for p in (0, 0.006, 0.02, 0.034)]
    assert shifts[0] > shifts[1] > shifts[2] > shifts[3]
    assert rows_of(captured.out)[-1]["df_over_f0"] == "nan"
    assert "critical temperature" in caplog.text


def test_fields_command(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("region,h_mag_sq,weight\nchip,0.966,1\nbridge,0.034,1\nvolume,1e6,1e-9\n")
    out = tmp_path / "out"
    assert main(["fields", str(path), "--f", "6e9", "--material", "al", "--t", "0.9",
                 "--out-dir", str(out)]) == 0
    rep = json.loads((out / "field_report.json").read_text())["body"]["report"]
    assert rep["p"] == pytest.approx(0.034, abs=1e-15)
    assert rep["q_s_inv"] > 0
    only_chip = tmp_path / "c.csv"
    only_chip.write_text("region,h_mag_sq,weight\nchip,1,1\n")
    assert main(["fields", str(only_chip), "--f", "6e9", "--out-dir", str(out)]) == 1
    assert main(["fields", str(only_chip), "--out-dir", str(out)]) == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "bridgeloss.cli", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "bridgeloss" in res.stdout
