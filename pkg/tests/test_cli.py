import csv
import json

import pytest

from ripsim.cli import main, parse_range


def _run(capsys, *args):
    code = main(list(args))
    return code, capsys.readouterr()


def _summary(path, cmd):
    return json.loads((path / f"{cmd}_summary.json").read_text())


def test_parse_range():
    assert list(parse_range("10:30:10", "x")) == [10, 20, 30]
    assert list(parse_range("12.5", "x")) == [12.5]
    assert parse_range(None, "x") is None


def test_fidelity_command(tmp_path, capsys):
    code, _ = _run(capsys, "fidelity", "--out", str(tmp_path))
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "fidelity.csv").open()))
    assert len(rows) == 12
    assert _summary(tmp_path, "fidelity")["results"]["max_f_g_deviation"] < 5e-4


def test_fidelity_single_alpha(tmp_path, capsys):
    assert _run(capsys, "fidelity", "--alpha", "0.97", "--out", str(tmp_path))[0] == 0
    assert _summary(tmp_path, "fidelity")["inputs"]["alpha"] == 0.97


def test_schedule_command(tmp_path, capsys):
    code, _ = _run(capsys, "schedule", "--target", "Z2Z3", "--out", str(tmp_path))
    assert code == 0
    res = _summary(tmp_path, "schedule")["results"]
    assert res["segments"] == 8 and res["pi_counts"] == [4, 2, 2, 2]
    assert (tmp_path / "schedule.txt").read_text().startswith("# ripsim echo schedule")


def test_rates_and_ghz(tmp_path, capsys):
    assert _run(capsys, "rates", "--detuning-mhz", "20:40:10", "--out", str(tmp_path))[0] == 0
    header = (tmp_path / "rates.csv").read_text().splitlines()[0]
    assert header == "detuning_mhz,rate_zz_mhz,rate_zzz_mhz,rate_zzzz_mhz,dephasing_mhz"
    assert _run(capsys, "ghz", "--noise", "static", "--out", str(tmp_path))[0] == 0
    assert _summary(tmp_path, "ghz")["results"]["fidelity"] < 1


def test_tuneup_command(tmp_path, capsys):
    code, _ = _run(capsys, "tuneup", "--pair", "2,3", "--detuning-mhz", "20", "--out", str(tmp_path))
    assert code == 0
    res = _summary(tmp_path, "tuneup")["results"]
    assert abs(abs(res["mu_target_rad"]) - 1.5707963) < 1e-4


def test_unreachable_exits_2(tmp_path, capsys):
    code, out = _run(capsys, "tuneup", "--pair", "2,3", "--detuning-mhz", "5", "--out", str(tmp_path))
    assert code == 2
    assert json.loads(out.err)["error"] == "Unreachable"


def test_malformed_device_exits_1(tmp_path, capsys):
    dev = tmp_path / "dev.toml"
    dev.write_text('[cavity]\nfreq_ghz = 7.0\n[[qubit]]\nfreq_ghz = 5.0\nanharm_mhz = -300\ng_mhz = 50\nt1_us = -3\n')
    code, out = _run(capsys, "rates", "--device", str(dev), "--out", str(tmp_path))
    assert code == 1
    err = json.loads(out.err)
    assert err["key"] == "qubit[0].t1_us"


def test_unknown_command_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 1
    assert json.loads(capsys.readouterr().err)["error"] == "UsageError"


@pytest.mark.parametrize(
    "args",
    [
        ("rates", "--detuning-mhz", "a:b"),
        ("tuneup", "--pair", "1,9"),
        ("schedule", "--target", "Z1Z9"),
        ("ghz", "--device", "nowhere"),
    ],
)
def test_bad_inputs_exit_1(tmp_path, capsys, args):
    code, out = _run(capsys, *args, "--out", str(tmp_path))
    assert code == 1
    assert "error" in json.loads(out.err)
