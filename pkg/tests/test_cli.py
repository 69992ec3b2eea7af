import csv
import json
import subprocess
import sys

import pytest

from landscape_lab.cli import main

from cli_cases import COMMANDS, outputs


def run(args, tmp_path, name="o", threads=None):
    out = tmp_path / name
    out.mkdir(exist_ok=True)
    extra = [] if threads is None else ["--threads", str(threads)]
    return main([*args, "--out-dir", str(out), *extra]), out


@pytest.mark.parametrize("args", COMMANDS, ids=lambda a: "-".join(a[:3]))
def test_every_command_succeeds(args, tmp_path, capsys):
    code, out = run(args, tmp_path)
    assert code == 0, capsys.readouterr().err
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"][1] == args[0] and man["seed"] == 0
    assert sorted(man["files"]) == sorted(outputs(out))


def test_global_flags_before_subcommand(tmp_path):
    out = tmp_path / "o"
    assert main(["--seed", "3", "--out-dir", str(out), "toy"]) == 0
    assert json.loads((out / "manifest.json").read_text())["seed"] == 3


def test_bad_flag_exits_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["toy", "--no-such-flag"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["toy", "--threads", "-1", "--out-dir", str(tmp_path)])
    assert exc.value.code == 2


def test_usage_error_exits_2(tmp_path):
    assert run(["simulate", "--family", "toy"], tmp_path)[0] == 2


def test_analysis_error_exits_1(tmp_path, capsys):
    code, _ = run(["descent", "--k", "5", "--t", "10"], tmp_path)
    assert code == 1
    assert "BadTarget" in capsys.readouterr().err


def test_sat2_tables(tmp_path):
    _, out = run(["sat2"], tmp_path)
    rbar = {int(r["k"]): float(r["rbar"]) for r in csv.DictReader(open(out / "sat2_rbar.csv"))}
    assert rbar[11] == pytest.approx(70.3, rel=0.01)
    ta = {int(r["k"]): r for r in csv.DictReader(open(out / "sat2_ta.csv"))}
    assert (ta[26]["t"], ta[26]["a"]) == ("0.19", "0.01")
    r17 = list(csv.DictReader(open(out / "sat2_r17.csv")))
    assert float(r17[0]["r"]) == pytest.approx(12.5, abs=0.05)


def test_missing_cells_are_empty(tmp_path):
    _, out = run(["tsp", "--cities", "20", "--mode", "sample", "--samples", "500"], tmp_path)
    rows = list(csv.DictReader(open(out / "tsp_rates.csv")))
    assert any(r["en_imp"] == "" for r in rows)
    assert all(r["e_imp"] != "" for r in rows)


def test_dat_format(tmp_path):
    _, out = run(["toy", "--format", "dat"], tmp_path)
    dat = (out / "toy_table5.dat").read_text().splitlines()
    assert not any("," in ln for ln in dat[1:])
    assert len(dat) == len((out / "toy_table5.csv").read_text().splitlines())


def test_thread_env_var(tmp_path, monkeypatch):
    args = ["simulate", "--family", "toy", "--k", "60", "--t", "10", "--runs", "20000"]
    _, a = run(args, tmp_path, "a", threads=1)
    monkeypatch.setenv("LANDSCAPE_LAB_THREADS", "4")
    _, b = run(args, tmp_path, "b")
    assert outputs(a) == outputs(b)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "landscape_lab", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
