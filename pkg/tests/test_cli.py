import csv
import json

import pytest

from adaptive_cp import cli


def run(args, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = cli.main(args + ["--out", str(out)])
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [dict(zip([h.split(" [")[0] for h in rows[0]], r)) for r in rows[1:]]


def test_plan_exact_tau(tmp_path):
    header, rows = run(["plan", "--T", "80us", "--B", "32MHz", "--tau", "2.6666666666666667e-6", "--M", "1200"], tmp_path)
    assert "T_c [s]" in header and "N [count]" in header
    assert (int(rows[0]["N"]), int(rows[0]["K"])) == (2048, 512)


def test_plan_lte_grid(tmp_path):
    _, rows = run(["plan", "--lte-grid", "--subframe", "500us", "--Td", "66.7us"], tmp_path)
    tcs = [float(r["T_c"]) for r in rows]
    assert tcs[0] == pytest.approx(4.7286e-6, abs=5e-11)
    assert tcs[1] == pytest.approx(16.633e-6, abs=5e-10)


def test_plan_clocks(tmp_path):
    clocks = tmp_path / "clocks.txt"
    clocks.write_text("# DAC periods\n31.25ns\n27.34375ns\n")
    _, rows = run(["plan", "--T", "80us", "--Ts", "31.25ns", "--Ntilde", "2048", "--clocks", str(clocks), "--tau", "3.5us"], tmp_path)
    assert int(rows[0]["K_tilde"]) == 878


def test_plan_no_feasible_clock(tmp_path, capsys):
    clocks = tmp_path / "clocks.txt"
    clocks.write_text("31.25ns\n")
    code = cli.main(["plan", "--T", "64us", "--Ts", "31.25ns", "--Ntilde", "2048", "--clocks", str(clocks), "--tau", "1us"])
    assert code == 2
    assert "no feasible clock" in capsys.readouterr().err


def test_plan_missing_required(capsys):
    assert cli.main(["plan", "--T", "80us"]) == 2
    assert "--B" in capsys.readouterr().err


def test_cp_too_long_exits_2(capsys):
    assert cli.main(["plan", "--T", "1us", "--B", "32MHz", "--tau", "1us"]) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_subcommand():
    assert cli.main(["bogus"]) == 2


def test_farrow_bench_defaults(tmp_path):
    _, rows = run(["farrow-bench"], tmp_path)
    r = rows[0]
    assert float(r["rel_mse_db"]) <= -40
    assert int(r["mults_direct"]) == 1543
    assert float(r["mults_farrow"]) == pytest.approx(139.30, abs=0.01)
    assert int(r["mults_published"]) == 146


def test_farrow_bench_higher_order(tmp_path):
    _, rows = run(["farrow-bench", "--alpha", "8"], tmp_path)
    assert float(rows[0]["rel_mse_db"]) <= -60


def test_farrow_bench_same_size_is_exact(tmp_path):
    _, rows = run(["farrow-bench", "--N", "2048", "--Ntilde", "2048"], tmp_path)
    assert float(rows[0]["rel_mse_db"]) <= -120


def test_farrow_bench_samples_and_bank(tmp_path):
    samples = tmp_path / "s.csv"
    bank = tmp_path / "bank.txt"
    _, a = run(["farrow-bench", "--count", "10", "--samples", str(samples), "--bank-out", str(bank)], tmp_path, "a.csv")
    with open(samples) as fh:
        assert len(list(csv.reader(fh))) == 11
    _, b = run(["farrow-bench", "--bank-in", str(bank)], tmp_path, "b.csv")
    assert a[0]["rel_mse_db"] != "" and float(b[0]["rel_mse_db"]) <= -40


def test_theorem1_columns(tmp_path):
    header, rows = run(["theorem1", "--pairs", "5", "--seed", "1", "--max-size", "256"], tmp_path)
    assert header == ["pair [index]", "N [count]", "N_tilde [count]", "max_rel_err [ratio]"]
    assert len(rows) == 6 and rows[-1]["pair"] == "all"
    assert all(float(r["max_rel_err"]) <= 1e-9 for r in rows)


def test_multiuser_columns(tmp_path):
    header, rows = run(["multiuser", "--trials", "2", "--seed", "3"], tmp_path)
    assert "evm_user2_common_db [dB]" in header
    assert rows[-1]["trial"] == "all"
    assert float(rows[-1]["evm_user2_common_db"]) <= -100


def test_sweep_and_records(tmp_path):
    rec = tmp_path / "rec.csv"
    header, rows = run(["sweep", "--taus", "1ns,12.1ns", "--T", "2us", "--trials", "2", "--records", str(rec)], tmp_path)
    assert len(rows) == 2 and rec.exists()
    assert float(rows[0]["overhead"]) < float(rows[1]["overhead"])


def test_sweep_zero_trials(capsys):
    assert cli.main(["sweep", "--taus", "1ns", "--T", "2us", "--trials", "0"]) == 2
    assert "trials must be >= 1" in capsys.readouterr().err


def test_sidecar_written(tmp_path):
    run(["theorem1", "--pairs", "2", "--seed", "9"], tmp_path)
    side = json.loads((tmp_path / "out.csv.config.json").read_text())
    assert side["command"] == "theorem1" and side["pairs"] == 2 and side["seed"] == 9


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "outdir"))
    assert cli.main(["lte-grid"]) == 0
    assert (tmp_path / "outdir" / "lte-grid.csv").exists()


def test_stdout_when_no_destination(monkeypatch, capsys):
    monkeypatch.delenv(cli.OUTPUT_DIR_ENV, raising=False)
    assert cli.main(["lte-grid"]) == 0
    cap = capsys.readouterr()
    assert cap.out.startswith("n [count]") and '"command"' in cap.err


def test_config_file_then_cli_override(tmp_path):
    cfg = tmp_path / "plan.yaml"
    cfg.write_text("T: 80us\nB: 32MHz\ntau: 2.6666666666666667e-6\nM: 1200\n")
    _, rows = run(["plan", "--config", str(cfg)], tmp_path)
    assert int(rows[0]["K"]) == 512
    _, rows = run(["plan", "--config", str(cfg), "--tau", "0"], tmp_path, "b.csv")
    assert int(rows[0]["K"]) == 0


def test_missing_config(tmp_path, capsys):
    assert cli.main(["plan", "--config", str(tmp_path / "nope.yaml")]) == 2
    assert "does not exist" in capsys.readouterr().err
