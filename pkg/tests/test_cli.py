import csv
import io

import pytest

from ecga.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main


def test_theory_csv(capsys):
    assert main(["theory", "--pi-grid", "0,0.2,0.9"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert list(rows[0]) == ["p_i", "n_ratio", "tc_ratio", "nfe_ratio_exact", "nfe_ratio_approx", "speedup",
                             "validity_flag"]
    assert rows[1]["nfe_ratio_approx"] == "1.05163"
    assert rows[2]["validity_flag"] == "outside-model"


def test_theory_exact_column(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["theory", "--pi-grid", "0.5", "--tc0", "10", "--out", str(out)]) == EXIT_OK
    row = next(csv.DictReader(out.open()))
    assert float(row["nfe_ratio_exact"]) == pytest.approx(1.5 * (1.5 ** 0.5 * 0.5 + 0.05), rel=1e-5)


def test_run(capsys):
    assert main(["run", "--problem", "onemax", "--len", "12", "--n", "40", "--seed", "3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "generations=" in out and "success=True" in out


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--problem", "knapsack"])
    assert exc.value.code == EXIT_USAGE
    assert main(["run", "--pi", "2"]) == EXIT_USAGE
    assert main(["run", "--config", "/nonexistent.cfg"]) == EXIT_USAGE


def test_unreachable_bisection(capsys):
    code = main(["bisect", "--problem", "onemax", "--len", "20", "--max-gen", "1", "--trials", "5",
                 "--repeats", "1", "--n-cap", "64"])
    assert code == EXIT_FAILURE


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("problem = onemax\nlen = 10\nn = 40\nseed = 1\n")
    assert main(["run", "--config", str(cfg)]) == EXIT_OK
    assert "m=10" in capsys.readouterr().out
    assert main(["run", "--config", str(cfg), "--len", "14"]) == EXIT_OK
    assert "m=14" in capsys.readouterr().out


def test_sweep_writes_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--problem", "onemax", "--len", "8", "--pi-grid", "0 0.5", "--trials", "8",
                 "--repeats", "2", "--measure", "8", "--out", str(out)])
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [r["p_i"] for r in rows] == ["0", "0.5"]
    assert rows[0]["n_ratio"] == "1"


def test_schema_pool_flag(capsys):
    argv = ["run", "--problem", "onemax", "--len", "20", "--n", "60", "--pi", "0.6", "--seed", "1"]
    assert main(argv + ["--schema-pool", "selected"]) == EXIT_OK
    selected = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    parents = capsys.readouterr().out
    assert selected != parents
    with pytest.raises(SystemExit) as exc:
        main(argv + ["--schema-pool", "offspring"])
    assert exc.value.code == EXIT_USAGE
