import csv
import subprocess
import sys

import numpy as np
import pytest

from bwcrm.cli import main, phantom_demo, sci
from bwcrm.io import write_matrix_market


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _field(out, key):
    for line in out.splitlines():
        if line.startswith(key):
            return line.split()[1]
    raise KeyError(key)


def test_sci_format():
    assert sci(np.sqrt(0.5)) == "7.0711e-1"
    assert sci(0.0) == "0.0000e0"
    assert sci(1.5e-12) == "1.5000e-12"


def test_solve_synth_full_block(capsys):
    code, out, _ = run(capsys, "solve", "--synth", "12x27", "--blocks", "12", "--tol", "1e-5")
    assert code == 0
    assert _field(out, "iterations") == "1"
    assert _field(out, "proj/reflec") == "12"
    assert _field(out, "status") == "converged"


def test_solve_matrix_file_unit_blocks(tmp_path, capsys):
    M = np.random.default_rng(0).standard_normal((6, 8))
    path = tmp_path / "a.mtx"
    write_matrix_market(path, M)
    trace = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "solve", "--matrix", str(path), "--rows", "4", "--blocks", "1",
                       "--tol", "1e-8", "--oracle", "--trace", str(trace))
    assert code == 0
    assert "problem      a.mtx (4x8)" in out
    rows = list(csv.reader(trace.open()))
    assert rows[0] == ["iter", "residual", "error", "proj_count"]
    assert int(rows[-1][0]) == int(_field(out, "iterations"))


def test_solve_boundaries_file(tmp_path, capsys):
    cuts = tmp_path / "cuts.txt"
    cuts.write_text("0 3 7 10\n")
    code, out, _ = run(capsys, "solve", "--synth", "10x15", "--boundaries", str(cuts),
                       "--tol", "1e-8")
    assert code == 0
    assert "blocks       3 (sizes 3,4,3)" in out


def test_solve_missing_file(capsys):
    code, _, err = run(capsys, "solve", "--matrix", "/nonexistent/fidap.mtx")
    assert code == 1
    assert "fidap.mtx" in err


def test_solve_malformed_file(capsys):
    from pathlib import Path
    bad = Path(__file__).parent / "data" / "malformed.mtx"
    code, _, err = run(capsys, "solve", "--matrix", str(bad))
    assert code == 1 and "line 4" in err


def test_solve_budget_exhausted(capsys):
    code, out, _ = run(capsys, "solve", "--synth", "20x30", "--blocks", "1",
                       "--tol", "1e-14", "--max-iter", "2")
    assert code == 2
    assert _field(out, "status") == "budget"


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as info:
        main(["solve"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["solve", "--synth", "banana"])
    assert info.value.code == 1
    capsys.readouterr()


def test_bench_table(capsys):
    code, out, _ = run(capsys, "bench", "--synth", "12x27", "--sizes", "1,2,3,4,6,12",
                       "--tol", "1e-5")
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["method", "blocks", "proj_reflec", "iter", "residual", "cpu_seconds"]
    assert len(rows) == 7
    assert rows[1][0] == "Bw-CRM-1 (MAP)"
    assert rows[-1][0] == "Bw-CRM-12 (CRM)"
    assert rows[-1][1:4] == ["1", "12", "1"]


def test_bench_to_file_27x27(tmp_path, capsys):
    out = tmp_path / "b.csv"
    # small blocks need tens of thousands of sweeps here; the cap keeps it quick
    code, _, _ = run(capsys, "bench", "--synth", "27x27", "--sizes", "1,3,9,27",
                     "--tol", "1e-3", "--max-iter", "300", "--out", str(out))
    rows = list(csv.DictReader(out.open()))
    assert [r["blocks"] for r in rows] == ["27", "9", "3", "1"]
    assert rows[-1]["iter"] == "1"
    assert float(rows[-1]["residual"]) < 1e-9
    exhausted = any(r["iter"] == "300" for r in rows)
    assert code == (2 if exhausted else 0)


def test_bench_empty_sizes(capsys):
    code, out, _ = run(capsys, "bench", "--synth", "5x5", "--sizes", "")
    assert code == 0
    assert out == "method,blocks,proj_reflec,iter,residual,cpu_seconds\n"


def test_angles(tmp_path, capsys):
    axes = tmp_path / "axes.csv"
    axes.write_text("1,0\n0,1\n")
    code, out, _ = run(capsys, "angles", "--matrix", str(axes), "--rhs", "zeros")
    assert code == 0 and out == "1 2 0.0000e0\n"

    diag = tmp_path / "diag.csv"
    diag.write_text("0,1\n1,-1\n")
    code, out, _ = run(capsys, "angles", "--matrix", str(diag), "--rhs", "zeros")
    assert out == "1 2 7.0711e-1\n"

    single = tmp_path / "one.csv"
    single.write_text("1,0\n")
    code, out, _ = run(capsys, "angles", "--matrix", str(single))
    assert code == 0 and out == ""


def test_angles_between_blocks(capsys):
    code, out, _ = run(capsys, "angles", "--synth", "6x10", "--blocks", "2")
    assert code == 0
    lines = out.splitlines()
    assert [ln.split()[:2] for ln in lines] == [["1", "2"], ["2", "3"]]


def test_phantom_budget_zero_reports_start_residual(tmp_path):
    table, _ = phantom_demo(rows=60, cols=25, density=0.2, seed=1, budget=0,
                            sizes=(1, 4, 16), out_dir=None)
    res = {r[3] for r in table}
    assert len(res) == 1
    assert all(r[2] == 0 for r in table)


def test_phantom_is_deterministic(tmp_path, capsys):
    args = ["phantom", "--rows", "120", "--cols", "50", "--density", "0.1",
            "--budget", "3", "--sizes", "1,8"]
    code1, out1, _ = run(capsys, *args, "--out-dir", str(tmp_path / "a"))
    code2, out2, _ = run(capsys, *args, "--out-dir", str(tmp_path / "a"))
    assert code1 == code2 == 0
    assert out1 == out2
    for name in ("exact.pgm", "q1.pgm", "q8.pgm", "table.csv"):
        assert (tmp_path / "a" / name).exists()
    rows = list(csv.reader((tmp_path / "a" / "table.csv").open()))
    assert rows[0] == ["method", "blocks", "iter", "residual", "solution_error"]
    assert len(rows) == 3


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bwcrm", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
