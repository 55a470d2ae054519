import io
import json
import subprocess
import sys

import numpy as np
import pytest

from ctrlscore.cli import main, parse_config_text, render_json, UsageError


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def table_scores(text):
    rows = [line.split() for line in text.splitlines() if line[:4].strip().isdigit()]
    return {int(r[0]): r[1] for r in rows}


def test_score_vcs_infinite_table():
    code, text = run("score", "--objective", "vcs", "--horizon", "inf")
    assert code == 0
    rows = table_scores(text)
    assert sorted(rows) == list(range(1, 11))
    assert rows[7] == "0.24967"


def test_score_aecs_infinite_node9_zero():
    code, text = run("score", "--objective", "aecs", "--horizon", "inf")
    assert code == 0 and table_scores(text)[9] == "0.00000"


def test_score_short_horizon_uniform():
    code, text = run("score", "--objective", "vcs", "--horizon", "0.01")
    assert code == 0 and set(table_scores(text).values()) == {"0.10000"}


def test_edge_file_input(tmp_path):
    path = tmp_path / "fig2.csv"
    assert run("fixture", "--out", str(path))[0] == 0
    code, text = run("score", "--input", str(path), "--dynamics", "laplacian", "--objective", "vcs",
                     "--horizon", "inf")
    assert code == 0 and table_scores(text)[7] == "0.24967"


def test_csv_full_precision():
    code, text = run("score", "--output", "csv")
    lines = text.splitlines()
    assert lines[0] == "node,score" and len(lines) == 11
    assert sum(float(l.split(",")[1]) for l in lines[1:]) == pytest.approx(1.0, abs=1e-12)


def test_json_round_trip_and_determinism():
    code, first = run("score", "--objective", "aecs", "--output", "json")
    assert code == 0
    _, second = run("score", "--objective", "aecs", "--output", "json")
    assert first == second
    data = json.loads(first)
    assert render_json(data) == first
    assert json.dumps(data, sort_keys=True, indent=2) + "\n" == first
    assert data["report"]["horizon"] == "inf" and data["report"]["converged"] is True
    assert data["uniqueness"]["aecs_unique_certified"] is True


def test_finite_json_flags():
    code, text = run("score", "--horizon", "1", "--output", "json")
    data = json.loads(text)
    assert code == 0 and data["uniqueness"]["exceptional_horizon"] is False


def test_sweep_shape_and_gaps():
    code, text = run("sweep", "--objective", "vcs", "--output", "csv")
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "node,0.01,1,1000,10000,inf"
    assert len(lines) == 12
    gaps = [float(v) for v in lines[-1].split(",")[1:5]]
    assert lines[-1].startswith("gap_to_inf,") and all(a > b for a, b in zip(gaps, gaps[1:]))


def test_sweep_single_inf_matches_score():
    _, sweep = run("sweep", "--horizons", "inf", "--output", "csv")
    _, score = run("score", "--output", "csv")
    assert [l.split(",")[1] for l in sweep.splitlines()[1:]] == [l.split(",")[1] for l in score.splitlines()[1:]]


def test_diagnose_fixture():
    code, text = run("diagnose", "--horizon", "10", "--controllability")
    assert code == 0
    assert "n_minus=8 n_zero=2 n_plus=0" in text
    assert "controllability rank at AECS optimum (T=10): 10/10" in text
    code, text = run("diagnose", "--controllability", "--output", "json")
    data = json.loads(text)
    assert data["diagnostics"]["controllability_rank"] == 9
    assert data["diagnostics"]["assumption2"] is True


def test_diagnose_rotation(tmp_path):
    path = tmp_path / "rot.txt"
    path.write_text("0 1\n-1 0\n")
    code, text = run("diagnose", "--input", str(path), "--format", "matrix")
    assert code == 0
    assert "assumption 2 (zero is the only imaginary-axis eigenvalue, semisimple): FAIL" in text
    assert "0-1i, 0+1i" in text


def test_exit_codes(tmp_path, capsys):
    rot = tmp_path / "rot.txt"
    rot.write_text("0 1\n-1 0\n")
    assert run("score", "--input", str(rot), "--format", "matrix")[0] == 2
    assert run("score", "--horizon", "1", "--max-iter", "2")[0] == 3
    assert run("score", "--input", str(tmp_path / "missing.csv"))[0] == 4
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,x\n")
    assert run("score", "--input", str(bad))[0] == 4
    assert run("score", "--horizon", "-3")[0] == 1
    assert run("score", "--objective", "max")[0] == 1
    assert run()[0] == 1
    assert run("score", "--sigma", "2")[0] == 1
    err = capsys.readouterr().err
    assert "assumption violated" in err and "No such file" in err


def test_aecs_infinite_needs_stable(tmp_path):
    path = tmp_path / "unstable.txt"
    path.write_text("1 0\n0 0\n")
    assert run("score", "--input", str(path), "--format", "matrix", "--objective", "aecs")[0] == 2


def test_overflow_is_numerical_failure(tmp_path):
    path = tmp_path / "fast.txt"
    path.write_text("50\n")
    assert run("score", "--input", str(path), "--format", "matrix", "--horizon", "100")[0] == 3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# run config\nobjective = aecs\noutput = csv\nmax-iter = 100000\n")
    _, via_cfg = run("score", "--config", str(cfg))
    _, via_flags = run("score", "--objective", "aecs", "--output", "csv")
    assert via_cfg == via_flags
    _, overridden = run("score", "--config", str(cfg), "--objective", "vcs")
    _, vcs = run("score", "--output", "csv")
    assert overridden == vcs


def test_config_errors(tmp_path):
    with pytest.raises(UsageError):
        parse_config_text("colour = blue\n")
    with pytest.raises(UsageError):
        parse_config_text("horizon = -1\n")
    with pytest.raises(UsageError):
        parse_config_text("just words\n")
    assert parse_config_text("horizon = inf\nhorizons = 1, inf\n")["horizons"] == (1.0, float("inf"))
    assert run("score", "--config", str(tmp_path / "absent.cfg"))[0] == 4


def test_fixture_matrix_export():
    code, text = run("fixture", "--format", "matrix")
    A = np.array([[float(v) for v in line.split()] for line in text.splitlines()])
    assert code == 0 and A.shape == (10, 10) and np.allclose(A.sum(axis=1), 0)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ctrlscore", "score", "--output", "csv"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and proc.stdout.startswith("node,score\n")
