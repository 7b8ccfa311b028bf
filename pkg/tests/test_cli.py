import csv
import json
import os
import subprocess
import sys

import pytest

from cklab import cli


def run_cli(*args, env=None, cwd=None):
    proc = subprocess.run([sys.executable, "-m", "cklab.cli", *args], capture_output=True, text=True,
                          env=env, cwd=cwd)
    return proc.returncode, proc.stdout, proc.stderr


def run_main(capsys, *args):
    code = cli.main(list(args))
    return code, capsys.readouterr().out


def test_equilibria_text_and_json(capsys):
    code, text = run_main(capsys, "equilibria", "--group", "e2", "--q", "1")
    assert code == 0 and "E2_q0q0" in text and "-2, 0, 1, 1" in text
    code, raw = run_main(capsys, "equilibria", "--group", "su2", "--q", "1", "--exp-neg-a", "1", "--json")
    doc = json.loads(raw)
    rows = {r["family"]: r for r in doc["equilibria"]}
    assert rows["SU2_qq0"]["eigenvalues"] == pytest.approx([-2.0, 0.0, 2.0])
    assert all(r["max_rel_error"] <= 1e-10 for r in doc["equilibria"])


def test_missing_group_is_a_config_error(tmp_path):
    code, _, err = run_cli("equilibria", "--q", "1", cwd=tmp_path)
    assert code == 2 and "group is required" in err


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[run]\ngroup = e2\ncolour = blue\n")
    code, _, err = run_cli("equilibria", "--config", str(cfg), cwd=tmp_path)
    assert code == 2 and "colour" in err


def test_integrate_writes_csv_and_sidecar(capsys, tmp_path):
    code, text = run_main(capsys, "integrate", "--group", "e2", "--state", "1,0.5,0.5,0.5", "--out", str(tmp_path))
    assert code == 0
    assert "left end     FiniteBlowup" in text
    with open(tmp_path / "trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["chart", "coord", "a", "b", "c", "alpha"]
    side = json.loads((tmp_path / "trajectory.json").read_text())
    assert side["left_end"]["kind"] == "FiniteBlowup"
    assert side["first_integral_drift"]["ab/alpha"] <= 1e-8
    assert side["samples"] == len(rows) - 1


def test_integrate_in_q_chart(capsys, tmp_path):
    code, _ = run_main(capsys, "integrate", "--group", "heisenberg", "--state", "1,1,0.5,1",
                       "--chart", "q", "--max-duration", "5", "--out", str(tmp_path))
    assert code == 0
    with open(tmp_path / "trajectory.csv") as fh:
        first = list(csv.reader(fh))[1]
    assert first[0] == "q"


def test_classify_heisenberg_and_su2_q0q(capsys, tmp_path):
    code, raw = run_main(capsys, "classify", "--group", "heisenberg", "--c1", "1", "--json", "--out", str(tmp_path))
    assert code == 0 and json.loads(raw)["overall"] == "CompleteWithBolt"
    assert json.loads((tmp_path / "classification.json").read_text())["overall"] == "CompleteWithBolt"
    code, text = run_main(capsys, "classify", "--group", "su2", "--family", "SU2_q0q", "--q", "1",
                          "--out", str(tmp_path))
    assert code == 0 and "Incomplete" in text


def test_verify_and_injected_error(tmp_path):
    code, out, _ = run_cli("verify", cwd=tmp_path)
    assert code == 0 and "checks pass" in out
    code, out, _ = run_cli("verify", "--inject-error", cwd=tmp_path)
    assert code == 3


def test_batch_runs_each_job(capsys, tmp_path):
    cfg = tmp_path / "jobs.ini"
    cfg.write_text(
        "[output]\nformats = json\n"
        "[job:equi]\ncommand = equilibria\ngroup = e2\nq = 1\n"
        "[job:heis]\ncommand = classify\ngroup = heisenberg\nc1 = 2\n"
    )
    code, text = run_main(capsys, "batch", "--config", str(cfg), "--out", str(tmp_path / "out"))
    assert code == 0
    assert "== equi (exit 0)" in text and "== heis (exit 0)" in text


def test_output_directory_from_environment(tmp_path):
    env = dict(os.environ, CKLAB_OUT=str(tmp_path / "envout"))
    code, _, _ = run_cli("equilibria", "--group", "e2", "--q", "1", env=env, cwd=tmp_path)
    assert code == 0
    assert (tmp_path / "envout" / "equilibria.json").exists()
