import csv
import json
from pathlib import Path

import pytest

from crpenergy import grh
from crpenergy.cli import main
from crpenergy.fast import Evaluator
from crpenergy.instances import Instance, format_native, generate_training_set, write_instances
from crpenergy.rules import TLP

TEST_SRC = "gen:caserta-like:12:9"


def tree_of(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file() and p.name != "runtime.txt"}


@pytest.fixture(scope="module")
def gp_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("train")
    args = ["train", "--method", "gp", "--scheme", "restricted", "--reps", "2", "--pop", "20", "--evals", "300",
            "--seed", "7", "--train", "gen:caserta-like:8:1", "--test", TEST_SRC]
    assert main(args + ["--out", str(base / "a")]) == 0
    assert main(args + ["--out", str(base / "b"), "--jobs", "2"]) == 0
    return base


def test_train_artifacts(gp_runs):
    a = gp_runs / "a"
    for r in ("rep-00", "rep-01"):
        for name in ("best.sexp", "convergence.csv", "runtime.txt", "config.json", "result.json"):
            assert (a / r / name).exists()
    assert (a / "rep-00" / "convergence.csv").read_text().startswith("evaluations,best_fitness\n")
    res = json.loads((a / "rep-01" / "result.json").read_text())
    assert res["evaluations"] == 300 and "test_total" in res


def test_train_byte_identical_across_jobs(gp_runs):
    assert tree_of(gp_runs / "a") == tree_of(gp_runs / "b")


def test_train_grh_genome_schema(tmp_path):
    assert main(["train", "--method", "grh-ga", "--reps", "1", "--pop", "10", "--evals", "30",
                 "--train", "gen:caserta-like:4:1", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "rep-00" / "best.csv").read_text()
    header, row = text.strip().splitlines()
    assert header.split(",") == list(grh.GENE_NAMES)
    assert all(0.0 <= float(v) <= 1.0 for v in row.split(","))


def read_eval(path):
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["instance_id", "moves", "relocations", "total_energy"]
    return rows[1:]


def test_evaluate_builtin_and_jobs(tmp_path, capsys):
    assert main(["evaluate", "--rule", "tlp", "--test", TEST_SRC, "--out", str(tmp_path / "one.csv")]) == 0
    summary = capsys.readouterr().out
    assert main(["evaluate", "--rule", "tlp", "--test", TEST_SRC, "--out", str(tmp_path / "four.csv"), "--jobs", "4"]) == 0
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "four.csv").read_bytes()
    rows = read_eval(tmp_path / "one.csv")
    total = sum(float(r[3]) for r in rows)
    ref = Evaluator(generate_training_set("caserta-like", 12, 9)).total(TLP())
    assert total == pytest.approx(ref, rel=1e-12)
    assert summary.startswith(f"total {ref:.6f} instances 12 failed 0")


def test_evaluate_genome_dir(gp_runs, tmp_path):
    rep = gp_runs / "a" / "rep-00"
    assert main(["evaluate", "--rule", str(rep), "--test", TEST_SRC, "--out", str(tmp_path / "g.csv")]) == 0
    total = sum(float(r[3]) for r in read_eval(tmp_path / "g.csv"))
    assert total == pytest.approx(json.loads((rep / "result.json").read_text())["test_total"], rel=1e-12)


def test_evaluate_empty_set(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["evaluate", "--rule", "ri", "--test", str(tmp_path / "empty"), "--out", str(tmp_path / "e.csv")]) == 0
    assert read_eval(tmp_path / "e.csv") == []


def test_evaluate_deadlock_continues(tmp_path):
    good = generate_training_set("caserta-like", 2, 3)
    write_instances(good, tmp_path / "set")
    bad = Instance("stuck", ((1, 2), (3, 4)), 2, {1: 1.0, 2: 1.0, 3: 1.0, 4: 1.0})
    (tmp_path / "set" / "stuck.txt").write_text(format_native(bad))
    code = main(["evaluate", "--rule", "tlp", "--test", str(tmp_path / "set"), "--out", str(tmp_path / "d.csv")])
    assert code == 4
    rows = read_eval(tmp_path / "d.csv")
    assert len(rows) == 3 and [r[3] for r in rows if r[0] == "stuck"] == ["deadlock"]


def write_fake_run(root, method, values, runtime=1.0):
    root.mkdir(parents=True)
    (root / "run.json").write_text(json.dumps({"method": method, "scheme": "restricted", "reps": len(values)}))
    for i, v in enumerate(values):
        d = root / f"rep-{i:02d}"
        d.mkdir()
        (d / "result.json").write_text(json.dumps({"rep": i, "train_fitness": v, "test_total": v}))
        (d / "runtime.txt").write_text(f"{runtime}\n")
        if method == "gp":
            (d / "best.sexp").write_text("(add n_s (mul h_s r_s))\n")


def test_report_two_methods(tmp_path):
    write_fake_run(tmp_path / "gp", "gp", [100, 101, 102, 103, 104])
    write_fake_run(tmp_path / "ga", "grh-ga", [200, 201, 202, 203, 204], runtime=2.0)
    assert main(["report", str(tmp_path / "gp"), str(tmp_path / "ga"), "--out", str(tmp_path / "r")]) == 0
    summary = list(csv.reader((tmp_path / "r" / "summary.csv").open()))
    assert [r[0] for r in summary[1:]] == ["gp-R", "grh-ga-R"]
    assert float(summary[1][3]) == 102 and float(summary[1][5]) == pytest.approx(1.5811388300841898)
    rel = list(csv.reader((tmp_path / "r" / "relations.csv").open()))
    assert rel == [["", "gp-R", "grh-ga-R"], ["gp-R", "-", ">"], ["grh-ga-R", "<", "-"]]
    census = dict(csv.reader((tmp_path / "r" / "node_census.csv").open()))
    assert census["n_s"] == "5" and census["mul"] == "5" and census["g_s"] == "0"
    runtime = list(csv.reader((tmp_path / "r" / "runtime.csv").open()))
    assert runtime[2][3] == "2.00"


def test_report_gp_only(tmp_path):
    write_fake_run(tmp_path / "gp", "gp", [1, 2, 3])
    assert main(["report", str(tmp_path / "gp"), "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r" / "node_census.csv").exists()
    assert not (tmp_path / "r" / "relations.csv").exists()
    assert "significance matrix omitted" in (tmp_path / "r" / "report.md").read_text()


def test_report_missing_artifacts(tmp_path):
    assert main(["report", str(tmp_path / "nothing")]) == 5
    write_fake_run(tmp_path / "gp", "gp", [1])
    (tmp_path / "gp" / "rep-00" / "result.json").unlink()
    assert main(["report", str(tmp_path / "gp")]) == 5


def test_exit_codes(tmp_path, monkeypatch):
    monkeypatch.delenv("CRPENERGY_DATA", raising=False)
    assert main(["evaluate", "--rule", "tlp"]) == 3
    assert main(["evaluate", "--rule", "tlp", "--test", str(tmp_path / "missing")]) == 3
    assert main(["evaluate", "--rule", "nosuchrule", "--test", TEST_SRC]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("[energy]\nhoist = -1\n")
    assert main(["--config", str(bad), "evaluate", "--rule", "tlp", "--test", TEST_SRC]) == 2
    assert main(["train", "--method", "gp", "--pop", "10", "--evals", "5", "--out", str(tmp_path / "t")]) == 2
    assert main(["calibrate"]) == 3


def test_dataset_root_env(tmp_path, monkeypatch):
    write_instances(generate_training_set("caserta-like", 2, 1), tmp_path / "root" / "sub")
    monkeypatch.setenv("CRPENERGY_DATA", str(tmp_path / "root"))
    monkeypatch.chdir(tmp_path)
    assert main(["evaluate", "--rule", "tlp", "--test", "sub", "--out", "x.csv"]) == 0
    assert len(read_eval(Path("x.csv"))) == 2


def test_calibrate_writes_config(tmp_path, capsys):
    write_instances(generate_training_set("caserta-like", 3, 1), tmp_path / "cal")
    out = tmp_path / "cal.cfg"
    assert main(["calibrate", "--dataset", str(tmp_path / "cal"), "--target", "1000", "--write", str(out)]) == 0
    from crpenergy.energy import load_config

    load_config(out)
    assert "Calibrated on 3 instances" in out.read_text()
    assert capsys.readouterr().out.count("*") == 1


def test_generate_and_trace(tmp_path):
    assert main(["generate", "--kind", "zhu-like", "--count", "3", "--seed", "2", "--out", str(tmp_path / "g")]) == 0
    files = sorted((tmp_path / "g").iterdir())
    assert len(files) == 3
    assert main(["trace", "--rule", "tlp", "--instance", str(files[0]), "--out", str(tmp_path / "t.trace")]) == 0
    lines = (tmp_path / "t.trace").read_text().splitlines()
    assert all(len(ln.split()) == 7 for ln in lines)
    assert lines[-1].split()[0] == "retrieve"
