import csv
import json

import pytest
from click.testing import CliRunner

from conftest import CORPUS
from vfcoord.cli import main
from vfcoord.model import bundled_path

SMALL = str(CORPUS / "1" / "system.json")


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)

    return invoke


def test_validate_exit_codes(run, tmp_path):
    assert run("validate", bundled_path()).exit_code == 0
    bad = json.loads(bundled_path().read_text())
    bad["tielines"][0]["z_min"] = [99.0, 99.0, 99.0]
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    res = run("validate", tmp_path / "bad.json")
    assert res.exit_code == 1 and "z_min > z_max" in res.output
    assert run("validate", tmp_path / "missing.json").exit_code == 2
    (tmp_path / "junk.json").write_text("{not json")
    assert run("validate", tmp_path / "junk.json").exit_code == 2


def test_solve_all_modes_with_enumerated_sets(run, tmp_path):
    out = tmp_path / "out"
    res = run("solve", SMALL, "--mode", "all", "--build-vf", "--method", "enumerate", "--gap-curve", "--out", out)
    assert res.exit_code == 0, res.output
    report = json.loads((out / "report.json").read_text())
    modes = {r["mode"]: r for r in report["modes"]}
    assert set(modes) == {"centralized", "islanded", "coordinated"}
    assert abs(modes["coordinated"]["gap"]) <= 1e-6
    assert modes["centralized"]["joint_cost"] <= modes["islanded"]["joint_cost"] + 1e-6
    assert report["config"]["method"] == "enumerate"
    for name in ("schedule.csv", "costs.png", "gap_curve.csv", "gap_curve.png", "vf_A.json", "vf_B.json"):
        assert (out / name).exists(), name
    gaps = [float(r["gap"]) for r in csv.DictReader(open(out / "gap_curve.csv"))]
    assert all(b <= a + 1e-9 for a, b in zip(gaps, gaps[1:]))
    assert "joint (k$)" in res.output and "gap (%)" in res.output


def test_solve_csv_and_missing_sets(run, tmp_path):
    res = run("solve", SMALL, "--mode", "islanded", "--format", "csv", "--out", tmp_path)
    assert res.exit_code == 0 and (tmp_path / "report.csv").exists()
    res = CliRunner().invoke(main, ["solve", SMALL, "--mode", "coordinated", "--out", str(tmp_path / "x")])
    assert res.exit_code != 0 and "vf build" in res.output


def test_vf_build_only_and_sweep(run, tmp_path):
    res = run("vf", "build", SMALL, "--only", "T1:1", "--area", "A", "--out", tmp_path)
    assert res.exit_code == 0, res.output
    data = json.loads((tmp_path / "vf_A.json").read_text())
    assert data["log"]["terminated_by"] == "gap" and data["log"]["config"]["command"] == "vf build"
    res = run("vf", "sweep", SMALL, "--vf-dir", tmp_path, "--area", "A", "--tie", "T1", "--period", 1,
              "--points", 41, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    rows = list(csv.reader(open(tmp_path / "sweep_A_T1_1.csv")))
    assert rows[0] == ["z", "value", "entry"] and len(rows) > 41
    assert (tmp_path / "sweep_A_T1_1.png").exists()
    assert "changes" in json.loads((tmp_path / "sweep_A_T1_1.json").read_text())


def test_allocate_from_worths_file(run, tmp_path):
    worths = {"players": ["1", "2"], "unit": "k$",
              "worths": [{"coalition": ["1"], "worth": -68.22}, {"coalition": ["2"], "worth": -87.83},
                         {"coalition": ["1", "2"], "worth": -154.87}],
              "costs": {"1": 77.61, "2": 77.26}}
    (tmp_path / "w.json").write_text(json.dumps(worths))
    res = run("allocate", "--worths-file", tmp_path / "w.json", "--out", tmp_path)
    assert res.exit_code == 0, res.output
    assert "-67.63" in res.output and "-87.24" in res.output and "-9.98" in res.output
    data = json.loads((tmp_path / "allocation.json").read_text())
    assert [r["payoff_k$"] for r in data["areas"]] == [-67.63, -87.24]
    assert (tmp_path / "payments.png").exists()


def test_allocate_from_instance(run, tmp_path):
    assert run("vf", "build", SMALL, "--method", "enumerate", "--out", tmp_path).exit_code == 0
    res = run("allocate", SMALL, "--vf-dir", tmp_path, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    data = json.loads((tmp_path / "allocation.json").read_text())
    assert abs(data["payment_sum"]) <= 1e-6 and data["core"]["stable"]
    assert "convention" in data["lmp"]


def test_config_file_and_unknown_keys(run, tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"lp_backend": "highs", "out": str(tmp_path / "o")}))
    res = run("--config", tmp_path / "cfg.json", "solve", SMALL, "--mode", "islanded")
    assert res.exit_code == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text())["config"]["lp_backend"] == "highs"
    (tmp_path / "bad.json").write_text(json.dumps({"colour": "red"}))
    res = CliRunner().invoke(main, ["--config", str(tmp_path / "bad.json"), "solve", SMALL])
    assert res.exit_code != 0 and "colour" in res.output


def test_corpus_generate(run, tmp_path):
    res = run("corpus", "generate", "--out", tmp_path, "--seeds", "1-2,5", "--periods", 1)
    assert res.exit_code == 0 and "3 instances" in res.output
    assert sorted(p.name for p in tmp_path.iterdir()) == ["1", "2", "5"]
    assert run("validate", tmp_path / "5" / "system.json").exit_code == 0


@pytest.mark.slow
def test_algorithm_sets_recover_centralized_cost(run, tmp_path):
    assert run("vf", "build", SMALL, "--out", tmp_path).exit_code == 0
    res = run("solve", SMALL, "--mode", "all", "--vf-dir", tmp_path, "--out", tmp_path)
    assert res.exit_code == 0, res.output
    modes = {r["mode"]: r for r in json.loads((tmp_path / "report.json").read_text())["modes"]}
    assert abs(modes["coordinated"]["gap"]) <= 1e-6
