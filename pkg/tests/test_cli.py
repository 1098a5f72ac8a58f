import json
import math

import pytest

from orliczlab.cli import main


def test_check_condition_writes_report(tmp_path, capsys):
    report = tmp_path / "rep.json"
    code = main(["check-condition", "--phi", "pow:p=3", "--k", "2",
                 "--report", str(report)])
    assert code == 0
    payload = json.loads(report.read_text())
    assert payload["reports"][0]["classification"] == "CONVERGENT"
    assert report.with_suffix(".json.meta.json").exists()
    # the deterministic file carries no wall-clock data
    assert "runtime" not in report.read_text()


def test_missing_parameter_exits_2(capsys):
    code = main(["check-condition", "--phi", "pow:p=3"])
    assert code == 2


def test_module_error_exits_1_with_structured_report(tmp_path):
    # a valid request that fails inside the build (convergent gauge)
    report = tmp_path / "err.json"
    code = main(["build-extremal", "--phi", "pow:p=3", "--k", "2",
                 "--out", str(tmp_path / "p.json"), "--report", str(report)])
    assert code == 1
    body = json.loads(report.read_text())
    assert body["kind"] == "ProfileError"
    assert "divergence" in body["error"]


def test_extremal_counterexample_round_trip(tmp_path, capsys):
    profile = tmp_path / "profile.json"
    code = main(["build-extremal", "--phi", "pow:p=2", "--k", "2",
                 "--out", str(profile), "--u-max", "20000", "--nodes", "4096",
                 "--csv", str(tmp_path / "h.csv")])
    assert code == 0
    tables = json.loads(profile.read_text())["tables"]
    assert len(tables["u_grid"]) == len(tables["F"])
    header = (tmp_path / "h.csv").read_text().splitlines()[0]
    assert header == "s,h"

    model_path = tmp_path / "model.json"
    code = main(["build-counterexample", "--phi", "pow:p=2", "--k", "3",
                 "--depth", "2", "--out", str(model_path),
                 "--u-max", "20000", "--nodes", "4096"])
    assert code == 0
    code = main(["verify-counterexample", "--model", str(model_path),
                 "--checks", "osc,energy", "--levels", "2",
                 "--samples-per-ball", "256",
                 "--report", str(tmp_path / "verify.json")])
    assert code == 0
    rows = json.loads((tmp_path / "verify.json").read_text())["reports"]
    assert all(r["status"] == "PASS" for r in rows)


def test_modulus_and_distortion(tmp_path):
    code = main(["modulus", "--ring", f"1,{math.e},2", "--family", "spheres",
                 "--grid", "64", "--report", str(tmp_path / "mod.json")])
    assert code == 0
    body = json.loads((tmp_path / "mod.json").read_text())
    assert body["closed_form"]["value"] == pytest.approx(1 / (2 * math.pi), rel=1e-6)

    code = main(["distortion", "--map", "stretch:alpha=0.5,n=3",
                 "--check", "holder", "--report", str(tmp_path / "dist.json")])
    assert code == 0


def test_oscillation_command(tmp_path):
    code = main(["oscillation", "--field", "log-recip", "--scales", "6",
                 "--report", str(tmp_path / "osc.json")])
    assert code == 0
    body = json.loads((tmp_path / "osc.json").read_text())
    assert body["point_test"]["label"] == "EVIDENCE-FOR"


def test_suite_empty_manifest(tmp_path):
    manifest = tmp_path / "manifest.txt"
    manifest.write_text("# nothing enabled\n")
    code = main(["suite", "--manifest", str(manifest),
                 "--report", str(tmp_path / "suite.json")])
    assert code == 0
    body = json.loads((tmp_path / "suite.json").read_text())
    assert body["total_checks"] == 0


def test_config_file_override(tmp_path):
    cfg = tmp_path / "lab.cfg"
    cfg.write_text("seed=7\nconstants.alpha_k=2.0\n")
    report = tmp_path / "rep.json"
    code = main(["--config", str(cfg), "check-condition", "--phi", "pow:p=3",
                 "--k", "2", "--report", str(report)])
    assert code == 0
