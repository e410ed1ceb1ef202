import json
import subprocess
import sys
from pathlib import Path

import pytest

from rmtlab.cli import main

GUE_DOC = {"schema_version": 1, "ensemble": {"kind": "gue", "sigma": 1.0},
           "n_grid": [8], "samples_per_n": 2, "seed": 1}


def write_config(tmp_path: Path, doc: dict) -> Path:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def run_cli(args, **kw):
    return subprocess.run([sys.executable, "-m", "rmtlab.cli", *args],
                          capture_output=True, text=True, **kw)


def test_sample_row_count_and_header(tmp_path):
    cfg = write_config(tmp_path, GUE_DOC)
    out = tmp_path / "out"
    assert main(["sample", "--config", str(cfg), "--out", str(out)]) == 0
    lines = (out / "spectra_N8.csv").read_text().splitlines()
    assert lines[0] == "sample_index,eig_index,lambda_scaled"
    assert len(lines) == 1 + 16
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["seed"] == 1
    assert meta["config"]["ensemble"]["kind"] == "gue"


def test_sample_rerun_byte_identical(tmp_path):
    cfg = write_config(tmp_path, GUE_DOC)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["sample", "--config", str(cfg), "--out", str(out1)])
    main(["sample", "--config", str(cfg), "--out", str(out2)])
    for name in ("spectra_N8.csv", "metadata.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_seed_override_changes_output(tmp_path):
    cfg = write_config(tmp_path, GUE_DOC)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["sample", "--config", str(cfg), "--out", str(out1)])
    main(["sample", "--config", str(cfg), "--seed", "2", "--out", str(out2)])
    assert (out1 / "spectra_N8.csv").read_bytes() != (out2 / "spectra_N8.csv").read_bytes()


def test_invalid_kind_exits_2_naming_field(tmp_path):
    doc = dict(GUE_DOC, ensemble={"kind": "lognormal"})
    cfg = write_config(tmp_path, doc)
    result = run_cli(["sample", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert result.returncode == 2
    assert "kind" in result.stderr


def test_unknown_field_rejected(tmp_path):
    doc = dict(GUE_DOC, turbo=True)
    cfg = write_config(tmp_path, doc)
    result = run_cli(["sample", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert result.returncode == 2
    assert "turbo" in result.stderr


def test_empty_n_grid_rejected(tmp_path):
    cfg = write_config(tmp_path, dict(GUE_DOC, n_grid=[]))
    result = run_cli(["moments", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert result.returncode == 2
    assert "n_grid" in result.stderr


def test_moments_csv(tmp_path):
    doc = dict(GUE_DOC, n_grid=[16], samples_per_n=4, moment_orders=[2, 3, 4])
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["moments", "--config", str(cfg), "--out", str(out)]) == 0
    lines = (out / "moments.csv").read_text().splitlines()
    assert lines[0] == "N,k,mean,stderr,gap"
    assert len(lines) == 4
    # odd k compares against a zero semicircle reference: gap equals |mean|
    row3 = dict(zip(("N", "k", "mean", "stderr", "gap"), lines[2].split(",")))
    assert row3["k"] == "3"
    assert abs(float(row3["mean"])) == float(row3["gap"])


def test_cumulant_scan_csv(tmp_path):
    doc = dict(GUE_DOC, n_grid=[8, 16, 32], samples_per_n=400,
               graphs_to_scan=["v=2;e=0->1,1->0"])
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["cumulant-scan", "--config", str(cfg), "--out", str(out)]) == 0
    lines = (out / "scan.csv").read_text().splitlines()
    assert lines[0] == "N,graph,scaled_estimate,stderr,verdict"
    assert len(lines) == 4
    assert all("v=2;e=0->1,1->0" in line for line in lines[1:])


def test_scan_rejects_big_graph(tmp_path):
    doc = dict(GUE_DOC, graphs_to_scan=["v=2;e=0->1,1->0,0->1,1->0,0->1"])
    cfg = write_config(tmp_path, doc)
    result = run_cli(["cumulant-scan", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert result.returncode == 2


def test_rg_flow_stdout_and_exit():
    result = run_cli(["rg-flow", "--order", "7", "--sigma", "1"])
    assert result.returncode == 0
    assert result.stdout.strip() == "1, 0, 1, 0, 2, 0, 5"


def test_rg_flow_capacity_exit():
    result = run_cli(["rg-flow", "--order", "20", "--sigma", "1"])
    assert result.returncode == 3


def test_rg_flow_writes_state(tmp_path):
    out = tmp_path / "flow"
    result = run_cli(["rg-flow", "--order", "3", "--sigma", "1", "--out", str(out)])
    assert result.returncode == 0
    doc = json.loads((out / "flow_state.json").read_text())
    assert doc["order"] == 3
    assert (out / "resolvent.txt").read_text().splitlines() == ["1", "0", "1"]


def test_rg_flow_rational_sigma():
    result = run_cli(["rg-flow", "--order", "3", "--sigma", "1/2"])
    assert result.returncode == 0
    assert result.stdout.strip() == "1, 0, 1/4"


def test_rg_flow_with_perturbation_runs():
    result = run_cli(["rg-flow", "--order", "2", "--sigma", "1",
                      "--pert-graph", "v=4;e=0->1,1->0,2->3,3->2",
                      "--pert-coeff", "1", "--pert-nhalf", "-1"])
    assert result.returncode == 0
    assert result.stdout.strip().startswith("1, 0")


def test_rg_flow_bound_violation_exits_4():
    # an Eulerian perturbation with a non-decaying coefficient breaks the
    # strict negativity requirement already at t^0
    result = run_cli(["rg-flow", "--order", "1", "--sigma", "1",
                      "--pert-graph", "v=4;e=0->1,1->0,2->3,3->2",
                      "--pert-coeff", "1", "--pert-nhalf", "0"])
    assert result.returncode == 4
    assert "violation" in result.stderr


def test_plot_deterministic_and_wellformed(tmp_path):
    doc = dict(GUE_DOC, n_grid=[32], samples_per_n=4)
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    main(["sample", "--config", str(cfg), "--out", str(out)])
    svg1, svg2 = tmp_path / "a.svg", tmp_path / "b.svg"
    for target in (svg1, svg2):
        code = main(["plot", "--spectra", str(out / "spectra_N32.csv"),
                     "--sigma", "1", "--bins", "20", "--out", str(target)])
        assert code == 0
    assert svg1.read_bytes() == svg2.read_bytes()
    text = svg1.read_text()
    assert text.startswith("<svg ")
    assert 'width="800" height="500"' in text
    assert "polyline" in text and "rect" in text


def test_plot_missing_file_exits_2(tmp_path):
    result = run_cli(["plot", "--spectra", str(tmp_path / "nope.csv"),
                      "--out", str(tmp_path / "x.svg")])
    assert result.returncode == 2


def test_verify_combinatorics_suite():
    result = run_cli(["verify", "--suite", "combinatorics"])
    assert result.returncode == 0
    assert result.stdout.startswith("PASS")


def test_verify_unknown_suite():
    result = run_cli(["verify", "--suite", "bogus"])
    assert result.returncode == 2


def test_output_lock(tmp_path):
    cfg = write_config(tmp_path, GUE_DOC)
    out = tmp_path / "out"
    out.mkdir()
    (out / ".lock").touch()
    result = run_cli(["sample", "--config", str(cfg), "--out", str(out)])
    assert result.returncode == 2
    assert "lock" in result.stderr
