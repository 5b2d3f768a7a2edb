import csv
import json

import numpy as np
import pytest

from tphcov.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_RESOURCE, main


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_kernel_table(tmp_path):
    assert main(["kernel-table", "--space", "sphere", "--d", "2", "--p", "3", "--grid-size", "11",
                 "--out", str(tmp_path)]) == EXIT_OK
    table = rows(tmp_path / "spectral.csv")
    assert table[0] == ["ell", "lambda", "dim", "kappa"]
    assert table[2][:3] == ["1", "-2", "3"]
    assert float(table[2][3]) == pytest.approx(3.0, rel=1e-14)
    assert len(table) == 85 + 1
    kern = rows(tmp_path / "kernel.csv")
    assert kern[0] == ["t", "psi"] and len(kern) == 12
    assert float(kern[-1][0]) == 1.0


def test_kernel_table_spectral_only(tmp_path):
    assert main(["kernel-table", "--space", "rp", "--d", "3", "--ell-max", "6", "--out", str(tmp_path)]) == EXIT_OK
    assert [r[0] for r in rows(tmp_path / "spectral.csv")[1:]] == ["0", "2", "4", "6"]
    assert not (tmp_path / "kernel.csv").exists()


def test_exit_codes(tmp_path):
    assert main(["kernel-table", "--space", "sphere", "--d", "2", "--p", "0.5", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["kernel-table", "--space", "torus", "--d", "2", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["kernel-table", "--space", "sphere", "--d", "2", "--p", "1.1", "--tol", "1e-14",
                 "--out", str(tmp_path)]) == EXIT_RESOURCE
    assert main(["rate-study", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_simulate_then_estimate(tmp_path):
    cfg = {"space": {"kind": "sphere", "d": 2}, "noise": {"sigma2": 0.1}, "n": 6, "r": 3, "seed": 5}
    (tmp_path / "model.json").write_text(json.dumps(cfg))
    assert main(["simulate", "--config", str(tmp_path / "model.json"), "--out", str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "dataset.json").read_text())
    assert len(data["subjects"]) == 6 and len(data["subjects"][0]["values"]) == 3

    again = tmp_path / "again"
    main(["simulate", "--config", str(tmp_path / "model.json"), "--out", str(again)])
    assert (again / "dataset.json").read_text() == (tmp_path / "dataset.json").read_text()

    (tmp_path / "grid.json").write_text(json.dumps(np.eye(3).tolist()))
    out = tmp_path / "fit"
    assert main(["estimate", str(tmp_path / "dataset.json"), "--eta", "theorem",
                 "--grid", str(tmp_path / "grid.json"), "--out", str(out)]) == EXIT_OK
    est = json.loads((out / "estimate.json").read_text())
    assert len(est["coeffs"]) == 6 * 3 * 2 == len(est["anchors"])
    g = rows(out / "grid.csv")
    assert g[0] == ["u_index", "v_index", "value"] and len(g) == 10
    vals = {(int(a), int(b)): float(v) for a, b, v in g[1:]}
    assert vals[(0, 1)] == pytest.approx(vals[(1, 0)], rel=1e-9)

    assert main(["estimate", str(tmp_path / "dataset.json"), "--eta", "abc", "--out", str(out)]) == EXIT_CONFIG
    assert main(["estimate", str(tmp_path / "dataset.json"), "--eta", "0", "--out", str(out)]) == EXIT_CONFIG


def test_estimate_numerical_failure(tmp_path):
    # identical locations in both subjects and a negligible penalty: the system is singular in floating point
    pts = [[1.0, 0.0, 0.0]] * 2
    data = {"space": {"kind": "sphere", "d": 2},
            "subjects": [{"locations": pts, "values": [1.0, 1.0]}, {"locations": pts, "values": [2.0, -1.0]}]}
    (tmp_path / "d.json").write_text(json.dumps(data))
    assert main(["estimate", str(tmp_path / "d.json"), "--eta", "1e-300", "--out", str(tmp_path)]) == EXIT_NUMERICAL


def test_rate_study_smoke(tmp_path):
    cfg = {"grid": [[25, 5], [50, 5], [75, 5]], "replications": 2, "error_samples": 200, "seed": 2}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["rate-study", "--config", str(tmp_path / "cfg.json"), "--out", str(a)]) == EXIT_OK
    assert main(["rate-study", "--config", str(tmp_path / "cfg.json"), "--out", str(b), "--threads", "2"]) == EXIT_OK
    assert (a / "report.csv").read_bytes() == (b / "report.csv").read_bytes()
    assert rows(a / "report.csv")[0] == ["n", "r", "eta", "mean_sq_error", "std_error", "c0"]
    summary = json.loads((a / "summary.json").read_text())
    assert {"slope", "target", "band"} <= set(summary)
    assert summary["target"] == -0.75
    main(["rate-study", "--config", str(tmp_path / "cfg.json"), "--seed", "3", "--out", str(b)])
    assert (a / "report.csv").read_bytes() != (b / "report.csv").read_bytes()
