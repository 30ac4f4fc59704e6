import io
import json
import subprocess
import sys

import numpy as np
import pytest

from layergreen.cli import main
from layergreen.io import read_grid_binary


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("a_plus, expected", [("1", 0.0795775), ("2", 0.0442097)])
def test_eval_examples(a_plus, expected):
    code, out, err = run("eval", "--a-plus", a_plus, "--a-minus", "1", "--x", "0,0,2",
                         "--y", "0,0,1")
    assert code == 0 and err == ""
    rec = json.loads(out)["records"][0]
    assert rec["u"] == pytest.approx(expected, abs=5e-8)
    assert len(rec["grad"]) == 3


def test_eval_singular_point():
    code, out, err = run("eval", "--x", "0,0,1", "--y", "0,0,1")
    assert code == 2
    assert out == ""
    assert "singular evaluation" in err


def test_eval_interface_needs_side():
    assert run("eval", "--x", "1,0,0")[0] == 2
    code, out, _ = run("eval", "--x", "1,0,0", "--side", "plus", "--format", "csv")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "x1,x2,x3,y1,y2,y3,u,du1,du2,du3"
    assert 2.0 * float(row.split(",")[-1]) == pytest.approx(0.0187566, abs=5e-8)


def test_eval_multiple_points_csv():
    code, out, _ = run("eval", "--format", "csv", "--x", "0,0,2", "--x", "0,0,-1")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 3
    assert float(lines[2].split(",")[6]) == pytest.approx(1 / (12 * np.pi), rel=1e-15)


def test_trace_swap_invariant():
    a = json.loads(run("trace", "--x", "1,0,0", "--a-plus", "2", "--a-minus", "1")[1])
    b = json.loads(run("trace", "--x", "1,0,0", "--a-plus", "1", "--a-minus", "2")[1])
    assert a["records"][0]["u"] == b["records"][0]["u"] == pytest.approx(1 / (6 * np.pi))


def test_invalid_medium():
    code, out, err = run("eval", "--a-plus", "-1")
    assert code == 2 and out == "" and "a_plus" in err


def test_verify_default_passes():
    code, out, _ = run("verify", "--pairs", "100")
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert {c["name"] for c in rep["checks"]} >= {"reciprocity", "transmission", "bounds",
                                                  "harmonicity", "ode_residuals",
                                                  "hankel_identity"}


def test_verify_fault_injection_fails():
    code, out, err = run("verify", "--pairs", "100", "--inject-fault")
    rep = json.loads(out)
    assert code == 1
    assert not {c["name"]: c for c in rep["checks"]}["transmission"]["passed"]
    assert "failed" in err


def test_verify_free_space_fast_path():
    code, out, _ = run("verify", "--pairs", "100", "--a-plus", "1", "--a-minus", "1")
    rep = json.loads(out)
    assert code == 0 and rep["b_zero_fast_path"] is True


def test_verify_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("verify", "--pairs", "50", "--output", str(a))[:2] == (0, "")
    assert run("verify", "--pairs", "50", "--output", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_oracle_compare_spectral():
    code, out, _ = run("oracle-compare", "--spectral", "--pairs", "20")
    rep = json.loads(out)["spectral"]
    assert code == 0 and rep["pairs_done"] == 20
    assert rep["max_rel_error"] <= 1e-6


def test_oracle_compare_fd_small():
    code, out, _ = run("oracle-compare", "--fd", "--grid-n", "17,33")
    rep = json.loads(out)["fd"]
    assert code == 0 and rep["decreasing"]
    assert [g["n"] for g in rep["grids"]] == [17, 33]


def test_oracle_compare_fd_threshold_failure():
    code, out, _ = run("oracle-compare", "--fd", "--grid-n", "17", "--threshold", "1e-6")
    assert code == 1 and json.loads(out)["passed"] is False


def test_oracle_compare_nonconvergence():
    code, out, err = run("oracle-compare", "--spectral", "--pairs", "3", "--nu-max", "2")
    assert code == 3
    assert "non-convergence" in err


def test_oracle_compare_needs_choice():
    assert run("oracle-compare")[0] == 2


def test_experiments_blowup_csv():
    code, out, _ = run("experiments", "--blowup", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "d,I" and len(lines) == 5


def test_experiments_blowup_zero_contrast():
    code, out, _ = run("experiments", "blowup", "--v", "0")
    rep = json.loads(out)["blowup"]
    assert code == 0 and rep["fit"]["trivial"] and rep["fit"]["values"] == [0.0] * 4


def test_experiments_curved_small():
    code, out, _ = run("experiments", "--curved", "--scales", "0.4,0.2", "--grid-n", "33")
    rep = json.loads(out)["curved"]
    assert code == 0 and rep["strictly_decreasing"]
    assert all(r["relative_error"] == 0.0 for r in rep["flat_control"]["rows"])


def test_experiments_unknown_name():
    code, out, err = run("experiments", "nonsense")
    assert code == 2 and out == ""
    assert "usage" in err


def test_experiments_requires_choice():
    assert run("experiments")[0] == 2


def test_export_grid_csv():
    code, out, _ = run("export-grid", "--grid-n", "17", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "x1,x2,x3,value" and len(lines) == 17 ** 3 + 1


def test_export_grid_binary(tmp_path):
    path = tmp_path / "u.bin"
    code, out, _ = run("export-grid", "--grid-n", "17", "--field", "fd", "--format", "bin",
                       "--output", str(path))
    assert code == 0 and out == ""
    values, meta = read_grid_binary(path)
    assert values.shape == (17, 17, 17) and meta["kind"] == "fd"


def test_export_grid_bin_needs_output():
    assert run("export-grid", "--format", "bin")[0] == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"a_plus": 1.0, "a_minus": 1.0, "x": [[0, 0, 2]]}))
    rec = json.loads(run("eval", "--config", str(cfg))[1])["records"][0]
    assert rec["u"] == pytest.approx(1 / (4 * np.pi))
    rec = json.loads(run("eval", "--config", str(cfg), "--a-plus", "2")[1])["records"][0]
    assert rec["u"] == pytest.approx(5 / (36 * np.pi))


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"grid_n": [33]}))
    code, _, err = run("eval", "--config", str(cfg))
    assert code == 2 and "grid_n" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "layergreen", "eval", "--format", "csv"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("x1,x2,x3")


def test_nonconvergence_keeps_partial_results():
    code, out, _ = run("oracle-compare", "--spectral", "--pairs", "3", "--nu-max", "2")
    rep = json.loads(out)
    assert code == 3
    assert rep["spectral"]["pairs_done"] < 3
    assert "nonconvergence" in rep
