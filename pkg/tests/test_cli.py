import json
import math

import pytest

from qpsync.cli import main
from qpsync.experiments import (ExperimentConfig, run_verify_suite, asymmetry, latitude_matrix,
                                default_dphi_grid, equator_row_error)
from qpsync.gates import C01, C10, U_MAX, ry, rz
from qpsync.linalg import mat_mul_chain, tensor_product
from qpsync.records import read_table
from qpsync.states import I2


def test_concurrence_scan(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["concurrence-scan", "--out", str(out)]) == 0
    t = read_table(out)
    assert t.meta["config"]["command"] == "concurrence-scan"
    rows = {round(r[0], 12): r[1] for r in t.rows}
    assert rows[0.0] == pytest.approx(0.5, abs=1e-12)
    assert max(t.column("abs_residual")) < 1e-10


def test_latitude_sweep_file(tmp_path):
    out = tmp_path / "lat.json"
    assert main(["latitude-sweep", "--out", str(out), "--format", "json"]) == 0
    t = read_table(out)
    assert len(t.rows) == 33 * 64
    assert None in t.column("psf")


def test_mixed_equator_row():
    m = latitude_matrix(U_MAX, [math.pi / 2], default_dphi_grid(), r1=0.3, r2=0.9)
    err, only = equator_row_error(m[0], default_dphi_grid())
    assert err < 1e-10


def test_mean_psf_and_witness(tmp_path, capsys):
    assert main(["mean-psf", "--samples", "20000", "--quad-order", "8"]) == 0
    assert "quadrature" in capsys.readouterr().out
    assert main(["witness", "--params", "0,0,0,0,0,0,0,0"]) == 0


def test_distributions_raw(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["distributions", "--samples", "5000", "--raw", "--out", str(out)]) == 0
    t = read_table(out)
    dens = [r[3] for r in t.rows if r[0] == "relative_phase"]
    assert len(dens) == 180 and sum(dens) == pytest.approx(1.0)
    assert len(read_table(tmp_path / "d.raw.csv").rows) == 5000


def test_identity_phase_histogram_uniform():
    from qpsync.experiments import phase_histograms
    n = 400_000
    _, pd, *_ = phase_histograms([0] * 8, n, seed=11)
    expected = 1 / 180
    sigma = math.sqrt(expected * (1 - expected) / n)
    assert abs(pd - expected).max() < 4 * sigma
    assert asymmetry(pd) < 0.05


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 4, "n_samples": 10000, "format": "json"}))
    out = tmp_path / "m.json"
    assert main(["mean-psf", "--config", str(cfg), "--seed", "5", "--quad-order", "6", "--out", str(out)]) == 0
    meta = read_table(out).meta["config"]
    assert meta["seed"] == 5 and meta["n_samples"] == 10000


@pytest.mark.parametrize("argv", [
    ["mean-psf", "--params", "1,2,3"],
    ["mean-psf", "--quad-order", "2"],
    ["mean-psf", "--eps-phase", "-1"],
    ["mean-psf", "--workers", "0"],
])
def test_invalid_input_exit_code(argv):
    assert main(argv) == 2


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sed": 4}))
    assert main(["witness", "--config", str(cfg)]) == 2


def test_io_error_exit_code(tmp_path):
    assert main(["concurrence-scan", "--out", str(tmp_path / "nope" / "x.csv")]) == 3
    assert main(["witness", "--config", str(tmp_path / "absent.json")]) == 3


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == 2


def test_verify_negative_control():
    # core with its two middle layers applied in the wrong order
    def broken(a, b, g):
        return mat_mul_chain([C10, tensor_product(rz(g), ry(a)), C01, tensor_product(I2, ry(b)), C10])

    checks = {c.name: c for c in run_verify_suite(ExperimentConfig(n_samples=20_000), uc=broken, budget=40)}
    assert not checks["proof-state-03"].passed
    assert checks["blank-sync"].passed


def test_verify_passes_at_two_seeds(tmp_path):
    for seed in (1, 2):
        out = tmp_path / f"v{seed}.json"
        assert main(["verify", "--seed", str(seed), "--out", str(out)]) == 0
        t = read_table(out)
        assert t.meta["all_passed"] is True
        assert set(t.columns) == {"check", "statistic", "threshold", "passed"}
