import json

import numpy as np
import pytest

from eoa3.cli import main
from eoa3.qcore import density_to_json, reduced_density, state_to_json
from eoa3.states import ghz_state, product_state, w_state


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_ghz(capsys):
    code, out, _ = run(capsys, "analyze", "--family", "ghz", "--monotone", "e2")
    assert code == 0
    payload = json.loads(out)
    assert payload["eoaConstructive"] == pytest.approx(1.0, abs=1e-9)
    assert payload["verdict"] == "lossless"


def test_analyze_w(capsys):
    code, out, _ = run(capsys, "analyze", "--family", "w")
    assert code == 0
    payload = json.loads(out)
    assert payload["eoaConstructive"] == pytest.approx(2 / 3, abs=1e-9)
    assert payload["verdict"] == "lossy"


def test_analyze_product_file(capsys, tmp_path):
    path = tmp_path / "product.json"
    path.write_text(state_to_json(product_state()))
    code, out, _ = run(
        capsys, "analyze", "--state", str(path), "--monotone", "concurrence"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["cutA"] == pytest.approx(0.0, abs=1e-12)
    assert payload["eoaConstructive"] == pytest.approx(0.0, abs=1e-9)


def test_analyze_malformed_state(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, err = run(capsys, "analyze", "--state", str(path))
    assert code == 2
    assert "error" in err


def test_analyze_determinism(capsys):
    _, out1, _ = run(capsys, "analyze", "--family", "haar", "--seed", "9")
    _, out2, _ = run(capsys, "analyze", "--family", "haar", "--seed", "9")
    assert out1 == out2


def test_verify_pass_and_counterexample(capsys):
    code, out, _ = run(
        capsys, "verify", "thm1", "--trials", "10", "--seed", "7", "--tol", "1e-7"
    )
    assert code == 0
    assert json.loads(out)["failures"] == 0
    code, out, _ = run(capsys, "verify", "thm1", "--trials", "1", "--tol", "1e-30")
    assert code == 1
    assert "firstCounterexample" in json.loads(out)


def test_verify_ckw_and_csv(capsys):
    code, out, _ = run(
        capsys, "verify", "ckw", "--trials", "5", "--format", "csv"
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 6  # header + one row per trial
    assert "tau" in lines[0]


def test_verify_invalid_config(capsys):
    code, _, _ = run(capsys, "verify", "thm1", "--trials", "0")
    assert code == 2


def test_decompose_modes(capsys, tmp_path):
    rho_path = tmp_path / "rho.json"
    rho_path.write_text(density_to_json(reduced_density(ghz_state(), (0, 1))))
    code, out, err = run(
        capsys, "decompose", "--mode", "hjw", "--rho", str(rho_path), "--basis", "x"
    )
    assert code == 0
    payload = json.loads(out)
    assert len(payload["elements"]) == 2
    assert "concurrence 1.0" in err
    code, out, _ = run(capsys, "decompose", "--mode", "entangled", "--rho", str(rho_path))
    assert code == 0
    code, out, _ = run(capsys, "decompose", "--mode", "equalc", "--rho", str(rho_path))
    assert code == 0


def test_decompose_pure_marginal_exit_2(capsys, tmp_path):
    from eoa3.qcore import DensityMatrix

    rho = DensityMatrix.from_matrix(np.diag([0.5, 0.5, 0, 0]).astype(complex))
    path = tmp_path / "purem.json"
    path.write_text(density_to_json(rho))
    code, _, err = run(capsys, "decompose", "--mode", "entangled", "--rho", str(path))
    assert code == 2
    assert "pure" in err


def test_out_file_written(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, out, _ = run(
        capsys, "analyze", "--family", "w", "--out", str(out_path)
    )
    assert code == 0
    assert out == ""
    payload = json.loads(out_path.read_text())
    assert payload["verdict"] == "lossy"
