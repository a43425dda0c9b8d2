import json

import numpy as np
import pytest

from torelli.cli import main
from torelli.fixtures import TauFile, bundled
from torelli.poly import HomogeneousPoly, proportional
from torelli.solve import random_riemann_matrix


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, json.loads(out)


def _tau_file(tmp_path, scale):
    tau = random_riemann_matrix(4, seed=1, scale=scale)
    path = tmp_path / f"random_tau_{scale}.json"
    path.write_text(json.dumps(TauFile(4, tau.tau, label="random").to_dict()))
    return path


@pytest.fixture
def random_tau_file(tmp_path):
    return _tau_file(tmp_path, 0.25)


@pytest.fixture
def cusp_tau_file(tmp_path):
    """Large imaginary part: the lemma matrix is badly graded and the nullspace too big."""
    return _tau_file(tmp_path, 1.0)


def test_recover_trott_integers(capsys):
    code, rep = run(capsys, "recover", "trott_tau.json", "--basis-change", "--round-integers")
    assert code == 0
    poly = HomogeneousPoly.from_json(rep["outputs"]["integer_quartics"][0]["poly"])
    assert poly.coeffs == {(4, 0, 0): 81, (2, 2, 0): -225, (2, 0, 2): -225, (0, 4, 0): 144,
                           (0, 2, 2): 350, (0, 0, 4): 144}


def test_recover_genus4(capsys):
    code, rep = run(capsys, "recover", "genus4_tau.json")
    assert code == 0
    assert rep["diagnostics"]["nullspace_dim"] == 5 and len(rep["outputs"]["quartics"]) == 5
    assert "timings" not in rep["diagnostics"]


def test_recover_strict_dimension(capsys, cusp_tau_file, random_tau_file):
    code, rep = run(capsys, "recover", cusp_tau_file, "--strict")
    assert code == 3 and rep["diagnostics"]["nullspace_dim"] != 5
    code, _ = run(capsys, "recover", cusp_tau_file)
    assert code == 0
    code, rep = run(capsys, "recover", random_tau_file, "--strict")
    assert code == 0 and rep["diagnostics"]["nullspace_dim"] == 5


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"genus": 3, "re": [')
    code, rep = run(capsys, "recover", bad)
    assert code == 2 and "malformed JSON" in rep["diagnostics"]["error"]
    code, _ = run(capsys, "recover", tmp_path / "missing.json")
    assert code == 2


def test_invalid_tau(capsys, tmp_path):
    path = tmp_path / "neg.json"
    path.write_text(json.dumps({"genus": 1, "re": [[0.0]], "im": [[-1.0]]}))
    code, rep = run(capsys, "recover", path)
    assert code == 2 and "positive definite" in rep["diagnostics"]["error"]


def test_witness_from_tau_and_round_trip(capsys, tmp_path):
    code, direct = run(capsys, "witness", "genus4_tau.json", "--seed", 7)
    assert code == 0 and direct["outputs"]["count"] == 6
    out = tmp_path / "quartics.json"
    run(capsys, "recover", "genus4_tau.json", "--out", out)
    code, via_file = run(capsys, "witness", out, "--seed", 7)
    assert code == 0
    assert via_file["outputs"] == direct["outputs"]


def test_witness_genus5(capsys):
    code, rep = run(capsys, "witness", "genus5_tau.json")
    assert code == 0 and rep["outputs"]["count"] == 8


def test_witness_non_jacobian(capsys, random_tau_file):
    code, rep = run(capsys, "witness", random_tau_file)
    assert code == 4 and rep["outputs"]["count"] == 0


def test_witness_path_budget(capsys, tmp_path):
    x = [HomogeneousPoly.variable(11, i) for i in range(11)]
    p = x[0] ** 4 + x[10] ** 4
    path = tmp_path / "big.json"
    path.write_text(json.dumps({"polynomials": [p.to_json()]}))
    code, rep = run(capsys, "witness", path)
    assert code == 5 and "paths" in rep["diagnostics"]["error"]


def test_outputs_deterministic(capsys):
    main(["witness", "genus4_tau.json", "--seed", "3"])
    first = capsys.readouterr().out
    main(["witness", "genus4_tau.json", "--seed", "3"])
    assert capsys.readouterr().out == first


def test_schottky(capsys):
    code, rep = run(capsys, "schottky", "--genus", 4, "--trials", 0)
    assert code == 0 and rep["outputs"]["trials"] == []
    code, rep = run(capsys, "schottky", "--tau", "genus4_tau.json")
    assert rep["outputs"]["trials"][0]["verdict"] == "consistent with Jacobian"
    code, rep = run(capsys, "schottky", "--genus", 4, "--trials", 2)
    assert rep["outputs"]["tally"]["not a Jacobian"] == 2
    assert rep["inputs"]["scale"] == 0.25
    code, _ = run(capsys, "schottky", "--genus", 2)
    assert code == 2
    code, _ = run(capsys, "schottky", "--scale", 0)
    assert code == 2


def test_singular(capsys):
    code, rep = run(capsys, "singular", "genus4_tau.json", "--emit-quadric", "--emit-cubic")
    assert code == 0 and rep["diagnostics"]["residual"] <= 1e-10
    q = HomogeneousPoly.from_json(rep["outputs"]["user_quadric"])
    target = HomogeneousPoly(4, 2, {(1, 0, 0, 1): 1, (0, 1, 1, 0): -1})
    assert proportional(q, target, 1e-6)[0]
    assert "user_cubic" in rep["outputs"]
    code, rep = run(capsys, "singular", "trott_tau.json")
    assert code == 2 and "GenusTooSmall" in rep["diagnostics"]["error"]
    code, rep = run(capsys, "singular", "genus4_tau.json", "--budget", 0)
    assert code == 6


def test_singular_genus5(capsys):
    code, rep = run(capsys, "singular", "genus5_tau.json")
    assert code == 0 and rep["diagnostics"]["residual"] <= 1e-10


def test_constants(capsys, tmp_path):
    code, rep = run(capsys, "constants", "trott_tau.json")
    assert code == 0 and rep["outputs"]["counts"]["order_0_2"] == 56 and rep["outputs"]["counts"]["order_4"] == 120
    out = tmp_path / "table.json"
    code, rep = run(capsys, "constants", "genus4_tau.json", "--orders", "0", "--out", out, "--timings")
    assert rep["outputs"]["counts"] == {"order_0": 16, "order_0_2": 16, "order_4": 0}
    table = json.loads(out.read_text())
    assert all(set(e) == {"eps", "value0"} for e in table["entries"])
    assert "order_0" in rep["diagnostics"]["timings"]
    code, _ = run(capsys, "constants", "trott_tau.json", "--orders", "3")
    assert code == 2


def test_verify(capsys, tmp_path):
    code, rep = run(capsys, "verify", "genus4_tau.json")
    assert code == 0 and rep["outputs"]["residual"] <= 1e-7
    tf = bundled("genus4")
    r = np.random.default_rng(0)
    tf.sample_points = [p + 1e-3 * (r.standard_normal(4) + 1j * r.standard_normal(4)) for p in tf.sample_points]
    moved = tmp_path / "moved.json"
    moved.write_text(json.dumps(tf.to_dict()))
    code, _ = run(capsys, "verify", moved)
    assert code == 7
    tf.sample_points = []
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps(tf.to_dict()))
    code, rep = run(capsys, "verify", empty)
    assert code == 2 and "sample_points" in rep["diagnostics"]["error"]
