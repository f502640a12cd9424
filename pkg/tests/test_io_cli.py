import json
from io import StringIO

import numpy as np
import pytest

from dsspec import block_ab, io, sl_scalar
from dsspec.cli import main
from helpers import MIXED2, TOP2, closing_example


def run(*argv):
    out, err = StringIO(), StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv):
    code, out, err = run(*argv)
    assert code == 0, err
    return json.loads(out)


def as_complex(x):
    return complex(x[0], x[1])


@pytest.fixture
def closing_file(tmp_path):
    sys, alpha, beta = closing_example()
    path = tmp_path / "closing.json"
    io.save_system(path, sys, alpha, beta)
    return str(path)


def test_round_trip_is_bit_identical(tmp_path):
    rng = np.random.default_rng(0)
    sys = block_ab(0.1 + rng.random(), np.pi, 3)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    io.save_system(p1, sys, TOP2, MIXED2, {"note": "x"})
    loaded, alpha, beta, meta = io.load_system(p1)
    io.save_system(p2, loaded, alpha, beta, meta)
    assert p1.read_bytes() == p2.read_bytes()
    assert np.array_equal(loaded.S, sys.S) and np.array_equal(loaded.Psi, sys.Psi)
    assert np.array_equal(beta, MIXED2)


def test_negative_zero_survives():
    text = io.dumps({"x": -0.0, "y": 0.1})
    assert json.loads(text)["x"] == 0 and "-0" in text
    assert float(json.loads(text)["y"]) == 0.1


def test_hand_written_scalar_document(tmp_path):
    # three steps of weight 1 in the scalar family
    S = [[[1, 0], [0, 1]]] * 3
    Psi = [[[0, 0], [0, 1]]] * 3
    path = tmp_path / "hand.json"
    path.write_text(json.dumps({"n": 1, "N": 2, "S": S, "Psi": Psi, "alpha": [[1, 0]], "beta": [[1, 0]]}))
    sys, alpha, beta, meta = io.load_system(path)
    assert (sys.n, sys.N) == (1, 2) and meta == {}
    ref = sl_scalar([0, 1, 2, 3])
    assert np.allclose(sys.Psi, ref.Psi) and np.allclose(sys.S, ref.S)


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("validate", str(bad))[0] == 2
    bad.write_text(json.dumps({"n": 1, "N": 0, "S": [[[1, 0], [0, 1]]]}))
    code, _, err = run("validate", str(bad))
    assert code == 2 and "Psi" in err
    bad.write_text(json.dumps({"n": 1, "N": 1, "S": [[[1, 0], [0, 1]]], "Psi": [[[0, 0], [0, 1]]]}))
    assert run("validate", str(bad))[0] == 2
    assert run("validate", str(tmp_path / "missing.json"))[0] == 2
    assert run("no-such-command")[0] == 2


def test_non_hermitian_weight_is_a_validation_failure(tmp_path):
    path = tmp_path / "skew.json"
    Psi = [[[0, 0], [0, 1]], [[0, 1], [0, 1]]]
    path.write_text(json.dumps({"n": 1, "N": 1, "S": [[[1, 0], [0, 1]]] * 2, "Psi": Psi}))
    code, out, err = run("validate", str(path))
    assert code == 3 and out == ""
    payload = json.loads(err)
    assert payload["error"] == "validation"
    assert payload["report"]["failing"]["psi_hermitian"] == [1]


def test_validate_accepts_good_system(closing_file):
    out = run_json("validate", closing_file)
    assert out["validation"]["passed"] and (out["n"], out["N"]) == (1, 1)


def test_scalar_example_spectrum(tmp_path):
    path = tmp_path / "sl.json"
    assert run_json("build-example", "sl-scalar", "--v", "0", "1", "2", "-o", str(path)) == {"written": str(path)}
    out = run_json("spectrum", str(path))
    (row,) = out["eigenvalues"]
    assert abs(as_complex(row["lambda"])) <= 1e-12
    assert row["alg_mult"] == row["geom_mult"] == 1
    assert row["eigenfunction_norms"][0] == pytest.approx(np.sqrt(2), rel=1e-12)


def test_block_example_spectrum(tmp_path):
    path = tmp_path / "ab.json"
    run_json("build-example", "block-ab", "--a", "1", "--b", "1", "--N", "1", "--beta", "[[0,0,1,0],[0,0,0,1]]", "-o", str(path))
    out = run_json("spectrum", str(path))
    (row,) = out["eigenvalues"]
    assert abs(as_complex(row["lambda"]) - 0.5) <= 1e-12


def test_trivial_weight_is_not_definite(tmp_path):
    path = tmp_path / "flat.json"
    run_json("build-example", "sl-scalar", "--v", "0", "0", "0", "-o", str(path))
    assert run_json("atkinson", str(path))["holds"] is False
    assert run_json("spectrum", str(path))["atkinson_holds"] is False


def test_alpha_override(closing_file):
    out = run_json("mfunction", closing_file, "--lambda", "0,1", "--alpha", "[[0,1]]", "--beta", "[[1,0]]")
    assert len(out["M"]) == 1
    code, _, err = run("mfunction", closing_file, "--lambda", "0,1", "--alpha", "[[1,1]]")
    assert code == 2 and "boundary" in err


def test_mfunction_values_and_domain_error(closing_file):
    out = run_json("mfunction", closing_file, "--lambda", "1,1", "--check-representation")
    assert abs(as_complex(out["M"][0][0]) + 1 / (2 * (1 + 1j))) <= 1e-12
    assert run("mfunction", closing_file, "--lambda", "0,0")[0] == 4


def test_output_is_deterministic(closing_file):
    first = run("report", closing_file)
    second = run("report", closing_file)
    assert first[0] == 0 and first == second
    report = json.loads(first[1])
    assert report["checks"]["representation_gap"] <= 1e-10
    assert report["checks"]["imaginary_excess_min_eig"] >= -1e-12


def test_spectral_function_plot(closing_file, tmp_path):
    plot = tmp_path / "tau.tsv"
    out = run_json("spectral-fn", closing_file, "--emit-plot", str(plot), "--samples", "11")
    assert as_complex(out["jumps"][0]["D"][0][0]) == pytest.approx(0.5)
    lines = plot.read_text().splitlines()
    assert lines[0] == "t\tre_tau_00\tim_tau_00"
    rows = [list(map(float, line.split("\t"))) for line in lines[1:]]
    assert all(abs(r[1] - (-0.5 if r[0] < 0 else 0.0)) <= 1e-14 for r in rows)


def test_solve_and_green(closing_file, tmp_path):
    rhs = tmp_path / "f.json"
    rhs.write_text(json.dumps({"f": [[1, 0], [0, 1], [0, 0]]}))
    a = run_json("solve", closing_file, "--lambda", "0,1", "--rhs", str(rhs))
    b = run_json("solve", closing_file, "--lambda", "0,1", "--rhs", str(rhs), "--oracle")
    za = np.array([[as_complex(x) for x in row] for row in a["z"]])
    zb = np.array([[as_complex(x) for x in row] for row in b["z"]])
    assert np.abs(za - zb).max() <= 1e-12
    assert run("green", closing_file, "--lambda", "0,1", "--row", "0")[0] == 0
    assert run("green", closing_file, "--lambda", "0,1", "--row", "9")[0] != 0


def test_missing_boundary_is_a_usage_error(tmp_path):
    path = tmp_path / "nob.json"
    io.save_system(path, sl_scalar([0, 1, 2]))
    code, _, err = run("spectrum", str(path))
    assert code == 2 and "boundary" in err
