import json

import numpy as np
import pytest

from torusgrade import formats as fmt
from torusgrade import matrix_core as mc
from torusgrade.cli import main
from torusgrade.grading import GradingSpec, grading_from_action
from torusgrade.matrix_core import matrix_unit
from torusgrade.torus_action import WeightedAction, spectral_component


def write_matrix(path, a):
    path.write_text(fmt.dumps(fmt.matrix_to_json(a)), encoding="utf-8")
    return str(path)


@pytest.fixture
def m2_spec(tmp_path):
    p = tmp_path / "m2.json"
    fmt.write_spec(grading_from_action(WeightedAction.from_weights([[1], [0]])), p)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# ---- formats -------------------------------------------------------------

def test_spec_round_trip(tmp_path, rng):
    spec = grading_from_action(WeightedAction(rng.integers(-2, 3, size=(3, 2)))).conjugated(
        mc.random_unitary(rng, 3))
    data = fmt.spec_to_json(spec)
    again = fmt.spec_to_json(fmt.spec_from_json(json.loads(fmt.dumps(data))))
    assert again == data


def test_json_floats_are_lossless():
    xs = [0.1, 1 / 3, 2.0, -1e-300, 123456789.123456789]
    text = fmt.dumps({"x": xs})
    assert json.loads(text)["x"] == xs
    assert "2.0" in text


@pytest.mark.parametrize("bad, msg", [
    ({"rank": 1, "dim": 2}, "missing field"),
    ({"rank": 1, "dim": 2, "subspaces": [{"degree": [0, 1], "basis": []}]}, "degree"),
    ({"rank": 1, "dim": 2, "subspaces": [{"degree": [0], "basis": [[[[1, 0]]]]}]}, "rows"),
    ({"rank": 1, "dim": 1, "subspaces": [{"degree": [0], "basis": [[[[1, 0]]]]},
                                        {"degree": [0], "basis": [[[[1, 0]]]]}]}, "duplicate"),
])
def test_spec_schema_errors(bad, msg):
    with pytest.raises(fmt.FormatError, match=msg):
        fmt.spec_from_json(bad)


def test_parse_helpers():
    assert fmt.parse_weights("1,0").tolist() == [[1], [0]]
    assert fmt.parse_weights("1,0;0,1").tolist() == [[1, 0], [0, 1]]
    assert fmt.parse_weights("[[2],[3]]").tolist() == [[2], [3]]
    assert fmt.parse_multi_indices("1,4", 2) == [(1, 1), (4, 4)]
    assert fmt.parse_multi_indices("1:2,3:0", 2) == [(1, 2), (3, 0)]
    with pytest.raises(fmt.FormatError):
        fmt.parse_multi_indices("1:2:3", 2)
    with pytest.raises(fmt.FormatError):
        fmt.parse_weights("a,b")


def test_csv_formats(tmp_path):
    text = fmt.format_csv(["N_1", "error"], [(8, 0.5)])
    assert text == "N_1,error\n8,5.000000000000e-01\n"
    t = np.linspace(0, 0.5, 5)
    v = np.exp(2j * np.pi * t)
    p = tmp_path / "s.csv"
    fmt.write_csv(p, ["t", "re", "im"], fmt.samples_rows(t, v))
    t2, v2 = fmt.read_samples_csv(p)
    assert np.allclose(t2, t) and np.allclose(v2, v, atol=1e-12)
    from torusgrade.function_models import TrigPoly
    poly = TrigPoly.from_dict({-1: 1j, 2: 0.5})
    q = tmp_path / "p.csv"
    fmt.write_csv(q, ["n", "re", "im"], fmt.trigpoly_rows(poly))
    assert np.allclose(fmt.read_trigpoly_csv(q).coeffs, poly.coeffs)


# ---- check ---------------------------------------------------------------

def test_check_canonical_exit_0(capsys, m2_spec):
    code, out, _ = run(capsys, "check", "--spec", m2_spec)
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "pass" and doc["seed"] == 0xC57A1
    assert {"independence", "adjoint_symmetry", "multiplicativity", "totality",
            "representation"} <= set(doc["axioms"])


def test_check_corrupted_exit_1(capsys, tmp_path, m2_spec):
    data = json.loads(open(m2_spec).read())
    for entry in data["subspaces"]:
        if entry["degree"] == [0]:
            entry["basis"].append(fmt.matrix_to_json(matrix_unit(2, 0, 1)))
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(data))
    code, out, _ = run(capsys, "check", "--spec", str(p))
    assert code == 1
    adj = json.loads(out)["axioms"]["adjoint_symmetry"]
    assert adj["status"] == "fail" and adj["worst_residual"] == pytest.approx(1.0)


def test_check_truncated_json_exit_2(capsys, tmp_path, m2_spec):
    p = tmp_path / "trunc.json"
    p.write_text(open(m2_spec).read()[:40])
    code, _, err = run(capsys, "check", "--spec", str(p))
    assert code == 2 and "line" in err and "column" in err


def test_check_missing_file_and_bad_args(capsys, tmp_path):
    assert run(capsys, "check", "--spec", str(tmp_path / "none.json"))[0] == 2
    assert run(capsys, "check")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


# ---- decompose -----------------------------------------------------------

def test_decompose_identity(capsys, tmp_path):
    el = write_matrix(tmp_path / "eye.json", np.eye(2))
    out = tmp_path / "out"
    code, stdout, _ = run(capsys, "decompose", "--weights", "1,0", "--element", el, "--out", str(out))
    assert code == 0
    index = json.loads((out / "index.json").read_text())
    assert [c["degree"] for c in index["components"]] == [[0]]
    assert json.loads(stdout) == index


def test_decompose_e12(capsys, tmp_path):
    el = write_matrix(tmp_path / "e12.json", matrix_unit(2, 0, 1))
    out = tmp_path / "out"
    assert run(capsys, "decompose", "--weights", "1,0", "--element", el, "--out", str(out))[0] == 0
    comps = json.loads((out / "index.json").read_text())["components"]
    assert [c["degree"] for c in comps] == [[1]]
    assert sorted(p.name for p in out.iterdir()) == ["component_1.json", "index.json"]


def test_decompose_random_matches_library(capsys, tmp_path, rng):
    a = mc.random_cmatrix(rng, 3)
    el = write_matrix(tmp_path / "a.json", a)
    out = tmp_path / "out"
    assert run(capsys, "decompose", "--weights", "0,1,3", "--element", el, "--out", str(out))[0] == 0
    index = json.loads((out / "index.json").read_text())
    alpha = WeightedAction.from_weights([[0], [1], [3]])
    total = np.zeros((3, 3), dtype=complex)
    for c in index["components"]:
        m = fmt.read_matrix(out / c["file"])
        assert mc.op_norm(m - spectral_component(alpha, a, c["degree"])) == 0.0
        total += m
    assert mc.op_norm(total - a) < 1e-12
    assert index["reassembly_error"] < 1e-12
    assert index["quadrature_discrepancy"] < 1e-12


def test_decompose_spec_mode_outside_span(capsys, tmp_path):
    spec = GradingSpec(2, 1, {(0,): [matrix_unit(2, 0, 0)], (1,): [matrix_unit(2, 0, 1)]})
    sp = tmp_path / "s.json"
    fmt.write_spec(spec, sp)
    el = write_matrix(tmp_path / "eye.json", np.eye(2))
    code, out, _ = run(capsys, "decompose", "--spec", str(sp), "--element", el, "--out", str(tmp_path / "o"))
    assert code == 1
    assert json.loads(out)["residual"] == pytest.approx(1.0)
    el2 = write_matrix(tmp_path / "in.json", matrix_unit(2, 0, 0) + 2 * matrix_unit(2, 0, 1))
    code, out, _ = run(capsys, "decompose", "--spec", str(sp), "--element", el2, "--out", str(tmp_path / "o2"))
    assert code == 0 and len(json.loads(out)["components"]) == 2


def test_decompose_dim_mismatch(capsys, tmp_path):
    el = write_matrix(tmp_path / "eye.json", np.eye(3))
    assert run(capsys, "decompose", "--weights", "1,0", "--element", el, "--out", str(tmp_path / "o"))[0] == 2


# ---- fejer ---------------------------------------------------------------

def test_fejer_matrix_degree_zero(capsys, tmp_path):
    el = write_matrix(tmp_path / "d.json", np.diag([1.0, 2.0]))
    csv_path = tmp_path / "t.csv"
    code, _, _ = run(capsys, "fejer", "--mode", "matrix", "--weights", "1,0", "--element", el,
                     "--N", "0,1,4", "--out", str(csv_path))
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "N_1,error"
    assert all(line.endswith(",0.000000000000e+00") for line in lines[1:])


def test_fejer_matrix_rank_two(capsys, tmp_path, rng):
    el = write_matrix(tmp_path / "a.json", mc.random_cmatrix(rng, 3))
    code, out, _ = run(capsys, "fejer", "--mode", "matrix", "--weights", "1,0;0,1;2,2", "--element", el,
                       "--N", "1,2:3")
    assert code == 0
    assert out.splitlines()[0] == "N_1,N_2,error"
    assert out.splitlines()[2].startswith("2,3,")


def test_fejer_circle_decreasing(capsys):
    code, out, _ = run(capsys, "fejer", "--mode", "circle", "--N", "8,32,128")
    assert code == 0
    errs = [float(line.split(",")[1]) for line in out.splitlines()[1:]]
    assert errs[0] > errs[1] > errs[2]


def test_fejer_arc_two_columns(capsys):
    code, out, _ = run(capsys, "fejer", "--mode", "arc", "--N", "16,64,256")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "N_1,error_linear_gap,error_smooth_gap"
    cols = np.array([[float(v) for v in line.split(",")[1:]] for line in lines[1:]])
    assert np.all(np.diff(cols, axis=0) < 0)


def test_fejer_arc_from_samples(capsys, tmp_path):
    from torusgrade.function_models import Arc
    X = Arc(0.0, 0.5, 1025)
    p = tmp_path / "s.csv"
    fmt.write_csv(p, ["t", "re", "im"], fmt.samples_rows(X.params(), np.exp(4j * np.pi * X.params())))
    code, out, _ = run(capsys, "fejer", "--mode", "arc", "--N", "16,64", "--samples", str(p), "--band", "511")
    assert code == 0 and len(out.splitlines()) == 3


def test_fejer_input_errors(capsys, tmp_path):
    assert run(capsys, "fejer", "--mode", "circle", "--N", "-1")[0] == 2
    assert run(capsys, "fejer", "--mode", "matrix", "--N", "1")[0] == 2
    assert run(capsys, "fejer", "--mode", "arc", "--N", "4", "--t0", "0", "--t1", "1")[0] == 2


# ---- demo ----------------------------------------------------------------

def test_demo_circle(capsys, tmp_path):
    code, out, _ = run(capsys, "demo", "circle", "--out", str(tmp_path))
    assert code == 0 and "fhat(0)" in out
    assert (tmp_path / "fourier_coefficients.csv").read_text().startswith("n,re,im\n")
    assert len((tmp_path / "fejer_convergence.csv").read_text().splitlines()) == 4


def test_demo_restricted_arc(capsys, tmp_path):
    assert run(capsys, "demo", "restricted-arc", "--out", str(tmp_path))[0] == 0
    header = (tmp_path / "coefficient_divergence.csv").read_text().splitlines()[0]
    assert header.startswith("n,re_linear_gap")
    assert (tmp_path / "extension_smooth_gap.csv").exists()


def test_demo_unboundedness(capsys, tmp_path):
    code, _, _ = run(capsys, "demo", "unboundedness", "--bands", "4,8", "--iters", "500",
                     "--out", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "zero_component_bounds.csv").read_text().splitlines()[1:]
    bounds = [float(r.split(",")[1]) for r in rows]
    assert bounds[0] > 1 and bounds[1] >= bounds[0]


def test_demo_unwritable_out(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(capsys, "demo", "circle", "--out", str(blocker / "sub"))[0] == 2
