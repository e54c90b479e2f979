import io
import json

import pytest

from quasicluster.cli import main


def run(*argv):
    buf = io.StringIO()
    try:
        code = main(list(argv), stream=buf)
    except SystemExit as exc:
        code = exc.code
    return code, buf.getvalue()


def test_header_is_first_line():
    code, out = run("classify", "--surface", "moebius:2", "--seed", "5")
    assert code == 0
    assert out.splitlines()[0] == "# quasicluster 0.1.0 surface=moebius:2 rng_seed=5"


def test_explore_examples():
    code, out = run("explore", "--surface", "moebius:2")
    assert code == 0 and "vertices: 6, variables: 6, regular: yes(2)" in out
    code, out = run("explore", "--surface", "moebius:3", "--arcs-only")
    assert code == 0 and "vertices: 16" in out
    code, out = run("explore", "--surface", "disc:6")
    assert code == 0 and "vertices: 14" in out


def test_explore_budget_exit_code():
    code, out = run("explore", "--surface", "annulus:1,1", "--max-seeds", "50")
    assert code == 1
    assert "partial" in out


def test_explore_exports(tmp_path):
    path = tmp_path / "g.json"
    code, _ = run("explore", "--surface", "moebius:2", "--export", str(path), "--with-seeds")
    assert code == 0
    doc = json.loads(path.read_text())
    assert len(doc["vertices"]) == 6 and "seed" in doc["vertices"][0]
    code, out = run("explore", "--surface", "moebius:2", "--format", "dot")
    assert code == 0 and out.count(" -- ") == 6


def test_classify_example():
    code, out = run("classify", "--surface", "moebius:4")
    assert code == 0 and "finite type; quasi-arcs: 23; arcs: 22" in out


def test_flip_chain():
    code, out = run("flip", "--surface", "moebius:2", "--seq", "c_a,d,c_b")
    assert code == 0
    assert "c_b = 1*c_a^-1*d^2*y*z + 1*c_a^-1*y^2 + 2*c_a^-1*y*z + 1*c_a^-1*z^2" in out
    assert "c = 1*d^-1*y + 1*d^-1*z" in out


def test_flip_unknown_label_is_usage_error():
    code, _ = run("flip", "--surface", "moebius:2", "--seq", "nope")
    assert code == 64


def test_variables_json():
    code, out = run("variables", "--surface", "moebius:2", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["surface"] == "moebius:2" and doc["rng_seed"] == 0
    assert doc["variables"]["a"] == "1*c_a*d^-1"
    assert len(doc["variables"]) == 6


def test_cover_commands():
    code, out = run("cover", "--surface", "moebius:2")
    assert code == 0 and "cover valid: yes" in out
    code, out = run("cover", "--surface", "disc:5")
    assert code == 0 and "orientable" in out


def test_frieze_command():
    code, out = run("frieze", "--window", "0,2,0,2")
    assert code == 0 and "unit determinants: 4/4" in out
    code, out = run("frieze", "--window", "0,1,0,1", "--format", "csv")
    assert code == 0 and "i,j,value" in out
    code, out = run("frieze", "--epsilon", "-1", "--mode", "symbolic", "--k-max", "4", "--window", "0,2,0,2")
    assert code == 0 and "X_4: match" in out


def test_verify_command():
    code, out = run("verify", "--samples", "200", "--seed", "42")
    assert code == 0
    assert "FAIL" not in out


def test_basis_command():
    code, out = run("basis", "--surface", "moebius:2", "--max-degree", "2")
    assert code == 0


@pytest.mark.parametrize(
    "argv",
    [
        ("explore", "--surface", "sphere:3"),
        ("explore",),
        ("nonsense",),
        ("explore", "--surface", "moebius:2", "--threads", "0"),
        ("explore", "--surface", "disc:2"),
    ],
)
def test_usage_errors(argv):
    code, _ = run(*argv)
    assert code == 64


def test_surface_json(tmp_path):
    path = tmp_path / "s.json"
    path.write_text('{"orientable": false, "genus": 1, "boundary": [3]}')
    code, out = run("classify", "--surface-json", str(path))
    assert code == 0 and "quasi-arcs: 13" in out


def test_output_is_deterministic_across_threads():
    a = run("explore", "--surface", "moebius:4", "--format", "json", "--threads", "1")
    b = run("explore", "--surface", "moebius:4", "--format", "json", "--threads", "4")
    assert a == b
