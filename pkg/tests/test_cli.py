import json
import math

import jsonschema
import pytest

from algebroidkit import cli
from algebroidkit.io import schema

from golden_cases import CASES, golden_paths, in_examples, render


@pytest.fixture(autouse=True)
def _numba_backend(monkeypatch):
    # golden floats were produced by the default kernels; summation order differs on the numpy path
    monkeypatch.setenv("ALGEBROIDKIT_BACKEND", "numba")


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name):
    code, text, js = render(name)
    assert code == CASES[name][1]
    txt, jsn = golden_paths(name)
    assert text == txt.read_text()
    if js is None:
        assert text.startswith("error: ")
        assert not jsn.exists()
        return
    assert js == jsn.read_text()
    jsonschema.validate(json.loads(js), schema("report"))


@pytest.mark.parametrize("name", ["mc_check_broken_v", "cohomology_so3_trivial", "holonomy_nonflat_adjoint"])
def test_json_flag_matches_rendered_report(name):
    argv = CASES[name][0].split() + ["--format", "json"]
    with in_examples():
        code, rep, out = cli.run_command(argv)
    assert code == CASES[name][1]
    assert out == golden_paths(name)[1].read_text()


def test_documented_examples():
    code, text, _ = render("validate_so3")
    assert code == 0 and "d_E^2 = 0 on all 3 generators" in text
    code, text, _ = render("mc_check_broken_v")
    assert code == 1 and "[FAILED] ∇_I v = 0" in text and "residual [e1][1,0]: 1" in text
    with in_examples():
        code, rep, text = cli.run_command("holonomy flat_adjoint.scenario.json --lattice 256".split())
    assert code == 0
    order = next(c for c in rep.checks if "second order" in c.name).values["fitted_order"]
    assert abs(order - 2.0) < 0.1


def test_same_seed_same_report():
    argv = "descent scalar_descent.scenario.json --seed 7 --format json".split()
    with in_examples():
        a = cli.run_command(argv)[2]
        b = cli.run_command(argv)[2]
        c = cli.run_command(argv[:-4] + ["--seed", "8", "--format", "json"])[2]
    assert a == b
    assert a != c


def test_numpy_backend_agrees_numerically(monkeypatch):
    monkeypatch.setenv("ALGEBROIDKIT_BACKEND", "numpy")
    code, _, js = render("holonomy_nonflat_adjoint")
    want = json.loads(golden_paths("holonomy_nonflat_adjoint")[1].read_text())
    got = json.loads(js)
    assert code == 0

    def walk(a, b):
        if isinstance(a, float):
            assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-14)
        elif isinstance(a, dict):
            assert a.keys() == b.keys()
            for k in a:
                walk(a[k], b[k])
        elif isinstance(a, list):
            assert len(a) == len(b)
            for x, y in zip(a, b):
                walk(x, y)
        else:
            assert a == b

    walk(want, got)


def test_bad_tolerance_and_lattice_flags():
    with in_examples():
        assert cli.run_command("holonomy flat_adjoint.scenario.json --lattice abc".split())[0] == 2
        assert cli.run_command("descent scalar_descent.scenario.json --tolerance 0".split())[0] == 1
        assert cli.run_command("boundary-changing flat_adjoint.scenario.json".split())[0] == 2


def test_main_streams(capsys):
    with in_examples():
        assert cli.main(["validate", "so3.chart.json"]) == 0
        out = capsys.readouterr()
        assert out.out.startswith("report: validate") and not out.err
        assert cli.main(["validate", "nope.json"]) == 2
        out = capsys.readouterr()
        assert out.err.startswith("error: cannot read") and not out.out
    assert cli.main(["--help"]) == 0
