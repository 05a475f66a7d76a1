"""Write the shipped example catalog (charts, couplings, scenarios) as JSON.

Run from the repository root: ``python3 scripts/make_examples.py``.
"""

import json
from fractions import Fraction
from pathlib import Path

from algebroidkit import catalog
from algebroidkit.graded import SuperForm, poly_zeros
from algebroidkit.homotopy import assemble_alpha, disassemble_alpha
from algebroidkit.io import chart_to_dict, coupling_to_dict
from algebroidkit.poly import Poly

OUT = Path(__file__).resolve().parent.parent / "src" / "algebroidkit" / "examples"


def dump(name, doc):
    (OUT / name).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def prof(field, index, monomial, cos=(), sin=()):
    return {"field": field, "index": index, "cos": list(cos), "sin": list(sin), "monomial": list(monomial)}


SO3_FIELDS = [
    prof("xi", 0, ["c1"], [0.3, 0.5], [0, 0.7]),
    prof("xi", 0, ["c3"], [0.2], [0, 0.1]),
    prof("xi", 1, ["c2"], [0.2], [0, 0.4, 0.3]),
    prof("xi", 1, ["c1", "c2", "b1"], [0.1, 0.2]),
    prof("xi", 2, ["c1"], [0, 0.6], [0, 0.2]),
    prof("xi", 2, ["c2"], [0.1, 0.3]),
    prof("psi", 0, [], [0.4, 0.3], [0, 0.5]),
    prof("psi", 0, ["c3", "b1"], [0.3], [0, 0.2]),
    prof("psi", 1, [], [-0.2, 0.6], [0, 0, 0.3]),
    prof("psi", 2, [], [0.1, 0, 0.4], [0, 0.2]),
    prof("psi", 2, ["c1", "b1"], [0, 0.2]),
]
SO3_GENS = [{"name": "c1", "parity": 1, "ghost": 1}, {"name": "c2", "parity": 1, "ghost": 1},
            {"name": "c3", "parity": 1, "ghost": 1}, {"name": "b1", "parity": 1, "ghost": -1}]

PLANE_FIELDS = [
    prof("phi", 0, [], [0.2, 0.3], [0, 0.4]),
    prof("phi", 0, ["c1", "b1"], [0.1], [0, 0.2]),
    prof("phi", 1, [], [-0.1, 0.2], [0, 0.1, 0.3]),
    prof("phi", 1, ["c2", "b2"], [0, 0.3]),
    prof("eta", 0, ["b1"], [0.3], [0, 0.2]),
    prof("eta", 1, ["b2"], [0, 0.4], [0, 0.1]),
    prof("eta", 1, ["b1"], [0.2]),
    prof("xi", 0, ["c1"], [0.3, 0.2], [0, 0.5]),
    prof("xi", 1, ["c2"], [0.1], [0, 0.3, 0.2]),
    prof("xi", 1, ["c1"], [0.2]),
    prof("psi", 0, [], [0.3, 0.2], [0, 0.4]),
    prof("psi", 0, ["c2", "b1"], [0.2]),
    prof("psi", 1, [], [-0.2, 0.1], [0, 0.3]),
]
PLANE_GENS = [{"name": "c1", "parity": 1, "ghost": 1}, {"name": "c2", "parity": 1, "ghost": 1},
              {"name": "b1", "parity": 1, "ghost": -1}, {"name": "b2", "parity": 1, "ghost": -1}]

LATTICE = [16, 32, 64, 128]


def mat(rows):
    return [[str(x) for x in row] for row in rows]


def super_plane_perturbed():
    D = catalog.super_plane()
    ch, b = D.chart, D.bundle
    m = poly_zeros((4, 4), 2)
    m[2, 0] = Poly.var(0, 2) * Fraction(1, 2)
    return disassemble_alpha(ch, b, assemble_alpha(D) + SuperForm(ch.r, ch.n, b, b, {(): m}))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    charts = catalog.charts()
    splits = catalog.adapted_splits()
    for name in ("plane", "line", "abelian3", "so3", "solvable", "so3_action", "line_x_solvable",
                 "plane_x_abelian", "twisted_line"):
        split = splits.get(name)
        dump(f"{name}.chart.json", chart_to_dict(charts[name], split if name in
                                                 ("so3_action", "line_x_solvable") else None))
    dump("abelian1.chart.json", chart_to_dict(catalog.abelian(1)))
    broken = chart_to_dict(charts["so3"])
    # [e1, e2] = e3 + e1 violates the Jacobi identity (a rescaling would not)
    broken["bracket"].append({"i": 0, "j": 1, "k": 0, "value": "1"})
    dump("so3_broken_jacobi.chart.json", broken)
    bad = chart_to_dict(charts["so3"])
    bad["structure"] = "unknown key"
    dump("malformed_unknown_key.chart.json", bad)

    dump("so3_trivial.coupling.json", coupling_to_dict(catalog.trivial_line(charts["so3"]).conn))
    dump("so3_adjoint.coupling.json", coupling_to_dict(catalog.so3_adjoint()))
    dump("so3_adjoint_twisted.coupling.json", coupling_to_dict(catalog.so3_adjoint(scale3=2)))
    dump("so3_two_term.coupling.json", coupling_to_dict(catalog.so3_two_term()))
    dump("so3_adjoint_line.coupling.json", coupling_to_dict(catalog.so3_adjoint_line()))
    dump("brokenv.coupling.json", coupling_to_dict(catalog.broken_v()))
    dump("line_to_line.coupling.json", coupling_to_dict(catalog.line_to_line()))
    dump("super_plane.coupling.json", coupling_to_dict(catalog.super_plane()))
    dump("super_plane_perturbed.coupling.json", coupling_to_dict(super_plane_perturbed()))
    dump("plane_trivial.coupling.json", coupling_to_dict(catalog.trivial_line(charts["plane"]).conn))

    so3 = {"chart": "so3.chart.json", "generators": SO3_GENS, "profiles": SO3_FIELDS, "lattice": LATTICE}
    plane = {"chart": "plane.chart.json", "generators": PLANE_GENS, "profiles": PLANE_FIELDS,
             "lattice": LATTICE}
    dump("flat_adjoint.scenario.json", dict(so3, couplings=["so3_adjoint.coupling.json"]))
    dump("nonflat_adjoint.scenario.json", dict(so3, couplings=["so3_adjoint_twisted.coupling.json"]))
    dump("adjoint_line.scenario.json", dict(so3, couplings=["so3_adjoint_line.coupling.json"]))
    dump("super_plane.scenario.json", dict(plane, couplings=["super_plane.coupling.json"]))
    dump("super_plane_perturbed.scenario.json", dict(plane, couplings=["super_plane_perturbed.coupling.json"]))

    dump("scalar_descent.scenario.json", dict(plane, samples=32, random_observables=4, observables=[
        {"name": "f", "components": [{"indices": [], "matrix": [["x1^2*x2 - 3*x2"]]}]},
        {"name": "w1", "components": [{"indices": [0], "matrix": [["x2"]]},
                                      {"indices": [1], "matrix": [["x1*x2 + 1"]]}]},
        {"name": "w2", "components": [{"indices": [0, 1], "matrix": [["x1 - 2*x2^2"]]}]},
    ]))
    ad3 = [["1", "0", "2"], ["0", "-1", "0"], ["1", "1", "0"]]
    dump("covariant_descent.scenario.json", dict(so3, couplings=["so3_adjoint_twisted.coupling.json"],
                                                 samples=32, observables=[
        {"name": "g0", "source": 0, "target": 0, "components": [{"indices": [], "matrix": ad3}]},
        {"name": "g1", "source": 0, "target": 0, "components": [{"indices": [1], "matrix": ad3}]},
    ]))
    dump("super_descent.scenario.json", dict(plane, couplings=["super_plane.coupling.json"], samples=32,
                                             random_observables=3, observables=[
        {"name": "h0", "source": 0, "target": 0, "components": [
            {"indices": [], "matrix": mat([["x1", "1", "0", "0"], ["0", "x2", "0", "0"],
                                           ["0", "0", "1", "0"], ["0", "0", "x1*x2", "0"]])}]},
    ]))
    b0 = [["1", "2", "0"], ["0", "1", "-1"], ["3", "0", "1"]]
    b1 = [["0", "1", "1"], ["2", "0", "0"], ["1", "-1", "1"]]
    dump("insertion_closed.scenario.json", dict(so3, couplings=["so3_adjoint.coupling.json"], observables=[
        {"name": "left", "source": 0, "target": 0, "primitive": [{"indices": [], "matrix": b0}]},
        {"name": "right", "source": 0, "target": 0, "primitive": [{"indices": [], "matrix": b1}]},
    ], insertion={"t": 0.7, "left": "left", "right": "right", "closed": True}))
    dump("insertion_two.scenario.json", dict(so3, couplings=["so3_adjoint_line.coupling.json",
                                                             "so3_adjoint.coupling.json"], observables=[
        {"name": "left", "source": 0, "target": 1, "components": [
            {"indices": [1], "matrix": [["1", "0", "2", "0"], ["0", "1", "0", "0"], ["1", "0", "0", "0"]]}]},
        {"name": "right", "source": 1, "target": 0, "components": [
            {"indices": [], "matrix": [["0", "1", "0"], ["2", "0", "1"], ["0", "0", "1"], ["0", "0", "0"]]}]},
    ], insertion={"t": 0.7, "left": "left", "right": "right"}))


if __name__ == "__main__":
    main()
