"""CLI invocations pinned by golden files, run with the examples directory as cwd."""

import os
from contextlib import contextmanager
from importlib.resources import files
from pathlib import Path

GOLDEN = Path(__file__).parent / "golden"
EXAMPLES = files("algebroidkit") / "examples"

CASES = {
    "validate_so3": ("validate so3.chart.json", 0),
    "validate_plane": ("validate plane.chart.json", 0),
    "validate_abelian3": ("validate abelian3.chart.json", 0),
    "validate_solvable": ("validate solvable.chart.json", 0),
    "validate_so3_action": ("validate so3_action.chart.json", 0),
    "validate_line_x_solvable": ("validate line_x_solvable.chart.json", 0),
    "validate_plane_x_abelian": ("validate plane_x_abelian.chart.json", 0),
    "validate_twisted_line": ("validate twisted_line.chart.json", 0),
    "validate_broken_jacobi": ("validate so3_broken_jacobi.chart.json", 1),
    "validate_malformed": ("validate malformed_unknown_key.chart.json", 2),
    "curvature_so3_adjoint": ("curvature so3.chart.json so3_adjoint.coupling.json", 0),
    "curvature_so3_twisted": ("curvature so3.chart.json so3_adjoint_twisted.coupling.json", 1),
    "curvature_plane_trivial": ("curvature plane.chart.json plane_trivial.coupling.json", 0),
    "mc_check_broken_v": ("mc-check line.chart.json brokenv.coupling.json", 1),
    "mc_check_two_term": ("mc-check so3.chart.json so3_two_term.coupling.json", 0),
    "mc_check_adjoint_line": ("mc-check so3.chart.json so3_adjoint_line.coupling.json", 0),
    "mc_check_super_plane": ("mc-check plane.chart.json super_plane.coupling.json", 0),
    "mc_check_super_plane_perturbed": ("mc-check plane.chart.json super_plane_perturbed.coupling.json", 1),
    "cohomology_so3_trivial": ("cohomology so3.chart.json so3_trivial.coupling.json", 0),
    "cohomology_so3_hom_adjoint": ("cohomology so3.chart.json so3_trivial.coupling.json --hom so3_adjoint.coupling.json", 0),
    "cohomology_line_to_line": ("cohomology abelian1.chart.json line_to_line.coupling.json", 0),
    "cohomology_over_plane": ("cohomology plane.chart.json plane_trivial.coupling.json", 2),
    "holonomy_flat_adjoint": ("holonomy flat_adjoint.scenario.json", 0),
    "holonomy_adjoint_line": ("holonomy adjoint_line.scenario.json --lattice 32", 0),
    "holonomy_nonflat_adjoint": ("holonomy nonflat_adjoint.scenario.json --lattice 32", 0),
    "holonomy_super_plane_perturbed": ("holonomy super_plane_perturbed.scenario.json --lattice 32", 0),
    "holonomy_bad_lattice": ("holonomy flat_adjoint.scenario.json --lattice 20", 2),
    "descent_scalar": ("descent scalar_descent.scenario.json", 0),
    "descent_covariant": ("descent covariant_descent.scenario.json", 0),
    "descent_super": ("descent super_descent.scenario.json", 0),
    "boundary_changing_closed": ("boundary-changing insertion_closed.scenario.json --lattice 32", 0),
    "boundary_changing_two": ("boundary-changing insertion_two.scenario.json --lattice 32", 0),
    "no_such_file": ("validate missing.chart.json", 2),
    "unknown_command": ("frobnicate so3.chart.json", 2),
}


@contextmanager
def in_examples():
    old = os.getcwd()
    os.chdir(EXAMPLES)
    try:
        yield
    finally:
        os.chdir(old)


def render(name):
    """``(code, text, json_or_None)`` for one case; JSON is rendered from the same report."""
    from algebroidkit.cli import run_command

    with in_examples():
        code, rep, text = run_command(CASES[name][0].split())
    return code, text, rep.to_json() if rep is not None else None


def golden_paths(name):
    return GOLDEN / f"{name}.txt", GOLDEN / f"{name}.json"
