"""Command-line entry point: ``algebroidkit <command> ...``.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 when the input is malformed or the request is unsupported.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .io import InputError, load_chart, load_coupling, load_scenario
from .report import Check, Report

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--lattice", type=int, help="largest lattice size (ladder N/8, N/4, N/2, N)")
    common.add_argument("--tolerance", type=float, help="override the command's tolerance")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized observables")
    common.add_argument("--max-degree", type=int, default=2, help="polynomial degree of random data")

    p = _Parser(prog="algebroidkit", description="Lie algebroid representations and boundary BRST checks")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("validate", parents=[common], help="check the algebroid axioms of a chart")
    s.add_argument("chart")
    for name, text in (("curvature", "curvature of the E-connection"),
                       ("mc-check", "flatness tower and Maurer-Cartan equation")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("chart")
        s.add_argument("coupling")
    s = sub.add_parser("cohomology", parents=[common], help="morphism complex cohomology over a point")
    s.add_argument("chart")
    s.add_argument("coupling")
    s.add_argument("--hom", metavar="COUPLING2", help="target of the morphism complex (default: the same coupling)")
    for name, text in (("holonomy", "BRST variation of the holonomy supertrace"),
                       ("descent", "descent equations and covariant BRST identities"),
                       ("boundary-changing", "variation of a boundary-changing insertion")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("scenario")
    return p


# -- commands -----------------------------------------------------------------

def cmd_validate(args):
    from .algebroid import validate_algebroid, validate_subalgebroid

    chart, split = load_chart(args.chart)
    rep = validate_algebroid(chart)
    if split is not None:
        for c in validate_subalgebroid(split).checks:
            rep.add(c)
    return rep


def _as_super(D):
    from .connections import EConnection
    from .homotopy import Superconnection

    return Superconnection(D) if isinstance(D, EConnection) else D


def cmd_curvature(args):
    from .connections import EConnection, is_representation

    chart, _ = load_chart(args.chart)
    D = load_coupling(args.coupling, chart)
    conn = D if isinstance(D, EConnection) else D.conn
    _, rep = is_representation(conn)
    if not isinstance(D, EConnection):
        rep.notes.append("superconnection given: curvature of its E-connection part")
    return rep


def cmd_mc_check(args):
    from .homotopy import flatness_equations, mc_report

    chart, _ = load_chart(args.chart)
    D = _as_super(load_coupling(args.coupling, chart))
    rep = flatness_equations(D)
    tower_ok = rep.passed
    mc = mc_report(D)
    for c in mc.checks:
        rep.add(c)
    rep.add(Check("tower and Maurer-Cartan verdicts agree", tower_ok == mc.passed,
                  "componentwise flatness holds exactly when the master equation does"))
    rep.notes.extend(n for n in mc.notes if n not in rep.notes)
    return rep


def cmd_cohomology(args):
    from .dgcat import MorphismComplex, cohomology_point, euler_characteristic, hom_differential

    chart, _ = load_chart(args.chart)
    if chart.n:
        raise InputError(f"cohomology is only computed over a point; chart has base_dim = {chart.n}")
    D = _as_super(load_coupling(args.coupling, chart))
    D2 = _as_super(load_coupling(args.hom, chart)) if args.hom else D
    pair = MorphismComplex(D, D2)
    rep = Report("cohomology")
    bad = []
    dims = {}
    for m in pair.degree_range():
        basis = pair.basis(m)
        dims[m] = len(basis)
        for I, i, j in basis:
            w = pair.element(I, i, j)
            dd = hom_differential(pair, hom_differential(pair, w, degree=m), degree=m + 1)
            if not dd.is_zero():
                bad.append((f"d^2 e^{list(I)} E_{i}{j}", "nonzero"))
    rep.add(Check("morphism differential squares to zero", not bad,
                  f"checked on {sum(dims.values())} basis elements", bad[:20]))
    betti = cohomology_point(pair)
    chi_b = sum((-1) ** m * b for m, b in betti)
    chi_d = euler_characteristic(pair)
    rep.add(Check("Euler characteristic (Betti vs graded dimensions)", chi_b == chi_d,
                  "sum (-1)^m b_m = sum (-1)^m dim C^m",
                  values={"betti": chi_b, "dimensions": chi_d}))
    vals = {f"b_{m}": b for m, b in betti}
    vals.update({f"dim_{m}": d for m, d in dims.items() if d})
    rep.add(Check("cohomology", not bad, "Betti numbers by total degree", values=vals))
    if bad:
        rep.notes.append("a superconnection is not Maurer-Cartan flat; Betti numbers are not meaningful")
    return rep


def _ladder(args, sc):
    if args.lattice is None:
        return sc.lattice
    N = args.lattice
    if N < 32 or N % 8:
        raise InputError("--lattice must be a multiple of 8 and at least 32")
    return [N // 8, N // 4, N // 2, N]


def cmd_holonomy(args):
    from .boundary.holonomy import holonomy_report

    sc = load_scenario(args.scenario)
    if not sc.couplings:
        raise InputError("holonomy needs a coupling in the scenario")
    bc = sc.couplings[0]
    tol = 5.0 if args.tolerance is None else args.tolerance
    rep, _ = holonomy_report(bc, sc.config, Ns=_ladder(args, sc), tolerance=tol)
    flat = bc.residual.is_zero()
    kind = "ordinary connection" if bc.ordinary else "superconnection"
    rep.notes.append(f"{kind}, {'flat' if flat else 'not flat'} on the F-chart")
    return rep


def _random_observables(sc, args):
    from .graded import LINE
    from .io import Observable
    from .sampling import random_form

    rng = np.random.default_rng(args.seed)
    fchart = sc.config.chart
    out = {}
    for i in range(sc.random_observables):
        k = int(rng.integers(0, fchart.r + 1))
        if sc.couplings:
            b = sc.couplings[0].bundle
            form = random_form(rng, fchart, b, b, k, 0, max_degree=args.max_degree)
            out[f"random{i}"] = Observable(f"random{i}", form, 0, 0)
        else:
            form = random_form(rng, fchart, LINE, LINE, k, 0, max_degree=args.max_degree)
            out[f"random{i}"] = Observable(f"random{i}", form)
    return out


def cmd_descent(args):
    from .boundary.fields import ChartData, delta
    from .boundary.observables import (FormFunctional, descent_residual_covariant,
                                       descent_residual_scalar, form_to_functional,
                                       functional_to_form, graded_commutator, hat_delta,
                                       qf_apply, qf_superconnection)

    sc = load_scenario(args.scenario)
    tol = 1e-10 if args.tolerance is None else args.tolerance
    fchart = sc.config.chart
    cd = ChartData(fchart)
    taus = [j / sc.samples for j in range(sc.samples)]
    points = [sc.config.point(t, jets=3) for t in taus]
    rep = Report("descent")
    obs = dict(sc.observables)
    obs.update(_random_observables(sc, args))
    for name, ob in obs.items():
        if ob.source != ob.target:
            rep.notes.append(f"{name}: Hom-valued between different couplings, used only for insertions")
            continue
        _require_homogeneous(ob)
        f = FormFunctional(ob.form)
        F = form_to_functional(ob.form)
        if ob.source is None:
            qf = FormFunctional(functional_to_form(qf_apply(fchart, F), fchart, ob.form.source, ob.form.target))
            first = [(delta(cd, f.o0, p) - qf.o0(p)).norm() for p in points]
            second = [descent_residual_scalar(cd, fchart, f, qf, p).norm() for p in points]
            rep.add(_max_check(f"{name}: delta O0 = O0[Q_F w]", first, tol, taus))
            rep.add(_max_check(f"{name}: delta O1 + dO0/dtau + O1[Q_F w] = 0", second, tol, taus))
            continue
        bc = sc.couplings[ob.source]
        al = form_to_functional(bc.alpha)
        q = qf_superconnection(fchart, al, al, F)
        qf = FormFunctional(functional_to_form(q, fchart, ob.form.source, ob.form.target))
        hd = hat_delta(cd, bc, f.o0)
        first = [(hd(p) - qf.o0(p)).norm() for p in points]
        second = [descent_residual_covariant(cd, bc, f, qf, p).norm() for p in points]
        hd2 = hat_delta(cd, bc, hd)
        third = [(hd2(p) - graded_commutator(bc.residual_fun.o0(p), f.o0(p))).norm() for p in points]
        label = "Q_{F,nabla}" if bc.ordinary else "Q_{F,D}"
        rep.add(_max_check(f"{name}: hat-delta O0 = O0[{label} w]", first, tol, taus))
        rep.add(_max_check(f"{name}: hat-delta O1 + dO0/dtau + [M, O0] + O1[{label} w] = 0", second, tol, taus))
        rep.add(_max_check(f"{name}: hat-delta^2 O0 = [O0[R], O0]", third, tol, taus))
    if not rep.checks:
        rep.notes.append("no observables in scenario")
    return rep


def _require_homogeneous(ob):
    try:
        ob.form.total_degree()
    except ValueError:
        raise InputError(f"observable {ob.name!r} is not homogeneous in total degree") from None


def _max_check(name, values, tol, taus):
    worst = int(np.argmax(values)) if values else 0
    m = float(max(values, default=0.0))
    return Check(name, m <= tol, f"max residual over {len(values)} samples <= {tol:g}",
                 values={"max_residual": m, "worst_tau": float(taus[worst]) if values else 0.0})


def cmd_boundary_changing(args):
    from .boundary.holonomy import boundary_changing_check
    from .boundary.observables import FormFunctional, form_to_functional, qf_superconnection

    sc = load_scenario(args.scenario)
    if sc.insertion is None:
        raise InputError("scenario has no insertion block")
    if not sc.couplings:
        raise InputError("boundary-changing needs at least one coupling")
    c1 = sc.couplings[0]
    c2 = sc.couplings[1] if len(sc.couplings) > 1 else c1
    i2 = 1 if len(sc.couplings) > 1 else 0
    left = sc.observables[sc.insertion["left"]]
    right = sc.observables[sc.insertion["right"]]
    if (left.source, left.target) != (0, i2) or (right.source, right.target) != (i2, 0):
        raise InputError("left insertion must map coupling 0 to coupling 1 and right the reverse")
    for ob in (left, right):
        _require_homogeneous(ob)
    for c in (c1, c2):
        if not c.residual.is_zero():
            raise InputError("boundary-changing insertions need Maurer-Cartan flat couplings")
    rep = Report("boundary-changing")
    closed = bool(sc.insertion.get("closed", False))
    if closed:
        fchart = sc.config.chart
        bad = []
        for ob, (s, t) in ((left, (c1, c2)), (right, (c2, c1))):
            q = qf_superconnection(fchart, form_to_functional(t.alpha), form_to_functional(s.alpha),
                                   form_to_functional(ob.form))
            if not q.is_zero():
                bad.append((ob.name, "Q_{F,D} w != 0"))
        rep.add(Check("insertions are Q_{F,D}-closed", not bad, "exact check of both forms", bad))
    tol = 5.0 if args.tolerance is None else args.tolerance
    inner, _ = boundary_changing_check(c1, c2, FormFunctional(left.form), FormFunctional(right.form),
                                       sc.config, sc.insertion["t"], Ns=_ladder(args, sc),
                                       tolerance=tol, closed=closed)
    for c in inner.checks:
        rep.add(c)
    return rep


COMMANDS = {
    "validate": cmd_validate,
    "curvature": cmd_curvature,
    "mc-check": cmd_mc_check,
    "cohomology": cmd_cohomology,
    "holonomy": cmd_holonomy,
    "descent": cmd_descent,
    "boundary-changing": cmd_boundary_changing,
}


def run_command(argv):
    """Return ``(exit_code, report_or_None, rendered_text)``."""
    try:
        args = build_parser().parse_args(argv)
        rep = COMMANDS[args.command](args)
    except InputError as exc:
        return EXIT_INPUT, None, f"error: {exc}\n"
    except ValueError as exc:
        # constructor-level validation (bundles, charts, budgets)
        return EXIT_INPUT, None, f"error: {exc}\n"
    text = rep.to_json() if args.format == "json" else rep.to_text()
    return (EXIT_OK if rep.passed else EXIT_FAILED), rep, text


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if any(a in ("-h", "--help") for a in argv):
        try:
            build_parser().parse_args(argv)
        except SystemExit as exc:
            return exc.code
    code, rep, text = run_command(argv)
    (sys.stdout if rep is not None else sys.stderr).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
