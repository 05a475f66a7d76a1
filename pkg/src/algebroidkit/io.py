"""Chart, coupling and scenario files (JSON) with schema validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .algebroid import AdaptedSplit, AlgebroidChart
from .connections import EConnection
from .graded import LINE, GradedBundle, GradedMatrix, SuperForm, degree_map, poly_zeros
from .homotopy import Superconnection
from .poly import parse_poly


class InputError(ValueError):
    """Malformed or unsupported input (CLI exit code 2)."""


@lru_cache(maxsize=None)
def schema(kind):
    text = resources.files("algebroidkit").joinpath("schemas", f"{kind}.schema.json").read_text("utf-8")
    return json.loads(text)


def check_schema(doc, kind, where="document"):
    validator = jsonschema.Draft202012Validator(schema(kind))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        loc = "/".join(str(p) for p in e.absolute_path) or "(root)"
        raise InputError(f"{where}: {kind} schema violation at {loc}: {e.message}")


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _poly(text, coords, where):
    try:
        return parse_poly(text, coords)
    except ValueError as exc:
        raise InputError(f"{where}: cannot parse polynomial {text!r}: {exc}") from None


def _matrix(rows, coords, shape, where):
    if len(rows) != shape[0] or any(len(r) != shape[1] for r in rows):
        raise InputError(f"{where}: expected a {shape[0]}x{shape[1]} matrix")
    m = poly_zeros(shape, len(coords))
    for i, row in enumerate(rows):
        for j, s in enumerate(row):
            m[i, j] = _poly(s, coords, f"{where}[{i}][{j}]")
    return m


# -- charts -------------------------------------------------------------------

def chart_from_dict(doc, name=None, where="chart"):
    """Return ``(chart, split)``; ``split`` is ``None`` without ``adapted_split``."""
    check_schema(doc, "chart", where)
    n, r = doc["base_dim"], doc["fiber_rank"]
    coords, frame = doc["coords"], doc["frame"]
    if len(coords) != n or len(frame) != r:
        raise InputError(f"{where}: coords/frame lengths do not match base_dim/fiber_rank")
    if len(doc["anchor"]) != r or any(len(row) != n for row in doc["anchor"]):
        raise InputError(f"{where}: anchor must be {r}x{n}")
    anchor = [[_poly(s, coords, f"{where}: anchor[{I}][{mu}]") for mu, s in enumerate(row)]
              for I, row in enumerate(doc["anchor"])]
    bracket = {}
    for e in doc.get("bracket", []):
        i, j, k = e["i"], e["j"], e["k"]
        if not i < j:
            raise InputError(f"{where}: bracket entries need i < j, got ({i}, {j})")
        if max(i, j, k) >= r:
            raise InputError(f"{where}: bracket index out of range in ({i}, {j}, {k})")
        if (i, j, k) in bracket:
            raise InputError(f"{where}: bracket entry ({i}, {j}, {k}) given twice")
        bracket[(i, j, k)] = _poly(e["value"], coords, f"{where}: bracket ({i}, {j}, {k})")
    chart = AlgebroidChart(coords, frame, anchor, bracket, name=name)
    split = None
    if "adapted_split" in doc:
        s = doc["adapted_split"]
        try:
            split = AdaptedSplit(chart, s["primed_coords"], s["primed_frame"])
        except ValueError as exc:
            raise InputError(f"{where}: {exc}") from None
    return chart, split


def chart_to_dict(chart, split=None):
    out = {
        "base_dim": chart.n,
        "fiber_rank": chart.r,
        "coords": list(chart.coords),
        "frame": list(chart.frame),
        "anchor": [[chart.rho(I, mu).to_string(chart.coords) for mu in range(chart.n)] for I in range(chart.r)],
        "bracket": [{"i": i, "j": j, "k": k, "value": p.to_string(chart.coords)}
                    for (i, j, k), p in sorted(chart.bracket_entries().items())],
    }
    if split is not None:
        out["adapted_split"] = {"primed_coords": list(split.primed_coords),
                                "primed_frame": list(split.primed_frame)}
    return out


def load_chart(path):
    path = Path(path)
    return chart_from_dict(read_json(path), name=path.name.split(".")[0], where=str(path))


# -- couplings ----------------------------------------------------------------

def _blocks(doc, bundle, degree, coords, where):
    out = {}
    for key, rows in doc.items():
        k = int(key)
        if k not in bundle.ranks or k + degree not in bundle.ranks:
            raise InputError(f"{where}: no block from degree {k} to {k + degree} in this bundle")
        out[k] = _matrix(rows, coords, (bundle.ranks[k + degree], bundle.ranks[k]), f"{where}[{key}]")
    return out


def coupling_from_dict(doc, chart, where="coupling"):
    """EConnection when ``v`` and ``omega`` are absent, else Superconnection."""
    check_schema(doc, "coupling", where)
    bundle = GradedBundle({int(k): r for k, r in doc["bundle"].items()})
    if not bundle.total:
        raise InputError(f"{where}: bundle has rank 0")
    n, coords = chart.n, chart.coords
    if len(doc["A"]) != chart.r:
        raise InputError(f"{where}: need {chart.r} connection coefficients, got {len(doc['A'])}")
    A = []
    for I, blk in enumerate(doc["A"]):
        blocks = _blocks(blk, bundle, 0, coords, f"{where}: A[{I}]")
        A.append(GradedMatrix.from_blocks(bundle, bundle, 0, blocks, n).data)
    conn = EConnection(chart, bundle, A)
    if "v" not in doc and "omega" not in doc:
        return conn
    v = None
    if "v" in doc:
        v = GradedMatrix.from_blocks(bundle, bundle, 1, _blocks(doc["v"], bundle, 1, coords, f"{where}: v"), n)
    terms = {}
    for e, om in enumerate(doc.get("omega", [])):
        k, idx, d = om["k"], tuple(om["indices"]), om["source_degree"]
        w = f"{where}: omega[{e}]"
        if len(idx) != k or list(idx) != sorted(set(idx)) or (idx and idx[-1] >= chart.r):
            raise InputError(f"{w}: indices must be {k} increasing frame indices below {chart.r}")
        if d not in bundle.ranks or d + 1 - k not in bundle.ranks:
            raise InputError(f"{w}: no block from degree {d} to {d + 1 - k}")
        blk = _matrix(om["block"], coords, (bundle.ranks[d + 1 - k], bundle.ranks[d]), w)
        mat = terms.setdefault(k, {}).setdefault(idx, poly_zeros((bundle.total,) * 2, n))
        rows = list(bundle.indices(d + 1 - k))
        cols = list(bundle.indices(d))
        for a, i in enumerate(rows):
            for b, j in enumerate(cols):
                if mat[i, j]:
                    raise InputError(f"{w}: block given twice")
                mat[i, j] = blk[a, b]
    higher = {k: SuperForm(chart.r, n, bundle, bundle, t) for k, t in terms.items()}
    try:
        return Superconnection(conn, v, higher)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None


def _blocks_to_dict(m, bundle, degree, coords):
    out = {}
    for k in bundle.ranks:
        if k + degree not in bundle.ranks:
            continue
        rows = list(bundle.indices(k + degree))
        cols = list(bundle.indices(k))
        blk = m[np.ix_(rows, cols)]
        if any(p for p in blk.flat):
            out[str(k)] = [[p.to_string(coords) for p in row] for row in blk]
    return out


def coupling_to_dict(D):
    conn = D if isinstance(D, EConnection) else D.conn
    b, coords = conn.bundle, conn.chart.coords
    out = {"bundle": {str(k): r for k, r in b.ranks.items()},
           "A": [_blocks_to_dict(m, b, 0, coords) for m in conn.A]}
    if isinstance(D, Superconnection):
        if not D.v.is_zero():
            out["v"] = _blocks_to_dict(D.v.data, b, 1, coords)
        om = []
        for k, w in sorted(D.higher.items()):
            for idx, m in sorted(w.terms.items()):
                for d, blk in _blocks_to_dict(m, b, 1 - k, coords).items():
                    om.append({"k": k, "indices": list(idx), "source_degree": int(d), "block": blk})
        if om:
            out["omega"] = om
        if "v" not in out and "omega" not in out:
            out["v"] = {}
    return out


def load_coupling(path, chart):
    path = Path(path)
    return coupling_from_dict(read_json(path), chart, where=str(path))


# -- scenarios ----------------------------------------------------------------

@dataclass
class Observable:
    name: str
    form: SuperForm
    source: int | None = None
    target: int | None = None
    exact: bool = False


@dataclass
class Scenario:
    path: Path
    chart: AlgebroidChart
    split: AdaptedSplit
    couplings: list
    config: object
    lattice: list
    samples: int = 32
    random_observables: int = 0
    observables: dict = field(default_factory=dict)
    insertion: dict | None = None


def _form_components(comps, fchart, source, target, where):
    terms = {}
    for e, c in enumerate(comps):
        idx = tuple(c["indices"])
        w = f"{where}[{e}]"
        if list(idx) != sorted(set(idx)) or (idx and idx[-1] >= fchart.r):
            raise InputError(f"{w}: indices must be increasing F-frame indices below {fchart.r}")
        if idx in terms:
            raise InputError(f"{w}: component {list(idx)} given twice")
        terms[idx] = _matrix(c["matrix"], fchart.coords, (target.total, source.total), w)
    return SuperForm(fchart.r, fchart.n, source, target, terms)


def scenario_from_dict(doc, path):
    """Resolve referenced files and build the field configuration."""
    from .boundary.fields import FieldConfig, FourierSeries, ProfileTerm
    from .boundary.holonomy import BoundaryCoupling
    from .boundary.observables import form_to_functional, functional_to_form, qf_apply, qf_superconnection

    path = Path(path)
    where = str(path)
    check_schema(doc, "scenario", where)
    base = path.parent
    chart, split = load_chart(base / doc["chart"])
    if split is None:
        split = AdaptedSplit(chart, range(chart.n), range(chart.r))
    bad = _split_failure(split)
    if bad:
        raise InputError(f"{where}: adapted split does not define a subalgebroid ({bad})")
    couplings = []
    for ref in doc.get("couplings", []):
        D = load_coupling(base / ref, chart)
        couplings.append(BoundaryCoupling(split, D))
    profiles = {}
    for e, p in enumerate(doc["profiles"]):
        term = ProfileTerm(FourierSeries(p.get("cos", []), p.get("sin", [])), tuple(p["monomial"]))
        profiles.setdefault((p["field"], p["index"]), []).append(term)
    gens = [(g["name"], g["parity"], g["ghost"]) for g in doc["generators"]]
    try:
        cfg = FieldConfig(split, gens, profiles)
    except ValueError as exc:
        raise InputError(f"{where}: {exc}") from None
    fchart = cfg.chart
    observables = {}
    for o in doc.get("observables", []):
        w = f"{where}: observable {o['name']!r}"
        if o["name"] in observables:
            raise InputError(f"{w}: duplicate name")
        s, t = o.get("source"), o.get("target")
        if (s is None) != (t is None):
            raise InputError(f"{w}: give both source and target or neither")
        if s is not None and max(s, t) >= len(couplings):
            raise InputError(f"{w}: coupling index out of range")
        src = couplings[s].bundle if s is not None else LINE
        tgt = couplings[t].bundle if t is not None else LINE
        if "components" in o:
            form = _form_components(o["components"], fchart, src, tgt, f"{w} components")
            exact = False
        else:
            beta = _form_components(o["primitive"], fchart, src, tgt, f"{w} primitive")
            F = form_to_functional(beta)
            if s is None:
                q = qf_apply(fchart, F)
            else:
                q = qf_superconnection(fchart, form_to_functional(couplings[t].alpha),
                                       form_to_functional(couplings[s].alpha), F)
            form = functional_to_form(q, fchart, src, tgt)
            exact = True
        observables[o["name"]] = Observable(o["name"], form, s, t, exact)
    ins = doc.get("insertion")
    if ins is not None:
        for key in ("left", "right"):
            if ins[key] not in observables:
                raise InputError(f"{where}: insertion refers to unknown observable {ins[key]!r}")
    lattice = sorted(doc.get("lattice", [64, 128, 256, 512]))
    return Scenario(path, chart, split, couplings, cfg, lattice, doc.get("samples", 32),
                    doc.get("random_observables", 0), observables, ins)


def _split_failure(split):
    from .algebroid import validate_subalgebroid

    rep = validate_subalgebroid(split)
    bad = rep.first_failure()
    return bad.name if bad else None


def load_scenario(path):
    return scenario_from_dict(read_json(path), path)
