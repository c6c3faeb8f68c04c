"""JSON and CSV forms of node sequences, moments, measures, matrices and trajectories.

Every JSON document carries ``schema_version`` and ``kind``.  Exact values
are written as ``"p/q"`` strings; enclosures as ``{"lo": ..., "hi": ...}``
decimal strings rounded outward, which read back to the same endpoints at
the recorded ``bits``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import warnings
from fractions import Fraction
from typing import Dict, List, Optional

from . import kernels, nodes
from .blaschke import DiscreteMeasure
from .carleson import BoxConstantReport
from .errors import InvalidParameter
from .numerics import ComplexEnclosure, Enclosure, PrecisionContext
from .spectra import Trajectory

SCHEMA_VERSION = 1


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or an integer exactly; decimals become dyadics with a warning."""
    text = str(text).strip()
    try:
        if "." not in text and "e" not in text.lower():
            return Fraction(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError as exc:
        raise InvalidParameter(f"not a rational number: {text!r}") from exc
    q = Fraction(value)
    if q != Fraction(text):
        warnings.warn(f"decimal {text} converted to the dyadic rational {q}", stacklevel=2)
    return q


def _q(x: Fraction) -> str:
    return str(x)


def enclosure_json(e: Enclosure):
    if e.is_exact:
        return _q(e.exact)
    lo, hi = e.to_decimal_strings()
    return {"lo": lo, "hi": hi, "bits": e.bits_used}


def enclosure_from_json(obj, bits: int = 128) -> Enclosure:
    if isinstance(obj, dict):
        return Enclosure.from_decimal_strings(obj["lo"], obj["hi"], int(obj.get("bits", bits)))
    return Enclosure.of(Fraction(obj), bits)


def point_json(p: nodes.NodePoint) -> dict:
    d = {"re": enclosure_json(p.re), "im": enclosure_json(p.im)}
    if p.polar is not None:
        d["polar"] = {"radius": _q(p.polar[0]), "turn": _q(p.polar[1])}
    return d


def point_from_json(obj, bits: int = 128) -> nodes.NodePoint:
    if "polar" in obj:
        return nodes.NodePoint.from_polar(Fraction(obj["polar"]["radius"]), Fraction(obj["polar"]["turn"]), bits)
    return nodes.NodePoint(enclosure_from_json(obj["re"], bits), enclosure_from_json(obj["im"], bits))


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


# node sequences

def nodes_json(seq: nodes.NodeSequence) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "nodes",
            "provenance": seq.provenance.as_dict(), "count": len(seq),
            "points": [point_json(p) for p in seq]}


def nodes_from_json(doc: dict, ctx: Optional[PrecisionContext] = None) -> nodes.NodeSequence:
    _expect(doc, "nodes")
    ctx = ctx or PrecisionContext()
    prov = doc.get("provenance", {"kind": "explicit"})
    count = len(doc["points"])
    # generated families are regenerated so inexact points can be refined
    if prov["kind"] == "radial_power":
        first = int(prov.get("first_index", 2))
        return nodes.gen_radial_power(Fraction(prov["p"]), count, ctx, include_origin=first == 1)
    if prov["kind"] == "geometric":
        return nodes.gen_geometric(Fraction(prov["r"]), count, ctx)
    return nodes.NodeSequence(tuple(point_from_json(p, ctx.bits) for p in doc["points"]))


# moments

def moments_json(m: kernels.MomentSequence) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "moments", "provenance": m.provenance,
            "count": len(m), "values": [enclosure_json(v) for v in m.values]}


def moments_from_json(doc: dict, ctx: Optional[PrecisionContext] = None) -> kernels.MomentSequence:
    _expect(doc, "moments")
    ctx = ctx or PrecisionContext()
    prov = doc.get("provenance", "explicit")
    if prov in ("factorial", "gaussian", "lognormal"):
        return kernels.moment_generator(prov, int(doc["count"]), ctx)
    return kernels.MomentSequence.of([enclosure_from_json(v, ctx.bits) for v in doc["values"]])


# measures

def measure_json(mu: DiscreteMeasure) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "measure",
            "atoms": [{"point": point_json(a.point), "mass": enclosure_json(a.mass)} for a in mu]}


def measure_from_json(doc: dict, bits: int = 128) -> DiscreteMeasure:
    _expect(doc, "measure")
    atoms = []
    for a in doc["atoms"]:
        pt = point_from_json(a["point"], bits) if isinstance(a["point"], dict) else \
            nodes.NodePoint.of(Fraction(a["point"]), 0, bits)
        atoms.append((pt, enclosure_from_json(a["mass"], bits)))
    return DiscreteMeasure.from_pairs(atoms, bits)


# matrices

def matrix_json(M: kernels.HermitianKernelMatrix) -> dict:
    def entry(e):
        if isinstance(e, ComplexEnclosure):
            return {"re": enclosure_json(e.re), "im": enclosure_json(e.im)}
        return enclosure_json(e)

    return {"schema_version": SCHEMA_VERSION, "kind": "matrix", "recipe": M.recipe, "dim": M.dim,
            "complex": M.is_complex, "entries": [[entry(e) for e in r] for r in M.entries]}


def matrix_csv(M: kernels.HermitianKernelMatrix) -> str:
    """Row-major ``i, j, re_lo, re_hi, im_lo, im_hi``."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "j", "re_lo", "re_hi", "im_lo", "im_hi"])
    for i, row in enumerate(M.entries):
        for j, e in enumerate(row):
            re, im = (e.re, e.im) if isinstance(e, ComplexEnclosure) else (e, Enclosure.of(0, e.bits_used))
            w.writerow([i, j, *re.to_decimal_strings(), *im.to_decimal_strings()])
    return buf.getvalue()


# trajectories

def _aux_names(traj: Trajectory) -> List[str]:
    names: List[str] = []
    for r in traj:
        for k in r.aux:
            if k not in names:
                names.append(k)
    return names


def trajectory_csv(traj: Trajectory) -> str:
    """Columns ``n, lambda0_lo, lambda0_hi, bits_used, aux_<name>_lo, aux_<name>_hi, ...``."""
    names = _aux_names(traj)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "lambda0_lo", "lambda0_hi", "bits_used"]
               + [f"aux_{k}_{s}" for k in names for s in ("lo", "hi")])
    for r in traj:
        lam = r.lambda0.value.to_decimal_strings() if r.lambda0 is not None else ("", "")
        row = [r.n, *lam, r.bits_used]
        for k in names:
            row.extend(r.aux[k].to_decimal_strings() if k in r.aux else ("", ""))
        w.writerow(row)
    return buf.getvalue()


def trajectory_json(traj: Trajectory, verdict=None) -> dict:
    recs = []
    for r in traj:
        d: Dict[str, object] = {"n": r.n, "bits_used": r.bits_used}
        if r.lambda0 is not None:
            d["lambda0"] = enclosure_json(r.lambda0.value)
            d["near_zero"] = r.lambda0.near_zero
        d["aux"] = {k: enclosure_json(v) for k, v in r.aux.items()}
        recs.append(d)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "trajectory", "label": traj.label, "records": recs}
    if verdict is not None:
        doc["verdict"] = verdict_json(verdict)
    return doc


def verdict_json(v) -> dict:
    return {"tag": v.tag, "value": enclosure_json(v.floor_or_decay) if v.floor_or_decay is not None else None,
            "rationale": v.rationale, "params": v.params}


def box_report_json(rep: BoxConstantReport, bits: int = 128) -> dict:
    w = rep.witness
    return {"schema_version": SCHEMA_VERSION, "kind": "box_constant",
            "constant": enclosure_json(rep.constant),
            "witness": {"turn": _real_json(w.turn), "eps": _real_json(w.eps),
                        "phi": enclosure_json(w.phi(bits))},
            "atom_count_in_witness": rep.atom_count_in_witness,
            "witness_mass": enclosure_json(rep.witness_mass)}


def _real_json(x):
    return _q(x) if isinstance(x, Fraction) else enclosure_json(x)


def _expect(doc: dict, kind: str):
    if not isinstance(doc, dict) or doc.get("kind") != kind:
        raise InvalidParameter(f"expected a {kind} document")
    if doc.get("schema_version", SCHEMA_VERSION) > SCHEMA_VERSION:
        raise InvalidParameter(f"unsupported schema_version {doc['schema_version']}")


def load(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidParameter(f"cannot read {path}: {exc}") from exc
