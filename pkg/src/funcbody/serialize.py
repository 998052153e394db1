"""JSON, OFF and CSV interchange with deterministic formatting.

Floats are always written with 17 significant digits and dictionary keys in
a fixed order, so identical inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .bodies import LyzMeasure, QuadratureConfig
from .convexfn import PiecewiseAffineConvexFunction, cone_function, indicator
from .geometry import (
    DiscreteSphericalMeasure,
    Polytope,
    SupportBody,
    convex_hull,
    facets,
    orthonormal_complement,
)
from .weights import WeightFunction


class ParseError(ValueError):
    pass


def _fmt(x):
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError("non-finite value in output")
        return format(x, ".17g")
    return str(x)


def dumps_canonical(obj, indent=0):
    """Minimal JSON emitter with fixed float formatting and sorted keys."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = [f'{pad}  {json.dumps(str(k))}: '
                 f'{dumps_canonical(v, indent + 2).lstrip()}'
                 for k, v in sorted(obj.items())]
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        flat = all(isinstance(v, (int, float, bool)) or v is None for v in obj)
        if flat:
            return pad + "[" + ", ".join(_json_scalar(v) for v in obj) + "]"
        items = [dumps_canonical(v, indent + 2) for v in obj]
        return pad + "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return pad + _json_scalar(obj)


def _json_scalar(v):
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt(float(v))
    return json.dumps(v)


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps_canonical(obj) + "\n")


# ---------------------------------------------------------------------------
# loading


def _load(path_or_dict):
    if isinstance(path_or_dict, dict):
        return path_or_dict
    try:
        with open(path_or_dict) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path_or_dict}: {exc}") from exc


def load_polytope(src) -> Polytope:
    data = _load(src)
    if "vertices" not in data:
        raise ParseError("polytope JSON needs a 'vertices' list")
    try:
        return convex_hull(data["vertices"])
    except (ValueError, TypeError) as exc:
        raise ParseError(f"bad polytope: {exc}") from exc


def load_measure(src) -> DiscreteSphericalMeasure:
    data = _load(src)
    if "atoms" not in data:
        raise ParseError("measure JSON needs an 'atoms' list")
    try:
        return DiscreteSphericalMeasure.from_atoms(
            [(a["dir"], a["w"]) for a in data["atoms"]])
    except (ValueError, TypeError, KeyError) as exc:
        raise ParseError(f"bad measure: {exc}") from exc


def load_weight(src) -> WeightFunction:
    data = _load(src)
    try:
        return WeightFunction(tuple(data["breakpoints"]), tuple(data["values"]))
    except (ValueError, TypeError, KeyError) as exc:
        raise ParseError(f"bad weight: {exc}") from exc


def load_function(src) -> PiecewiseAffineConvexFunction:
    """Piece/domain JSON, or the named constructors 'cone' / 'indicator'
    with a polytope payload."""
    data = _load(src)
    try:
        if "cone" in data:
            return cone_function(load_polytope(data["cone"]))
        if "indicator" in data:
            payload = dict(data["indicator"])
            t = payload.pop("t", 0.0)
            return indicator(load_polytope(payload), t)
        pieces = tuple((tuple(p["a"]), p["b"]) for p in data.get("pieces", []))
        domain = tuple((tuple(h["c"]), h["d"]) for h in data.get("domain", []))
        return PiecewiseAffineConvexFunction(pieces, domain)
    except (ValueError, TypeError, KeyError) as exc:
        raise ParseError(f"bad function: {exc}") from exc


def load_config(src, **overrides) -> QuadratureConfig:
    data = _load(src) if src else {}
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return QuadratureConfig(**data)
    except TypeError as exc:
        raise ParseError(f"bad config: {exc}") from exc


# ---------------------------------------------------------------------------
# dumping


def polytope_dict(P: Polytope):
    return {"vertices": [list(v) for v in P.vertices]}


def measure_dict(Y, error_estimate=None):
    if isinstance(Y, LyzMeasure):
        return {"atoms": [{"dir": list(d), "w": w} for d, w in Y.measure.atoms],
                "error_estimate": Y.error_estimate}
    out = {"atoms": [{"dir": list(d), "w": w} for d, w in Y.atoms]}
    if error_estimate is not None:
        out["error_estimate"] = error_estimate
    return out


def support_dict(body: SupportBody, error_estimate=0.0):
    return {"support": {"directions": [list(d) for d in body.directions],
                        "values": list(body.values)},
            "error_estimate": error_estimate}


def vector_dict(x):
    return {"vector": [float(v) for v in x]}


def scalar_dict(v):
    return {"value": float(v)}


# ---------------------------------------------------------------------------
# mesh and plot exports


def _facet_cycle(P, facet):
    """Vertex ids of a 3D facet ordered counterclockwise around its
    centroid, seen from outside."""
    ids = list(facet.vertex_ids)
    pts = P.vertex_array[ids]
    center = pts.mean(axis=0)
    basis = orthonormal_complement(np.asarray(facet.normal))
    angles = np.arctan2((pts - center) @ basis[1], (pts - center) @ basis[0])
    order = np.argsort(angles)
    cycle = [ids[i] for i in order]
    # flip if the cycle is clockwise w.r.t. the outward normal
    a, b, c = (P.vertex_array[cycle[i]] for i in range(3))
    if np.dot(np.cross(b - a, c - a), np.asarray(facet.normal)) < 0:
        cycle.reverse()
    return cycle


def write_off(path, P: Polytope):
    """OFF mesh of a full-dimensional 3D polytope."""
    if P.dim != 3 or P.affine_dim != 3:
        raise ValueError("OFF export needs a full-dimensional 3D polytope")
    fs = facets(P)
    lines = ["OFF", f"{len(P)} {len(fs)} 0"]
    for v in P.vertices:
        lines.append(" ".join(_fmt(float(c)) for c in v))
    for f in fs:
        cycle = _facet_cycle(P, f)
        lines.append(" ".join([str(len(cycle))] + [str(i) for i in cycle]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def direction_angles(z):
    """Hyperspherical angles of a unit direction (n-1 values)."""
    z = np.asarray(z, dtype=float)
    n = len(z)
    if n == 2:
        return [math.atan2(z[1], z[0])]
    angles = []
    for i in range(n - 2):
        tail = math.sqrt(float(np.sum(z[i:] ** 2)))
        angles.append(math.acos(min(1.0, max(-1.0, z[i] / tail))) if tail > 0
                      else 0.0)
    angles.append(math.atan2(z[-1], z[-2]))
    return angles


def write_plot_csv(path, body: SupportBody):
    """CSV of (direction angles, support value) rows for plotting."""
    n = body.dim
    header = [f"angle{i + 1}" for i in range(n - 1)] + ["support"]
    lines = [",".join(header)]
    for d, v in zip(body.directions, body.values):
        row = [_fmt(a) for a in direction_angles(d)] + [_fmt(float(v))]
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
