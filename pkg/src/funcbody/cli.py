"""Batch command-line front end.

One job per invocation: parse instance files, run an operator or a check,
write deterministic JSON (plus optional OFF meshes and plot CSVs).
Exit codes: 0 success / all checks passed, 1 check failed, 2 parse failure,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import lab, serialize
from .bodies import (
    FunctionVanishesError,
    QuadratureToleranceError,
    difference_level_set_body,
    direction_set,
    functional_projection_body,
    level_set_body,
    lyz_measure,
    radial_identity_check,
)
from .convexfn import pointwise_min_certified
from .geometry import (
    GeometryError,
    SupportBody,
    difference_body,
    moment_body,
    moment_vector,
    projection_body,
    random_special_linear,
    support,
    surface_area_measure,
    volume,
)
from .serialize import ParseError

log = logging.getLogger("funcbody")

CLASSICAL_OPS = ("projection-body", "difference-body", "moment-body",
                 "moment-vector", "sam", "volume")
CHECK_KINDS = ("valuation", "equivariance", "growth", "indicator", "radial")
FUNCTIONAL_OPS = {"projection-body": functional_projection_body,
                  "level-set-body": level_set_body,
                  "difference-body": difference_level_set_body}


@dataclass
class Job:
    command: str
    inputs: dict
    config: object
    output: str | None = None
    emit_mesh: str | None = None
    emit_plot: str | None = None
    extra: dict = field(default_factory=dict)


def _write_result(job, payload):
    text = serialize.dumps_canonical(payload) + "\n"
    if job.output:
        with open(job.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_classical(job):
    P = serialize.load_polytope(job.inputs["in"])
    op = job.extra["op"]
    body_out = None
    if op == "projection-body":
        body_out = projection_body(P)
        payload = serialize.polytope_dict(body_out)
    elif op == "difference-body":
        body_out = difference_body(P)
        payload = serialize.polytope_dict(body_out)
    elif op == "sam":
        payload = serialize.measure_dict(surface_area_measure(P))
    elif op == "moment-vector":
        payload = serialize.vector_dict(moment_vector(P))
    elif op == "volume":
        payload = serialize.scalar_dict(volume(P))
    else:  # moment body, sampled on the configured direction set
        payload = serialize.support_dict(
            moment_body(P, direction_set(P.dim, job.config)))
    _write_result(job, payload)
    if job.emit_mesh and body_out is not None:
        serialize.write_off(job.emit_mesh, body_out)
    if job.emit_plot and body_out is not None:
        dirs = direction_set(P.dim, job.config)
        vals = tuple(support(body_out, np.asarray(z)) for z in dirs)
        serialize.write_plot_csv(job.emit_plot,
                                 SupportBody(dirs, vals, provenance=op))
    return 0


def _run_functional(job):
    zeta = serialize.load_weight(job.inputs["zeta"])
    u = serialize.load_function(job.inputs["fn"])
    if job.command == "lyz-measure":
        Y = lyz_measure(zeta, u, job.config)
        _write_result(job, serialize.measure_dict(Y))
        return 0
    body = FUNCTIONAL_OPS[job.command](zeta, u, job.config)
    _write_result(job, serialize.support_dict(body))
    if job.emit_plot:
        serialize.write_plot_csv(job.emit_plot, body)
    return 0


def _run_check(job):
    kind = job.extra["kind"]
    cfg = job.config
    tol = job.extra.get("tol")
    zeta = serialize.load_weight(job.inputs["zeta"])
    op_name = job.extra.get("op") or "projection-body"
    makers = {"projection-body": lab.projection_body_operator,
              "level-set-body": lab.level_set_body_operator,
              "difference-body": lab.difference_body_operator,
              "lyz-measure": lab.lyz_measure_operator}
    Z = makers[op_name](zeta, cfg)
    if kind == "valuation":
        fns = job.inputs["fn"]
        if len(fns) != 2:
            raise ParseError("valuation check needs two --fn inputs")
        u = serialize.load_function(fns[0])
        v = serialize.load_function(fns[1])
        pair = pointwise_min_certified(u, v)
        report = lab.check_valuation(Z, pair, tol=tol or 4e-7)
    elif kind == "equivariance":
        u = serialize.load_function(job.inputs["fn"][0])
        rng = np.random.default_rng(cfg.seed)
        maps = [random_special_linear(u.dim, rng) for _ in range(10)]
        report = lab.check_equivariance(Z, u, maps, tol=tol or 2e-7)
    elif kind == "growth":
        K = serialize.load_polytope(job.inputs["poly"])
        step = 1.0 / 64.0
        margin = 1.0 / 16.0
        grid = np.arange(zeta.breakpoints[0] + margin,
                         zeta.support_end - margin + step / 2, step)
        profile = lab.extract_cone_growth(Z, K, grid)
        report = lab.check_growth_derivative_law(
            profile, zeta, K.dim, variance=Z.variance, tol=tol)
    elif kind == "indicator":
        K = serialize.load_polytope(job.inputs["poly"])
        t_grid = (0.0, 0.25, 0.5, 0.9)
        report = lab.check_indicator_law(Z, K, t_grid, tol=tol or 1e-7)
    else:  # radial
        K = serialize.load_polytope(job.inputs["poly"])
        lhs, rhs = radial_identity_check(zeta, K, cfg)
        bound = tol or 1e-6
        report = {"check": "radial-identity",
                  "max_residual": abs(lhs - rhs),
                  "tolerance": bound,
                  "pass": bool(abs(lhs - rhs) <= bound),
                  "witness": {"lhs": lhs, "rhs": rhs},
                  "residuals": [abs(lhs - rhs)]}
    _write_result(job, report)
    return 0 if report["pass"] else 1


def run(job: Job) -> int:
    handlers = {"classical": _run_classical, "check": _run_check}
    handler = handlers.get(job.command, _run_functional)
    try:
        return handler(job)
    except (ParseError, FileNotFoundError, KeyError) as exc:
        log.error("parse failure: %s", exc)
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (QuadratureToleranceError, FunctionVanishesError, GeometryError,
            ValueError) as exc:
        log.error("numeric failure: %s", exc)
        sys.stderr.write(f"error: {exc}\n")
        return 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="funcbody",
        description="Operators and checks on weighted convex functions")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--nodes", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", default=None,
                       help="JSON file with QuadratureConfig overrides")
        p.add_argument("--out", default=None)
        p.add_argument("--emit-mesh", default=None)
        p.add_argument("--emit-plot", default=None)

    p = sub.add_parser("classical", help="operators on a single polytope")
    p.add_argument("--op", choices=CLASSICAL_OPS, required=True)
    p.add_argument("--in", dest="infile", required=True)
    add_common(p)

    for name in ("lyz-measure", "projection-body", "level-set-body",
                 "difference-body"):
        p = sub.add_parser(name)
        p.add_argument("--zeta", required=True)
        p.add_argument("--fn", required=True)
        add_common(p)

    p = sub.add_parser("check", help="verify a structural law")
    p.add_argument("--kind", choices=CHECK_KINDS, required=True)
    p.add_argument("--zeta", required=True)
    p.add_argument("--fn", action="append", default=[])
    p.add_argument("--poly", default=None)
    p.add_argument("--op", choices=tuple(FUNCTIONAL_OPS) + ("lyz-measure",),
                   default=None)
    add_common(p)
    return parser


def _configure_logging():
    level = os.environ.get("FUNCBODY_LOG", "quiet").lower()
    levels = {"quiet": logging.WARNING, "info": logging.INFO,
              "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING),
                        format="%(name)s: %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    args = _build_parser().parse_args(argv)
    try:
        cfg = serialize.load_config(
            args.config,
            tol=getattr(args, "tol", None) if args.command != "check" else None,
            nodes=getattr(args, "nodes", None),
            seed=getattr(args, "seed", None))
    except ParseError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    inputs = {}
    if args.command == "classical":
        inputs["in"] = args.infile
    elif args.command == "check":
        inputs["zeta"] = args.zeta
        inputs["fn"] = args.fn
        inputs["poly"] = args.poly
    else:
        inputs["zeta"] = args.zeta
        inputs["fn"] = args.fn
    job = Job(command=args.command, inputs=inputs, config=cfg,
              output=args.out, emit_mesh=args.emit_mesh,
              emit_plot=args.emit_plot,
              extra={"op": getattr(args, "op", None),
                     "kind": getattr(args, "kind", None),
                     "tol": getattr(args, "tol", None)})
    return run(job)


if __name__ == "__main__":
    sys.exit(main())
