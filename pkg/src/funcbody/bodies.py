"""Integral operators on weighted convex functions.

Every operator here is an integral over the superlevel sets of a weighted
function: the aggregated spherical surface measure, the projection body it
induces through the cosine transform, the level set body and its difference
body, the weighted volume, and the radial boundary identity.

All superlevel integrals are pulled back to the sublevel parameter of the
underlying convex function, where the weight contributes a piecewise
constant density.  Within a cell cut at weight breakpoints and at the
combinatorial event levels of the sublevel sets, the integrands are low
degree polynomials, so fixed-order Gauss-Legendre nodes are exact there;
adaptive bisection mops up any event the scan missed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import (
    DiscreteSphericalMeasure,
    GeometryError,
    Polytope,
    SupportBody,
    cosine_transform,
    halfspaces,
    orthonormal_complement,
    relative_volume,
    subspace_projection,
    surface_area_measure,
    volume,
)
from .convexfn import cone_function
from .weights import WeightFunction

DEFAULT_SEED = 0x5EED


class FunctionVanishesError(ValueError):
    """The weighted function is identically zero; the operators are not
    defined on it (the weight is exhausted before the function's minimum)."""


class QuadratureToleranceError(RuntimeError):
    def __init__(self, estimate, tol):
        super().__init__(f"quadrature error estimate {estimate:.3e} "
                         f"exceeds tolerance {tol:.3e}")
        self.estimate = estimate
        self.tol = tol


@dataclass(frozen=True)
class QuadratureConfig:
    """Knobs of the layer-cake quadrature.

    nodes: Gauss-Legendre nodes per cell; tol: target absolute tolerance of
    each reported value; max_depth: adaptive bisection depth; event_scan:
    resolution of the per-cell scan for combinatorial event levels; seed and
    extra_directions control the reproducible direction set.
    """

    nodes: int = 8
    tol: float = 1e-7
    max_depth: int = 12
    event_scan: int = 9
    seed: int = DEFAULT_SEED
    extra_directions: int = 64

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.nodes < 2:
            raise ValueError("need at least two nodes")


DEFAULT_CONFIG = QuadratureConfig()


@lru_cache(maxsize=32)
def _direction_set(dim, seed, extra):
    """Axes, normalized axis diagonals, and seeded pseudorandom unit
    vectors; fixed order so results are reproducible."""
    dirs = []
    eye = np.eye(dim)
    for i in range(dim):
        dirs.append(eye[i])
        dirs.append(-eye[i])
    for i in range(dim):
        for j in range(i + 1, dim):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    v = si * eye[i] + sj * eye[j]
                    dirs.append(v / np.linalg.norm(v))
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(extra, dim))
    raw /= np.linalg.norm(raw, axis=1)[:, None]
    dirs.extend(raw)
    return tuple(tuple(v) for v in dirs)


def direction_set(dim, cfg: QuadratureConfig = DEFAULT_CONFIG):
    return _direction_set(dim, cfg.seed, cfg.extra_directions)


@lru_cache(maxsize=64)
def _gl_rule(nodes):
    return np.polynomial.legendre.leggauss(nodes)


@lru_cache(maxsize=200_000)
def _sublevel_cached(source, s):
    return source.sublevel(s)


# ---------------------------------------------------------------------------
# cell construction


def _signature(P):
    return -1 if P is None else len(P)


def _bisect_event(source, a, b, sig_left, tol=1e-9):
    while b - a > tol:
        mid = 0.5 * (a + b)
        if _signature(_sublevel_cached(source, mid)) == sig_left:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def _event_splits(source, a, b, cfg):
    """Levels in (a, b) where the vertex count of the sublevel set jumps,
    located by scanning and bisecting each sign change."""
    if cfg.event_scan < 3:
        return []
    grid = np.linspace(a, b, cfg.event_scan)
    sigs = [_signature(_sublevel_cached(source, s)) for s in grid]
    events = []
    for g0, g1, s0, s1 in zip(grid, grid[1:], sigs, sigs[1:]):
        if s0 != s1:
            events.append(_bisect_event(source, g0, g1, s0))
    return events


@lru_cache(maxsize=8192)
def layer_cells(zeta: WeightFunction, source, cfg: QuadratureConfig):
    """Integration cells (a, b, density) covering the active sublevel range.

    The range starts at max(weight's first breakpoint, min of the source)
    and ends where the weight's support does; flat weight segments carry no
    density and are dropped.
    """
    m = source.minimum()
    tm = zeta.support_end
    # the minimum carries the bisection tolerance, so treat a hairline
    # active range as vanished as well
    if zeta.eval(m) <= 0.0 or m >= tm - 1e-9:
        raise FunctionVanishesError(
            "weighted function vanishes: weight is zero at the minimum")
    s_lo = max(zeta.breakpoints[0], m)
    knots = [s_lo] + [bp for bp in zeta.breakpoints if s_lo < bp <= tm]
    cells = []
    for a, b in zip(knots, knots[1:]):
        rho = zeta.density_on(a, b)
        if rho <= 1e-15:
            continue
        cuts = [a] + sorted(t for t in _event_splits(source, a, b, cfg)
                            if a + 1e-12 < t < b - 1e-12) + [b]
        for ca, cb in zip(cuts, cuts[1:]):
            cells.append((ca, cb, rho))
    return tuple(cells)


# ---------------------------------------------------------------------------
# adaptive engines


def _gl_vector(f, a, b, nodes):
    x, w = _gl_rule(nodes)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    total = None
    for xi, wi in zip(x, w):
        val = f(mid + half * xi)
        total = wi * val if total is None else total + wi * val
    return half * total


def _adaptive_vector(f, a, b, tol_local, depth, cfg):
    whole = _gl_vector(f, a, b, cfg.nodes)
    mid = 0.5 * (a + b)
    left = _gl_vector(f, a, mid, cfg.nodes)
    right = _gl_vector(f, mid, b, cfg.nodes)
    refined = left + right
    err = float(np.max(np.abs(whole - refined)))
    if err <= tol_local or depth >= cfg.max_depth:
        return refined, err
    lval, lerr = _adaptive_vector(f, a, mid, 0.5 * tol_local, depth + 1, cfg)
    rval, rerr = _adaptive_vector(f, mid, b, 0.5 * tol_local, depth + 1, cfg)
    return lval + rval, lerr + rerr


def integrate_layers_vector(f, cells, cfg, size):
    """Sum of density-weighted cell integrals of a vector integrand."""
    if not cells:
        return np.zeros(size), 0.0
    width = sum(b - a for a, b, _ in cells)
    total = np.zeros(size)
    err = 0.0
    for a, b, rho in cells:
        tol_local = cfg.tol * (b - a) / width
        val, e = _adaptive_vector(lambda s: rho * f(s), a, b, tol_local, 0, cfg)
        total += val
        err += e
    if err > cfg.tol:
        raise QuadratureToleranceError(err, cfg.tol)
    return total, err


def _measure_add(acc, atoms, c):
    for key, w in atoms:
        acc[key] = acc.get(key, 0.0) + c * w


def _gl_measure(f, a, b, nodes):
    x, w = _gl_rule(nodes)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    acc = {}
    for xi, wi in zip(x, w):
        _measure_add(acc, f(mid + half * xi), half * wi)
    return acc


def _measure_probe(acc, probes):
    """Total mass plus cosine-transform values at fixed probe directions;
    insensitive to last-bit jitter in the atom directions, unlike a raw
    key-by-key comparison."""
    if not acc:
        return np.zeros(len(probes) + 1)
    dirs = np.array(list(acc.keys()), dtype=float)
    w = np.array(list(acc.values()), dtype=float)
    return np.concatenate([[w.sum()], np.abs(probes @ dirs.T) @ w])


def _adaptive_measure(f, a, b, tol_local, depth, cfg, probes):
    whole = _gl_measure(f, a, b, cfg.nodes)
    mid = 0.5 * (a + b)
    left = _gl_measure(f, a, mid, cfg.nodes)
    right = _gl_measure(f, mid, b, cfg.nodes)
    refined = dict(left)
    _measure_add(refined, list(right.items()), 1.0)
    err = float(np.max(np.abs(_measure_probe(whole, probes)
                              - _measure_probe(refined, probes))))
    if err <= tol_local or depth >= cfg.max_depth:
        return refined, err
    lval, lerr = _adaptive_measure(f, a, mid, 0.5 * tol_local, depth + 1,
                                   cfg, probes)
    rval, rerr = _adaptive_measure(f, mid, b, 0.5 * tol_local, depth + 1,
                                   cfg, probes)
    _measure_add(lval, list(rval.items()), 1.0)
    return lval, lerr + rerr


def integrate_layers_measure(f, cells, cfg, dim):
    if not cells:
        return {}, 0.0
    # accuracy is judged through mass and cosine values at the fixed
    # deterministic probe directions (axes and diagonals first)
    probes = np.array(direction_set(dim, cfg)[:2 * dim * dim + 4])
    width = sum(b - a for a, b, _ in cells)
    total = {}
    err = 0.0
    for a, b, rho in cells:
        tol_local = cfg.tol * (b - a) / width
        val, e = _adaptive_measure(f, a, b, tol_local, 0, cfg, probes)
        _measure_add(total, list(val.items()), rho)
        err += e * rho
    if err > cfg.tol:
        raise QuadratureToleranceError(err, cfg.tol)
    return total, err


# ---------------------------------------------------------------------------
# the operators


@dataclass(frozen=True)
class LyzMeasure:
    """Aggregated (even) surface area measure of a weighted function."""

    measure: DiscreteSphericalMeasure
    source: str
    error_estimate: float

    @property
    def total_mass(self):
        return self.measure.total_mass

    def cosine(self, z):
        return cosine_transform(self.measure, z)


def _sam_atoms(P):
    """Surface area measure as (rounded direction key, weight) pairs; the
    zero measure for bodies flatter than dimension n-1."""
    if P is None or P.affine_dim < P.dim - 1:
        return []
    sam = surface_area_measure(P)
    return [(tuple(np.round(d, 12)), w) for d, w in sam.atoms]


def lyz_measure(zeta: WeightFunction, u, cfg: QuadratureConfig = DEFAULT_CONFIG,
                tag: str = "") -> LyzMeasure:
    """Even spherical measure aggregating the surface area measures of all
    superlevel sets of the weighted function.

    Accumulated in the sublevel parameter against the weight's Stieltjes
    density, then symmetrized with the measure of the reflected function
    (whose atoms are exactly the reflected atoms).
    """
    cells = layer_cells(zeta, u, cfg)
    raw, err = integrate_layers_measure(
        lambda s: _sam_atoms(_sublevel_cached(u, s)), cells, cfg, u.dim)
    sym = {}
    for key, w in raw.items():
        neg = tuple(-c if c != 0.0 else 0.0 for c in key)
        sym[key] = sym.get(key, 0.0) + 0.5 * w
        sym[neg] = sym.get(neg, 0.0) + 0.5 * w
    measure = DiscreteSphericalMeasure.from_atoms(
        [(np.asarray(k), w) for k, w in sorted(sym.items())])
    return LyzMeasure(measure, tag, err)


def functional_projection_body(zeta, u, cfg=DEFAULT_CONFIG,
                               directions=None) -> SupportBody:
    """Projection body of the weighted function: support values are half
    the cosine transform of its aggregated spherical measure."""
    if directions is None:
        directions = direction_set(u.dim, cfg)
    Y = lyz_measure(zeta, u, cfg)
    vals = tuple(0.5 * Y.cosine(z) for z in directions)
    body = SupportBody(tuple(tuple(map(float, z)) for z in directions), vals,
                       provenance="projection-body")
    defect = body.sublinearity_defect()
    if defect > 1e-9 + 10 * cfg.tol:
        raise QuadratureToleranceError(defect, cfg.tol)
    return body


def level_set_body(zeta, u, cfg=DEFAULT_CONFIG, directions=None) -> SupportBody:
    """Minkowski average of the superlevel sets: support values integrate
    the supports of the sublevel sets against the weight density."""
    if directions is None:
        directions = direction_set(u.dim, cfg)
    D = np.array(directions, dtype=float)
    cells = layer_cells(zeta, u, cfg)

    def f(s):
        P = _sublevel_cached(u, s)
        if P is None:
            return np.zeros(len(D))
        return np.max(P.vertex_array @ D.T, axis=0)

    vals, _err = integrate_layers_vector(f, cells, cfg, len(D))
    body = SupportBody(tuple(tuple(map(float, z)) for z in directions),
                       tuple(float(v) for v in vals),
                       provenance="level-set-body")
    defect = body.sublinearity_defect()
    if defect > 1e-9 + 10 * cfg.tol:
        raise QuadratureToleranceError(defect, cfg.tol)
    return body


def difference_level_set_body(zeta, u, cfg=DEFAULT_CONFIG,
                              directions=None) -> SupportBody:
    """Difference body of the level set body; origin-symmetric by
    construction."""
    if directions is None:
        directions = direction_set(u.dim, cfg)
    dirs = [tuple(map(float, z)) for z in directions]
    full = list(dict.fromkeys(dirs + [tuple(-c for c in z) for z in dirs]))
    base = level_set_body(zeta, u, cfg, tuple(full))
    index = {z: i for i, z in enumerate(full)}
    vals = tuple(base.values[index[z]] + base.values[index[tuple(-c for c in z)]]
                 for z in dirs)
    return SupportBody(tuple(dirs), vals, provenance="difference-body")


def functional_volume(zeta, u, cfg=DEFAULT_CONFIG) -> float:
    """Integral of the weighted function over space, as the layer-cake
    integral of its superlevel volumes."""
    cells = layer_cells(zeta, u, cfg)

    def f(s):
        P = _sublevel_cached(u, s)
        return np.array([0.0 if P is None else volume(P)])

    vals, _ = integrate_layers_vector(f, cells, cfg, 1)
    return float(vals[0])


def projection_interpretation(zeta, u, z, cfg=DEFAULT_CONFIG) -> float:
    """Weighted volume of the shadow of the function on the hyperplane
    orthogonal to z: integrates the projected sublevel-set volumes.

    Independent of the cosine-transform pipeline; used to cross-check
    the projection body values.
    """
    basis = orthonormal_complement(z)
    cells = layer_cells(zeta, u, cfg)

    def f(s):
        P = _sublevel_cached(u, s)
        if P is None:
            return np.array([0.0])
        return np.array([volume(subspace_projection(P, basis))])

    vals, _ = integrate_layers_vector(f, cells, cfg, 1)
    return float(vals[0]) * float(np.linalg.norm(z))


def _boundary_area(P):
    """(n-1)-dimensional boundary measure under the same convention the
    spherical measure uses: facet areas, twice the relative volume for a
    body of dimension n-1, zero below that."""
    if P is None or P.affine_dim < P.dim - 1:
        return 0.0
    if P.affine_dim == P.dim - 1:
        return 2.0 * relative_volume(P)
    return surface_area_measure(P).total_mass


def radial_identity_check(zeta, K: Polytope, cfg=DEFAULT_CONFIG):
    """Both sides of the boundary-area identity for the cone function of K:
    the layer-cake integral of the boundary areas of the scaled copies
    against the closed form built from the weight's (n-2)-nd moment."""
    if min(d for _, d in halfspaces(K)) <= 1e-10:
        raise GeometryError("radial identity needs 0 interior to K")
    u = cone_function(K)
    cells = layer_cells(zeta, u, cfg)

    def f(s):
        return np.array([_boundary_area(_sublevel_cached(u, s))])

    vals, _ = integrate_layers_vector(f, cells, cfg, 1)
    n = K.dim
    rhs = surface_area_measure(K).total_mass * (n - 1) * zeta.moment(n - 2)
    return float(vals[0]), float(rhs)
