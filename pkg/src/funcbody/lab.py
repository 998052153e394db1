"""Black-box verification harness for the integral operators.

Each check exercises one structural law (valuation identity, linear
equivariance, translation invariance, monotonicity, growth of cone and
indicator families) against the operators built on weighted convex
functions, and reports machine-readable residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bodies import (
    DEFAULT_CONFIG,
    FunctionVanishesError,
    QuadratureConfig,
    direction_set,
    difference_level_set_body,
    functional_projection_body,
    level_set_body,
    lyz_measure,
)
from .convexfn import (
    LatticePair,
    PiecewiseAffineConvexFunction,
    act_add_constant,
    act_linear,
    act_translate,
    cone_function,
    indicator,
)
from .geometry import (
    Polytope,
    UnimodularMap,
    convex_hull,
    difference_body,
    moment_body_support,
    moment_vector,
    projection_body,
    reflect,
    support,
)
from .weights import WeightFunction

CONTRAVARIANT = "contravariant"
COVARIANT = "covariant"
MEASURE = "measure"


@lru_cache(maxsize=4096)
def _cached_lyz(zeta, u, cfg):
    return lyz_measure(zeta, u, cfg)


@lru_cache(maxsize=4096)
def _cached_level_set(zeta, u, cfg, dirs):
    return level_set_body(zeta, u, cfg, dirs).value_array


@dataclass(frozen=True)
class OperatorHandle:
    """A support-valued operator under test.

    `evaluator(u, z)` returns the support value at one direction;
    `batch(u, dirs)` evaluates many directions in a single quadrature pass.
    The variance tag states which transformation law applies; the measure
    tag means cosine-transform test values rather than a support function.
    """

    name: str
    variance: str
    zeta: WeightFunction
    cfg: QuadratureConfig = DEFAULT_CONFIG

    def batch(self, u, dirs):
        dirs = tuple(tuple(map(float, z)) for z in dirs)
        try:
            if self.name == "projection-body":
                Y = _cached_lyz(self.zeta, u, self.cfg)
                return np.array([0.5 * Y.cosine(z) for z in dirs])
            if self.name == "lyz-measure":
                Y = _cached_lyz(self.zeta, u, self.cfg)
                return np.array([Y.cosine(z) for z in dirs])
            if self.name == "level-set-body":
                return _cached_level_set(self.zeta, u, self.cfg, dirs).copy()
            if self.name == "difference-body":
                full = tuple(dict.fromkeys(
                    dirs + tuple(tuple(-c for c in z) for z in dirs)))
                vals = _cached_level_set(self.zeta, u, self.cfg, full)
                index = {z: i for i, z in enumerate(full)}
                return np.array([vals[index[z]] +
                                 vals[index[tuple(-c for c in z)]]
                                 for z in dirs])
        except FunctionVanishesError:
            return np.zeros(len(dirs))
        raise ValueError(f"unknown operator {self.name}")

    def evaluator(self, u, z):
        return float(self.batch(u, (z,))[0])


def projection_body_operator(zeta, cfg=DEFAULT_CONFIG):
    return OperatorHandle("projection-body", CONTRAVARIANT, zeta, cfg)


def level_set_body_operator(zeta, cfg=DEFAULT_CONFIG):
    return OperatorHandle("level-set-body", COVARIANT, zeta, cfg)


def difference_body_operator(zeta, cfg=DEFAULT_CONFIG):
    return OperatorHandle("difference-body", COVARIANT, zeta, cfg)


def lyz_measure_operator(zeta, cfg=DEFAULT_CONFIG):
    return OperatorHandle("lyz-measure", MEASURE, zeta, cfg)


def _report(name, residuals, tol, witness=None, extra=None):
    residuals = [float(r) for r in residuals]
    max_res = max(residuals) if residuals else 0.0
    rep = {"check": name,
           "max_residual": max_res,
           "tolerance": float(tol),
           "pass": bool(max_res <= tol),
           "witness": witness or {},
           "residuals": residuals}
    if extra:
        rep.update(extra)
    return rep


# ---------------------------------------------------------------------------
# the axioms


def check_valuation(Z: OperatorHandle, pair: LatticePair, directions=None,
                    tol=4e-7):
    """Residuals of Z(max) + Z(min) = Z(u) + Z(v) over the direction set."""
    if not pair.certified:
        raise ValueError("valuation check needs a certified lattice pair")
    if directions is None:
        directions = direction_set(pair.u.dim, Z.cfg)
    vmax = Z.batch(pair.max_function(), directions)
    vmin = Z.batch(pair.min_function(), directions)
    vu = Z.batch(pair.u, directions)
    vv = Z.batch(pair.v, directions)
    res = np.abs(vmax + vmin - vu - vv)
    worst = int(np.argmax(res)) if len(res) else 0
    return _report(f"valuation:{Z.name}", res, tol,
                   witness={"direction": list(directions[worst])})


def check_equivariance(Z: OperatorHandle, u, maps, directions=None, tol=2e-7):
    """Contravariant law: values of Z(u o phi^-1) at z match Z(u) at
    phi^-1 z; covariant law matches at phi^t z instead."""
    if directions is None:
        directions = direction_set(u.dim, Z.cfg)
    D = np.array(directions, dtype=float)
    residuals = []
    witness = {}
    for k, phi in enumerate(maps):
        moved = act_linear(u, phi)
        lhs = Z.batch(moved, directions)
        if Z.variance == COVARIANT:
            target = D @ phi.array
        else:
            target = D @ phi.inverse.T
        rhs = Z.batch(u, tuple(map(tuple, target)))
        res = np.abs(lhs - rhs)
        i = int(np.argmax(res))
        if not witness or res[i] > max(residuals):
            witness = {"map_index": k, "direction": list(D[i])}
        residuals.append(float(np.max(res)))
    return _report(f"equivariance:{Z.name}", residuals, tol, witness=witness)


def check_translation_invariance(Z: OperatorHandle, u, shifts,
                                 directions=None, tol=2e-7):
    if directions is None:
        directions = direction_set(u.dim, Z.cfg)
    base = Z.batch(u, directions)
    residuals = []
    for x0 in shifts:
        moved = act_translate(u, x0)
        residuals.append(float(np.max(np.abs(Z.batch(moved, directions) - base))))
    return _report(f"translation-invariance:{Z.name}", residuals, tol)


def _verify_ordering(u, v, rng, samples=40):
    """Empirical check that u >= v: sample sublevel vertices of v and random
    points near them."""
    level = v.minimum() + 2.0
    P = v.sublevel(level)
    pts = [P.vertex_array.mean(axis=0)] if P is not None else []
    if P is not None:
        pts.extend(P.vertex_array)
        lam = rng.dirichlet(np.ones(len(P.vertex_array)), size=samples)
        pts.extend(lam @ P.vertex_array)
    for x in pts:
        if u.evaluate(x) < v.evaluate(x) - 1e-9:
            return False
    return True


def check_monotone(Z: OperatorHandle, ordered_pairs, directions=None,
                   tol=2e-7, seed=7):
    """For u >= v the built-in operators decrease: Z(u) sits inside Z(v)."""
    rng = np.random.default_rng(seed)
    residuals = []
    for u, v in ordered_pairs:
        if not _verify_ordering(u, v, rng):
            raise ValueError("pair violates the ordering u >= v")
        dirs = directions or direction_set(u.dim, Z.cfg)
        hu = Z.batch(u, dirs)
        hv = Z.batch(v, dirs)
        residuals.append(float(np.max(hu - hv)))
    return _report(f"monotone:{Z.name}", [max(r, 0.0) for r in residuals], tol)


# ---------------------------------------------------------------------------
# growth functions


@dataclass(frozen=True)
class GrowthProfile:
    """Scalar growth of Z along the family cone(K) + t, normalized by the
    reference body's support in a fixed probe direction."""

    grid: tuple
    psi: tuple
    reference_direction: tuple
    body: Polytope
    cross_deviation: float


def reference_support(Z: OperatorHandle, K: Polytope, z):
    """Support of the body Z degenerates to on cone/indicator families:
    the projection body (contravariant), its doubled cosine values (the
    measure), the difference body, or the body itself (level set body)."""
    if Z.variance == CONTRAVARIANT:
        return support(projection_body(K), z)
    if Z.variance == MEASURE:
        return 2.0 * support(projection_body(K), z)
    if Z.name == "level-set-body":
        return support(K, z)
    return support(difference_body(K), z)


def extract_cone_growth(Z: OperatorHandle, K: Polytope, t_grid,
                        rel_tol=1e-6) -> GrowthProfile:
    """psi(t) = Z(cone(K) + t) support over the reference support, computed
    in a probe direction and cross-checked in a second one."""
    dirs = direction_set(K.dim, Z.cfg)
    refs = np.array([reference_support(Z, K, z) for z in dirs])
    order = np.argsort(-refs)
    i1 = int(order[0])
    if refs[i1] <= 1e-6:
        raise ValueError("reference body has no usable support direction")
    i2 = next((int(i) for i in order[1:] if refs[i] > 1e-6), None)
    z1 = dirs[i1]
    z2 = None if i2 is None else dirs[i2]
    u0 = cone_function(K)
    psi1, psi2 = [], []
    for t in t_grid:
        ut = act_add_constant(u0, t)
        vals = Z.batch(ut, (z1,) if z2 is None else (z1, z2))
        psi1.append(vals[0] / refs[i1])
        if z2 is not None:
            psi2.append(vals[1] / refs[i2])
    cross = 0.0
    if z2 is not None:
        a1, a2 = np.array(psi1), np.array(psi2)
        cross = float(np.max(np.abs(a1 - a2) / np.maximum(np.abs(a1), 1e-12)))
        if cross > rel_tol and np.max(np.abs(a1 - a2)) > rel_tol:
            raise ValueError(f"growth not proportional to the reference "
                             f"body (cross deviation {cross:.3e})")
    return GrowthProfile(tuple(float(t) for t in t_grid),
                         tuple(float(p) for p in psi1),
                         tuple(z1), K, cross)


def central_difference(psi, h, order):
    """Central finite differences of the given order on a uniform grid;
    returns (interior offsets, values)."""
    psi = np.asarray(psi, dtype=float)
    if order == 1:
        return slice(1, -1), (psi[2:] - psi[:-2]) / (2.0 * h)
    if order == 2:
        return slice(1, -1), (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / h ** 2
    if order == 3:
        vals = (psi[4:] - 2.0 * psi[3:-1] + 2.0 * psi[1:-3] - psi[:-4]) \
            / (2.0 * h ** 3)
        return slice(2, -2), vals
    raise ValueError("supported difference orders: 1, 2, 3")


def check_growth_derivative_law(profile: GrowthProfile, zeta: WeightFunction,
                                n: int, variance=CONTRAVARIANT, tol=None,
                                curvature_factor=1.0):
    """The weight is a scaled derivative of the cone growth function:
    order n-1 with sign (-1)^(n-1)/(n-1)! in the contravariant case, a
    plain negated first derivative in the covariant case."""
    grid = np.asarray(profile.grid)
    steps = np.diff(grid)
    if len(steps) == 0 or np.max(np.abs(steps - steps[0])) > 1e-12:
        raise ValueError("derivative law needs a uniform grid")
    h = float(steps[0])
    warnings = []
    margin = 2.0 * h
    for t in grid:
        if any(abs(t - bp) < margin for bp in zeta.breakpoints):
            warnings.append(float(t))
    order = 1 if variance == COVARIANT else n - 1
    sign = -1.0 if variance == COVARIANT else (-1.0) ** (n - 1) / math.factorial(n - 1)
    sl, fd = central_difference(profile.psi, h, order)
    targets = np.array([zeta.eval(t) for t in grid[sl]])
    res = np.abs(sign * fd - targets)
    tol_eff = max(tol if tol is not None else 1e-4, curvature_factor * h ** 2)
    worst = int(np.argmax(res)) if len(res) else 0
    return _report(f"growth-derivative:{variance}", res, tol_eff,
                   witness={"t": float(grid[sl][worst])},
                   extra={"grid_warnings": warnings,
                          "psi_decreasing": bool(np.all(np.diff(profile.psi)
                                                        <= 1e-10))})


def check_indicator_law(Z: OperatorHandle, P: Polytope, t_grid, tol=1e-7,
                        directions=None):
    """Z on shifted indicators of P is the weight value times the reference
    body of P."""
    if directions is None:
        directions = direction_set(P.dim, Z.cfg)
    refs = np.array([reference_support(Z, P, z) for z in directions])
    residuals = []
    witness = {}
    for t in t_grid:
        vals = Z.batch(indicator(P, t), directions)
        res = np.abs(vals - Z.zeta.eval(t) * refs)
        i = int(np.argmax(res))
        if not witness or res[i] > max(residuals):
            witness = {"t": float(t), "direction": list(directions[i])}
        residuals.append(float(np.max(res)))
    return _report(f"indicator-law:{Z.name}", residuals, tol, witness=witness)


# ---------------------------------------------------------------------------
# covariant component fit


def _simplex_family_matrix(dim, s_values):
    """Support data of the stretched simplices conv{0, s e1, e2, ...} at
    +-e1 for the component model c1 K + c2 (-K) + c3 (moment body) + c4
    (moment vector); two rows per stretch."""
    rows = []
    e1 = np.zeros(dim)
    e1[0] = 1.0
    for s in s_values:
        verts = [np.zeros(dim), s * e1]
        verts += [np.eye(dim)[i] for i in range(1, dim)]
        T = convex_hull(verts)
        m = moment_vector(T)
        for z in (e1, -e1):
            rows.append([support(T, z), support(reflect(T), z),
                         moment_body_support(T, z), float(m @ z)])
    return np.array(rows)


def fit_covariant_components(Z: OperatorHandle, t, s_values=(1.0, 2.0, 3.0)):
    """Least-squares decomposition of Z(cone(T_s) + t) at +-e1 into the
    four covariant building blocks; returns (coefficients, residual)."""
    dim = 3
    A = _simplex_family_matrix(dim, s_values)
    e1 = np.zeros(dim)
    e1[0] = 1.0
    rhs = []
    for s in s_values:
        verts = [np.zeros(dim), s * e1]
        verts += [np.eye(dim)[i] for i in range(1, dim)]
        u = act_add_constant(cone_function(convex_hull(verts)), t)
        vals = Z.batch(u, (tuple(e1), tuple(-e1)))
        rhs.extend(vals)
    coeffs, _, _, _ = np.linalg.lstsq(A, np.array(rhs), rcond=None)
    residual = float(np.max(np.abs(A @ coeffs - rhs)))
    return coeffs, residual


def check_covariant_decomposition(Z: OperatorHandle, t_grid, tol=1e-6):
    """The covariant operators carry no moment-body or moment-vector part
    and weight K and -K equally."""
    residuals = []
    witness = {}
    for t in t_grid:
        coeffs, fit_res = fit_covariant_components(Z, t)
        res = max(abs(coeffs[2]), abs(coeffs[3]),
                  abs(coeffs[0] - coeffs[1]), fit_res)
        if not witness or res > max(residuals):
            witness = {"t": float(t), "coefficients": [float(c) for c in coeffs]}
        residuals.append(res)
    return _report(f"covariant-decomposition:{Z.name}", residuals, tol,
                   witness=witness)
