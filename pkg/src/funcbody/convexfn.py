"""Piecewise-affine convex functions with compact sublevel sets.

A function is stored H-style as a max of affine pieces over a polyhedral
domain; sublevel sets are extracted as V-polytopes by brute-force vertex
enumeration over the active constraints.  This is the finitely representable
slice of the proper, lower semicontinuous, coercive convex functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations

import numpy as np
from scipy.optimize import linprog

from .geometry import (
    FEAS_TOL,
    GeometryError,
    Polytope,
    UnimodularMap,
    convex_hull,
    feasible_point,
    halfspaces,
    hausdorff_distance,
)

COERCIVITY_TOL = 1e-9
MIN_BISECT_TOL = 1e-9


@lru_cache(maxsize=512)
def _subset_indices(m, n):
    return np.array(list(combinations(range(m), n)))


def _halfspace_vertices(A, b, tol=FEAS_TOL):
    """Vertices of {x : A x <= b} by solving every n-subset of constraints
    and keeping the feasible intersection points.  Returns None when the
    system has no feasible basic point."""
    m, n = A.shape
    norms = np.linalg.norm(A, axis=1)
    ok = norms > 1e-12
    if np.any(~ok) and np.any(b[~ok] < -tol):
        return None
    A, b = A[ok] / norms[ok, None], b[ok] / norms[ok]
    m = len(A)
    if m < n:
        return None
    subsets = _subset_indices(m, n)
    mats = A[subsets]
    dets = np.abs(np.linalg.det(mats))
    good = dets > 1e-10
    if not np.any(good):
        return None
    sols = np.linalg.solve(mats[good], b[subsets][good][:, :, None])[:, :, 0]
    feas = np.all(sols @ A.T <= b + tol, axis=1)
    pts = sols[feas]
    if len(pts) == 0:
        return None
    # merge near-coincident basic solutions before hulling
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    keep = [pts[0]]
    for p in pts[1:]:
        if np.max(np.abs(p - keep[-1])) > tol:
            keep.append(p)
    return np.array(keep)


@dataclass(frozen=True)
class PiecewiseAffineConvexFunction:
    """u(x) = max of a.x + b over the pieces, on {x : c.x <= d}, +inf outside.

    Immutable; an empty piece list is normalized to the single zero piece,
    which turns the function into the indicator of its domain.
    """

    pieces: tuple   # ((a, b), ...) with a a coordinate tuple
    domain: tuple = ()   # ((c, d), ...) halfspaces c.x <= d

    def __post_init__(self):
        pieces = tuple((tuple(map(float, a)), float(b)) for a, b in self.pieces)
        domain = tuple((tuple(map(float, c)), float(d)) for c, d in self.domain)
        if not pieces and not domain:
            raise ValueError("function needs at least one piece or halfspace")
        dim = len(pieces[0][0]) if pieces else len(domain[0][0])
        if not pieces:
            pieces = (((0.0,) * dim, 0.0),)
        for a, _ in pieces:
            if len(a) != dim:
                raise ValueError("inconsistent piece dimension")
        for c, _ in domain:
            if len(c) != dim:
                raise ValueError("inconsistent halfspace dimension")
        # deduplicate exact repeats (frequent after lattice max)
        object.__setattr__(self, "pieces", tuple(dict.fromkeys(pieces)))
        object.__setattr__(self, "domain", tuple(dict.fromkeys(domain)))

    @property
    def dim(self):
        return len(self.pieces[0][0])

    @cached_property
    def _piece_arrays(self):
        A = np.array([a for a, _ in self.pieces], dtype=float)
        b = np.array([b for _, b in self.pieces], dtype=float)
        return A, b

    @cached_property
    def _domain_arrays(self):
        if not self.domain:
            return np.zeros((0, self.dim)), np.zeros(0)
        C = np.array([c for c, _ in self.domain], dtype=float)
        d = np.array([d for _, d in self.domain], dtype=float)
        return C, d

    def evaluate(self, x):
        """Value at x, math.inf outside the domain."""
        x = np.asarray(x, dtype=float)
        C, d = self._domain_arrays
        if len(C) and np.any(C @ x > d + FEAS_TOL):
            return math.inf
        A, b = self._piece_arrays
        return float(np.max(A @ x + b))

    @cached_property
    def is_coercive(self):
        """True when the common recession cone of all sublevel sets is {0}."""
        A, _ = self._piece_arrays
        C, _ = self._domain_arrays
        cone = np.vstack([A, C])
        zeros = np.zeros(len(cone))
        for i in range(self.dim):
            for sign in (1.0, -1.0):
                c = np.zeros(self.dim)
                c[i] = -sign
                res = linprog(c, A_ub=cone, b_ub=zeros,
                              bounds=[(-1.0, 1.0)] * self.dim, method="highs")
                if res.success and -res.fun > COERCIVITY_TOL:
                    return False
        return True

    def sublevel(self, t):
        """The set {u <= t} as a Polytope, or None when empty."""
        if not self.is_coercive:
            raise ValueError("sublevel sets require a coercive function")
        A, b = self._piece_arrays
        C, d = self._domain_arrays
        G = np.vstack([A, C])
        h = np.concatenate([t - b, d])
        pts = _halfspace_vertices(G, h)
        if pts is None:
            return None
        return convex_hull(pts)

    def _sublevel_nonempty(self, t):
        A, b = self._piece_arrays
        C, d = self._domain_arrays
        G = np.vstack([A, C])
        h = np.concatenate([t - b, d])
        res = linprog(np.zeros(self.dim), A_ub=G, b_ub=h,
                      bounds=[(None, None)] * self.dim, method="highs",
                      options={"primal_feasibility_tolerance": 1e-10})
        return res.status == 0

    @cached_property
    def _minimum(self):
        if not self.is_coercive:
            raise ValueError("minimum requires a coercive function")
        x0 = feasible_point(list(self.domain), self.dim)
        if x0 is None:
            raise ValueError("improper function: empty domain")
        hi = self.evaluate(x0) + 1.0
        lo, step = hi - 1.0, 1.0
        for _ in range(80):
            if not self._sublevel_nonempty(lo):
                break
            step *= 2.0
            lo -= step
        else:
            raise ValueError("no lower bound found; function not coercive?")
        while hi - lo > MIN_BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if self._sublevel_nonempty(mid):
                hi = mid
            else:
                lo = mid
        return hi

    def minimum(self):
        """Global minimum located by bisection on sublevel emptiness."""
        return self._minimum


def evaluate(u, x):
    return u.evaluate(x)


def sublevel(u, t):
    return u.sublevel(t)


# ---------------------------------------------------------------------------
# constructors


def cone_function(K: Polytope) -> PiecewiseAffineConvexFunction:
    """The cone function of K (0 must lie in K): sublevel at t is t K.

    Facets with positive offset become gauge pieces, facets through the
    origin become recession constraints of the domain pos(K).
    """
    hs = halfspaces(K)
    if any(d < -1e-10 for _, d in hs):  # 0 violates a facet inequality
        raise GeometryError("cone function needs 0 in K")
    pieces, domain = [], []
    for normal, offset in hs:
        if offset > 1e-10:
            pieces.append((tuple(np.asarray(normal) / offset), 0.0))
        else:
            domain.append((normal, 0.0))
    u = PiecewiseAffineConvexFunction(tuple(pieces), tuple(domain))
    check = u.sublevel(1.0)
    if check is None or len(check) != len(K) or \
            np.max(np.abs(check.vertex_array - K.vertex_array)) > 1e-9:
        raise GeometryError("cone construction failed to reproduce K")
    return u


def indicator(K: Polytope, t: float = 0.0) -> PiecewiseAffineConvexFunction:
    """Indicator of K shifted by t: value t on K, +inf outside."""
    return PiecewiseAffineConvexFunction(
        (((0.0,) * K.dim, float(t)),), tuple(halfspaces(K)))


def clip_polytope(P: Polytope, normal, offset):
    """P intersected with the halfspace normal.x <= offset (None if empty)."""
    hs = list(halfspaces(P)) + [(tuple(map(float, normal)), float(offset))]
    A = np.array([c for c, _ in hs], dtype=float)
    b = np.array([d for _, d in hs], dtype=float)
    pts = _halfspace_vertices(A, b)
    return None if pts is None else convex_hull(pts)


def outer_polytope(body) -> Polytope:
    """Intersection of the supporting halfspaces a SupportBody samples:
    the tightest polytope certified to contain the underlying body."""
    A = body.direction_array
    b = body.value_array
    pts = _halfspace_vertices(A, b)
    if pts is None:
        raise ValueError("sampled halfspaces have empty intersection")
    return convex_hull(pts)


# ---------------------------------------------------------------------------
# group actions


def act_linear(u, phi: UnimodularMap):
    """u composed with the inverse of phi; sublevels transform by phi."""
    it = phi.inverse_transpose
    pieces = tuple((tuple(it @ np.asarray(a)), b) for a, b in u.pieces)
    domain = tuple((tuple(it @ np.asarray(c)), d) for c, d in u.domain)
    return PiecewiseAffineConvexFunction(pieces, domain)


def act_translate(u, x0):
    """u composed with the inverse translation x -> x + x0."""
    x0 = np.asarray(x0, dtype=float)
    pieces = tuple((a, b - float(np.asarray(a) @ x0)) for a, b in u.pieces)
    domain = tuple((c, d + float(np.asarray(c) @ x0)) for c, d in u.domain)
    return PiecewiseAffineConvexFunction(pieces, domain)


def act_add_constant(u, c):
    pieces = tuple((a, b + float(c)) for a, b in u.pieces)
    return PiecewiseAffineConvexFunction(pieces, u.domain)


def reflect_arg(u):
    """x -> u(-x)."""
    pieces = tuple((tuple(-np.asarray(a)), b) for a, b in u.pieces)
    domain = tuple((tuple(-np.asarray(c)), d) for c, d in u.domain)
    return PiecewiseAffineConvexFunction(pieces, domain)


# ---------------------------------------------------------------------------
# lattice structure


def pointwise_max(u, v) -> PiecewiseAffineConvexFunction:
    """max(u, v): union of pieces, intersection of domains."""
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    return PiecewiseAffineConvexFunction(u.pieces + v.pieces,
                                         u.domain + v.domain)


@dataclass(frozen=True)
class CertifiedMin:
    """Pointwise min of a certified lattice pair.

    Exposes the sublevel-set protocol the integral operators consume:
    {min <= t} is the hull of the union of the two sublevel sets, which by
    certification equals the union itself.
    """

    u: PiecewiseAffineConvexFunction
    v: PiecewiseAffineConvexFunction

    @property
    def dim(self):
        return self.u.dim

    def evaluate(self, x):
        return min(self.u.evaluate(x), self.v.evaluate(x))

    def sublevel(self, t):
        su = self.u.sublevel(t)
        sv = self.v.sublevel(t)
        if su is None:
            return sv
        if sv is None:
            return su
        return convex_hull(np.vstack([su.vertex_array, sv.vertex_array]))

    def minimum(self):
        return min(self.u.minimum(), self.v.minimum())

    def jump_levels(self):
        """Levels where the union can change discontinuously: one side's
        sublevel set pops into existence at that side's minimum."""
        return (self.u.minimum(), self.v.minimum())


@dataclass(frozen=True)
class LatticePair:
    u: PiecewiseAffineConvexFunction
    v: PiecewiseAffineConvexFunction
    certified: bool
    probe_levels: tuple

    def min_function(self) -> CertifiedMin:
        return CertifiedMin(self.u, self.v)

    def max_function(self) -> PiecewiseAffineConvexFunction:
        return pointwise_max(self.u, self.v)


def probe_levels(u, v=None, count=32, span=4.0):
    """Levels where lattice identities are checked: vertex event levels of
    the sublevel sets near the top of the range, plus a uniform grid.

    Combinatorial changes of sublevel sets happen exactly at levels taken
    by vertices, so those are included explicitly.
    """
    lo = u.minimum() if v is None else min(u.minimum(), v.minimum())
    hi = lo + span
    levels = set()
    for f in (u,) if v is None else (u, v):
        P = f.sublevel(hi)
        if P is not None:
            for x in P.vertex_array:
                val = f.evaluate(x)
                if math.isfinite(val) and lo < val <= hi:
                    levels.add(round(val, 12))
    eps = max(1e-9, 1e-9 * abs(lo))
    levels.update(np.linspace(lo + eps, hi, count))
    return tuple(sorted(levels))


def pointwise_min_certified(u, v, levels=None, samples=20,
                            seed=0xC0FFEE, tol=1e-8) -> LatticePair:
    """Pair (u, v) with an empirical convexity certificate for min(u, v).

    At every probe level the hull of the union of the two sublevel sets is
    sampled (vertices, pairwise midpoints, random convex combinations) and
    each sample must lie in one of the two sets; a failure flags the pair
    as uncertified rather than rejecting it.
    """
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    if levels is None:
        levels = probe_levels(u, v)
    rng = np.random.default_rng(seed)
    certified = True
    for t in levels:
        su = u.sublevel(t)
        sv = v.sublevel(t)
        if su is None or sv is None:
            continue
        hull = convex_hull(np.vstack([su.vertex_array, sv.vertex_array]))
        V = hull.vertex_array
        probes = [V]
        if len(V) > 1:
            mids = 0.5 * (V[:, None, :] + V[None, :, :]).reshape(-1, hull.dim)
            probes.append(mids)
            lam = rng.dirichlet(np.ones(len(V)), size=samples)
            probes.append(lam @ V)
        for x in np.vstack(probes):
            if min(u.evaluate(x), v.evaluate(x)) > t + tol:
                certified = False
                break
        if not certified:
            break
    return LatticePair(u, v, certified, tuple(levels))


def sublevel_hausdorff_profile(u, v, levels):
    """Hausdorff distance between the sublevel sets of u and v per level;
    math.inf encodes exactly one side being empty."""
    out = []
    for t in levels:
        su = u.sublevel(t)
        sv = v.sublevel(t)
        if su is None and sv is None:
            out.append(0.0)
        elif su is None or sv is None:
            out.append(math.inf)
        else:
            out.append(hausdorff_distance(su, sv))
    return out
