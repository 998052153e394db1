"""Polytope geometry kernel for dimensions 1 through 4.

V-representation polytopes with the classical body-valued operators:
support functions, Minkowski sums, surface area measures, projection /
difference / moment bodies and moment vectors.  All arithmetic is floating
point with fixed tolerances; inputs are expected at desk scale (a few dozen
vertices, coordinates well inside [-1e6, 1e6]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull, QhullError, cKDTree

VERTEX_TOL = 1e-10          # coordinate tolerance for dedup / extremeness
FEAS_TOL = 1e-9             # feasibility slack in halfspace checks
ATOM_MERGE_TOL = 1e-10      # angular tolerance when merging measure atoms
UNIT_TOL = 1e-12            # accepted deviation from unit norm
SPECIAL_LINEAR_TOL = 1e-12  # |det - 1| bound for special-linear maps


class GeometryError(ValueError):
    """Invalid geometric input: empty hulls, bad dimensions, singular maps."""


def _as_points(points):
    arr = np.atleast_2d(np.asarray(points, dtype=float))
    if arr.size == 0:
        raise GeometryError("empty point set")
    if not np.all(np.isfinite(arr)):
        raise GeometryError("non-finite coordinates")
    if arr.shape[1] not in (1, 2, 3, 4):
        raise GeometryError(f"unsupported dimension {arr.shape[1]}")
    return arr


def _dedup_rows(arr, tol=VERTEX_TOL):
    """Merge rows that coincide within `tol` (max-norm), keeping first seen."""
    order = np.lexsort(arr.T[::-1])
    arr = arr[order]
    keep = [arr[0]]
    for row in arr[1:]:
        if np.max(np.abs(row - keep[-1])) > tol:
            keep.append(row)
    return np.array(keep)


def _lex_sorted(arr):
    return arr[np.lexsort(arr.T[::-1])]


def _affine_basis(arr, tol=VERTEX_TOL):
    """Return (origin, orthonormal basis of the affine hull, orthonormal
    basis of its orthogonal complement)."""
    x0 = arr[0]
    centered = arr - x0
    if len(arr) == 1:
        return x0, np.zeros((arr.shape[1], 0)), np.eye(arr.shape[1])
    _, svals, vt = np.linalg.svd(centered, full_matrices=True)
    scale = max(1.0, svals[0] if len(svals) else 1.0)
    rank = int(np.sum(svals > tol * scale))
    return x0, vt[:rank].T, vt[rank:].T


def _extreme_indices(arr):
    """Indices of the extreme points of arr, which must affinely span its
    ambient space (qhull needs a full-dimensional input)."""
    n = arr.shape[1]
    if n == 1:
        return [int(np.argmin(arr[:, 0])), int(np.argmax(arr[:, 0]))]
    try:
        hull = ConvexHull(arr)
    except QhullError as exc:  # pragma: no cover - guarded by rank dispatch
        raise GeometryError(f"hull failed: {exc}") from exc
    return list(hull.vertices)


@dataclass(frozen=True)
class Polytope:
    """Convex polytope given by its canonical vertex list.

    Vertices are extreme points only, deduplicated and sorted
    lexicographically, so equal point sets produce identical objects.
    Use :func:`convex_hull` to build one from raw points.
    """

    vertices: tuple

    @cached_property
    def vertex_array(self):
        return np.array(self.vertices, dtype=float)

    @property
    def dim(self):
        return len(self.vertices[0])

    @cached_property
    def affine_dim(self):
        _, basis, _ = _affine_basis(self.vertex_array)
        return basis.shape[1]

    @cached_property
    def vertex_centroid(self):
        return self.vertex_array.mean(axis=0)

    def __len__(self):
        return len(self.vertices)


def convex_hull(points) -> Polytope:
    """Canonical V-representation of conv(points)."""
    arr = _dedup_rows(_as_points(points))
    x0, basis, _ = _affine_basis(arr)
    k = basis.shape[1]
    if k == 0:
        verts = arr[:1]
    elif k == arr.shape[1]:
        verts = arr[_extreme_indices(arr)]
    else:
        coords = (arr - x0) @ basis
        verts = arr[_extreme_indices(coords)]
    verts = _lex_sorted(_dedup_rows(verts))
    return Polytope(tuple(map(tuple, verts)))


def support(P: Polytope, z) -> float:
    """Support function h(P, z) = max of z.x over the vertices."""
    z = np.asarray(z, dtype=float)
    if z.shape != (P.dim,):
        raise GeometryError("dimension mismatch")
    return float(np.max(P.vertex_array @ z))


def minkowski_sum(P: Polytope, Q: Polytope) -> Polytope:
    if P.dim != Q.dim:
        raise GeometryError("dimension mismatch")
    sums = (P.vertex_array[:, None, :] + Q.vertex_array[None, :, :])
    return convex_hull(sums.reshape(-1, P.dim))


def translate(P: Polytope, x) -> Polytope:
    x = np.asarray(x, dtype=float)
    return Polytope(tuple(map(tuple, _lex_sorted(P.vertex_array + x))))


def reflect(P: Polytope) -> Polytope:
    """Central reflection -P."""
    return Polytope(tuple(map(tuple, _lex_sorted(-P.vertex_array))))


@dataclass(frozen=True)
class UnimodularMap:
    """Invertible linear map, optionally certified special-linear."""

    matrix: tuple
    kind: str = "general-linear"

    def __post_init__(self):
        arr = self.array
        det = np.linalg.det(arr)
        if abs(det) < 1e-14:
            raise GeometryError("singular map")
        if self.kind == "special-linear" and abs(det - 1.0) > SPECIAL_LINEAR_TOL:
            raise GeometryError(f"determinant {det} not 1 within tolerance")

    @cached_property
    def array(self):
        return np.array(self.matrix, dtype=float)

    @cached_property
    def inverse(self):
        return np.linalg.inv(self.array)

    @cached_property
    def inverse_transpose(self):
        return self.inverse.T

    @property
    def dim(self):
        return len(self.matrix)

    @classmethod
    def from_array(cls, arr, special=False):
        arr = np.asarray(arr, dtype=float)
        return cls(tuple(map(tuple, arr)),
                   "special-linear" if special else "general-linear")

    @classmethod
    def identity(cls, dim):
        return cls.from_array(np.eye(dim), special=True)


def linear_image(P: Polytope, phi: UnimodularMap) -> Polytope:
    if phi.dim != P.dim:
        raise GeometryError("dimension mismatch")
    return convex_hull(P.vertex_array @ phi.array.T)


def random_special_linear(dim, rng, steps=3) -> UnimodularMap:
    """Compose random shears and plane rotations; det stays 1 to ~1e-15."""
    M = np.eye(dim)
    for _ in range(steps):
        i, j = rng.choice(dim, size=2, replace=False)
        S = np.eye(dim)
        S[i, j] = rng.uniform(-0.7, 0.7)
        theta = rng.uniform(0.0, 2.0 * np.pi)
        a, b = sorted(rng.choice(dim, size=2, replace=False))
        R = np.eye(dim)
        R[a, a] = R[b, b] = np.cos(theta)
        R[a, b] = -np.sin(theta)
        R[b, a] = np.sin(theta)
        M = R @ S @ M
    return UnimodularMap.from_array(M, special=True)


# ---------------------------------------------------------------------------
# facet structure


@dataclass(frozen=True)
class Facet:
    normal: tuple        # outward unit normal
    offset: float        # h(P, normal)
    area: float          # (n-1)-volume of the facet
    vertex_ids: tuple    # indices into the polytope's vertex list


def _simplex_facet_area(pts):
    """(n-1)-volume of the simplex spanned by n points in R^n."""
    edges = pts[1:] - pts[0]
    gram = edges @ edges.T
    det = max(np.linalg.det(gram), 0.0)
    return math.sqrt(det) / math.factorial(len(pts) - 1)


def facets(P: Polytope):
    """Facet normals, offsets, areas and vertex sets of a full-dimensional
    polytope.  Coplanar qhull simplices are merged into single facets."""
    n = P.dim
    if P.affine_dim != n:
        raise GeometryError("facets require a full-dimensional polytope")
    V = P.vertex_array
    if n == 1:
        lo, hi = np.argmin(V[:, 0]), np.argmax(V[:, 0])
        return [Facet((1.0,), float(V[hi, 0]), 1.0, (int(hi),)),
                Facet((-1.0,), float(-V[lo, 0]), 1.0, (int(lo),))]
    hull = ConvexHull(V)
    groups = {}
    for eq, simplex in zip(hull.equations, hull.simplices):
        key = tuple(np.round(eq, 9))
        rec = groups.setdefault(key, [eq.copy(), 0.0, set()])
        rec[1] += _simplex_facet_area(V[simplex])
        rec[2].update(int(i) for i in simplex)
    # second pass: merge groups split by rounding at a boundary
    merged = []
    for eq, area, ids in groups.values():
        for other in merged:
            if np.max(np.abs(other[0] - eq)) <= 1e-8:
                other[1] += area
                other[2] |= ids
                break
        else:
            merged.append([eq, area, ids])
    out = []
    for eq, area, ids in merged:
        normal = eq[:-1] / np.linalg.norm(eq[:-1])
        out.append(Facet(tuple(normal), float(-eq[-1]), float(area),
                         tuple(sorted(ids))))
    out.sort(key=lambda f: f.normal)
    return out


def halfspaces(P: Polytope):
    """H-representation as a list of (normal, offset) with normal.x <= offset.

    Degenerate polytopes get the facet inequalities of their affine hull
    coordinates lifted back, plus an equality pair per missing dimension.
    """
    n = P.dim
    k = P.affine_dim
    if k == n:
        return [(f.normal, f.offset) for f in facets(P)]
    x0, basis, null = _affine_basis(P.vertex_array)
    out = []
    for q in null.T:
        d = float(q @ x0)
        out.append((tuple(q), d))
        out.append((tuple(-q), -d))
    if k > 0:
        coords = convex_hull((P.vertex_array - x0) @ basis)
        for m, d in halfspaces(coords):
            lifted = basis @ np.asarray(m)
            out.append((tuple(lifted), d + float(lifted @ x0)))
    return out


# ---------------------------------------------------------------------------
# volume, triangulation and moment integrals


def _triangulation(P: Polytope):
    """Fan triangulation of a full-dimensional polytope from its vertex
    centroid over the qhull facet simplices."""
    n = P.dim
    V = P.vertex_array
    c = P.vertex_centroid
    if n == 1:
        return [np.array([[V[:, 0].min()], [V[:, 0].max()]])]
    hull = ConvexHull(V)
    return [np.vstack([c, V[s]]) for s in hull.simplices]


def _simplex_volume(pts):
    edges = pts[1:] - pts[0]
    return abs(np.linalg.det(edges)) / math.factorial(len(pts) - 1)


def volume(P: Polytope) -> float:
    """n-dimensional volume; zero for degenerate polytopes."""
    if P.affine_dim < P.dim:
        return 0.0
    return float(sum(_simplex_volume(s) for s in _triangulation(P)))


def relative_volume(P: Polytope) -> float:
    """Volume of P inside its own affine hull."""
    k = P.affine_dim
    if k == 0:
        return 0.0
    x0, basis, _ = _affine_basis(P.vertex_array)
    return volume(convex_hull((P.vertex_array - x0) @ basis))


def moment_vector(P: Polytope):
    """Integral of x over P, via the fan triangulation."""
    if P.affine_dim != P.dim:
        raise GeometryError("moment operators need a full-dimensional body")
    total = np.zeros(P.dim)
    for s in _triangulation(P):
        total += _simplex_volume(s) * s.mean(axis=0)
    return total


def _clip_simplex(pts, z, sign):
    """Vertices of {x in simplex : sign * z.x >= 0}: kept corners plus
    edge crossings with the hyperplane z.x = 0."""
    f = sign * (pts @ z)
    keep = [p for p, v in zip(pts, f) if v >= -1e-13]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if (f[i] > 1e-13 and f[j] < -1e-13) or (f[i] < -1e-13 and f[j] > 1e-13):
                lam = f[i] / (f[i] - f[j])
                keep.append(pts[i] + lam * (pts[j] - pts[i]))
    return np.array(keep) if keep else None


def _integral_linear(points, z):
    """Integral of z.x over conv(points); exact via triangulation."""
    try:
        Q = convex_hull(points)
    except GeometryError:
        return 0.0
    if Q.affine_dim < Q.dim:
        return 0.0
    return float(sum(_simplex_volume(s) * (s.mean(axis=0) @ z)
                     for s in _triangulation(Q)))


def moment_body(P: Polytope, directions) -> "SupportBody":
    """Moment body of P sampled on the given directions.

    Not polytopal in general, so it is exposed through its support values.
    """
    dirs = tuple(tuple(map(float, z)) for z in directions)
    return SupportBody(dirs, tuple(moment_body_support(P, np.asarray(z))
                                   for z in dirs), provenance="moment-body")


def moment_body_support(P: Polytope, z) -> float:
    """h(M P, z) = integral of |x.z| over P.

    Each triangulation simplex is split by the hyperplane x.z = 0 and the
    two signed first moments are summed exactly.
    """
    if P.affine_dim != P.dim:
        raise GeometryError("moment operators need a full-dimensional body")
    z = np.asarray(z, dtype=float)
    total = 0.0
    for s in _triangulation(P):
        f = s @ z
        if np.all(f >= -1e-13):
            total += _simplex_volume(s) * f.mean()
        elif np.all(f <= 1e-13):
            total -= _simplex_volume(s) * f.mean()
        else:
            pos = _clip_simplex(s, z, 1.0)
            neg = _clip_simplex(s, z, -1.0)
            if pos is not None:
                total += _integral_linear(pos, z)
            if neg is not None:
                total -= _integral_linear(neg, z)
    return total


# ---------------------------------------------------------------------------
# spherical measures


@dataclass(frozen=True)
class DiscreteSphericalMeasure:
    """Finite atomic measure on the unit sphere: (direction, weight) pairs.

    Atoms are unit-normalized, merged within an angular tolerance and kept
    lexicographically sorted, so equal measures serialize identically.
    """

    atoms: tuple

    @classmethod
    def from_atoms(cls, atoms):
        atoms = list(atoms)
        if not atoms:
            return cls(())
        dirs, weights = [], []
        for d, w in atoms:
            d = np.asarray(d, dtype=float)
            norm = np.linalg.norm(d)
            if norm <= UNIT_TOL:
                raise GeometryError("zero direction in measure atom")
            if w < -1e-12:
                raise GeometryError("negative atom weight")
            dirs.append(d / norm + 0.0)  # +0.0 clears negative zeros
            weights.append(max(float(w), 0.0))
        dirs = np.array(dirs)
        weights = np.array(weights)
        order = np.lexsort(dirs.T[::-1])
        dirs, weights = dirs[order], weights[order]
        out = []
        for d, w in zip(dirs, weights):
            if out and np.max(np.abs(out[-1][0] - d)) <= ATOM_MERGE_TOL:
                out[-1][1] += w
            else:
                out.append([d.copy(), w])
        atoms = tuple((tuple(d), float(w)) for d, w in out if w > 1e-15)
        return cls(atoms)

    @cached_property
    def direction_array(self):
        return np.array([a[0] for a in self.atoms], dtype=float)

    @cached_property
    def weight_array(self):
        return np.array([a[1] for a in self.atoms], dtype=float)

    @property
    def total_mass(self):
        return float(self.weight_array.sum()) if self.atoms else 0.0

    def centroid_defect(self):
        """Norm of the first moment; zero for closed (surface-area) measures."""
        if not self.atoms:
            return 0.0
        return float(np.linalg.norm(self.weight_array @ self.direction_array))

    def reflected(self):
        return DiscreteSphericalMeasure.from_atoms(
            [(-np.asarray(d), w) for d, w in self.atoms])

    def scaled(self, c):
        return DiscreteSphericalMeasure.from_atoms(
            [(d, c * w) for d, w in self.atoms])

    def plus(self, other):
        return DiscreteSphericalMeasure.from_atoms(self.atoms + other.atoms)

    def is_even(self, tol=1e-12):
        other = self.reflected()
        if len(other.atoms) != len(self.atoms):
            return False
        return all(np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol
                   and abs(wa - wb) <= tol
                   for (a, wa), (b, wb) in zip(self.atoms, other.atoms))


def cosine_transform(Y: DiscreteSphericalMeasure, z) -> float:
    """Integral of |y.z| dY(y); sublinear and 1-homogeneous in z."""
    if not Y.atoms:
        return 0.0
    z = np.asarray(z, dtype=float)
    return float(np.abs(Y.direction_array @ z) @ Y.weight_array)


def surface_area_measure(P: Polytope) -> DiscreteSphericalMeasure:
    """Surface area measure of P: one atom (outer normal, facet area) per
    facet.  A polytope of affine dimension n-1 with unit normal w gets the
    two-sided convention {(w, V), (-w, V)} with V its relative volume;
    anything flatter is rejected.
    """
    n = P.dim
    k = P.affine_dim
    if k < n - 1:
        raise GeometryError("measure not defined below dimension n-1")
    if k == n:
        return DiscreteSphericalMeasure.from_atoms(
            [(f.normal, f.area) for f in facets(P)])
    _, _, null = _affine_basis(P.vertex_array)
    w = null[:, 0]
    vol = relative_volume(P)
    return DiscreteSphericalMeasure.from_atoms([(w, vol), (-w, vol)])


# ---------------------------------------------------------------------------
# derived bodies


def projection_body(P: Polytope) -> Polytope:
    """Zonotope sum of the segments [-w n / 2, +w n / 2] over the surface
    area measure atoms; its support function is half the cosine transform."""
    sam = surface_area_measure(P)
    n = P.dim
    pts = np.zeros((1, n))
    for d, w in sam.atoms:
        g = 0.5 * w * np.asarray(d)
        pts = np.vstack([pts + g, pts - g])
        if len(pts) > 128:
            pts = convex_hull(pts).vertex_array
    return convex_hull(pts)


def difference_body(P: Polytope) -> Polytope:
    return minkowski_sum(P, reflect(P))


def subspace_projection(P: Polytope, basis) -> Polytope:
    """Orthogonal projection onto span(basis), in basis coordinates."""
    B = np.asarray(basis, dtype=float)
    if B.ndim != 2 or B.shape[1] != P.dim:
        raise GeometryError("basis shape mismatch")
    if np.max(np.abs(B @ B.T - np.eye(len(B)))) > 1e-9:
        raise GeometryError("basis not orthonormal")
    return convex_hull(P.vertex_array @ B.T)


def orthonormal_complement(z):
    """Orthonormal basis of the hyperplane orthogonal to z."""
    z = np.asarray(z, dtype=float)
    norm = np.linalg.norm(z)
    if norm <= UNIT_TOL:
        raise GeometryError("zero direction")
    _, _, vt = np.linalg.svd(z.reshape(1, -1) / norm)
    return vt[1:]


@dataclass(frozen=True)
class SupportBody:
    """Support-function values sampled over a fixed direction set.

    Carries bodies that are only numerically defined (zonoid-like limits);
    sublinearity is certified a posteriori on the sampled sums that land
    back in the direction set.
    """

    directions: tuple
    values: tuple
    provenance: str = ""

    @cached_property
    def direction_array(self):
        return np.array(self.directions, dtype=float)

    @cached_property
    def value_array(self):
        return np.array(self.values, dtype=float)

    @property
    def dim(self):
        return len(self.directions[0])

    @cached_property
    def _tree(self):
        return cKDTree(self.direction_array)

    def value_at(self, z, tol=1e-9):
        """Value at a sampled direction (z is normalized first)."""
        z = np.asarray(z, dtype=float)
        norm = np.linalg.norm(z)
        if norm <= UNIT_TOL:
            return 0.0
        dist, idx = self._tree.query(z / norm)
        if dist > tol:
            raise KeyError("direction not sampled")
        return norm * float(self.value_array[idx])

    def sublinearity_defect(self):
        """Max of h(zi+zj) - h(zi) - h(zj) over sampled pairs whose
        normalized sum is itself in the direction set."""
        dirs = self.direction_array
        vals = self.value_array
        worst = 0.0
        for i in range(len(dirs)):
            sums = dirs[i] + dirs[i + 1:]
            norms = np.linalg.norm(sums, axis=1)
            ok = norms > 1e-9
            if not np.any(ok):
                continue
            dist, idx = self._tree.query(sums[ok] / norms[ok][:, None])
            hit = dist <= 1e-9
            if not np.any(hit):
                continue
            lhs = norms[ok][hit] * vals[idx[hit]]
            rhs = vals[i] + vals[i + 1:][ok][hit]
            worst = max(worst, float(np.max(lhs - rhs)))
        return worst

    def min_value(self):
        return float(self.value_array.min())

    def scaled(self, c):
        return SupportBody(self.directions, tuple(c * v for v in self.values),
                           self.provenance)


# ---------------------------------------------------------------------------
# metric helpers


def contains_point(P: Polytope, x, tol=FEAS_TOL):
    """Membership test via the H-representation of P (any affine dim)."""
    x = np.asarray(x, dtype=float)
    return all(np.asarray(c) @ x <= d + tol for c, d in halfspaces(P))


def point_distance(P: Polytope, x) -> float:
    """Euclidean distance from x to P (0 when inside)."""
    x = np.asarray(x, dtype=float)
    V = P.vertex_array
    best = np.min(np.linalg.norm(V - x, axis=1))
    if best <= 1e-12 or contains_point(P, x, tol=1e-12):
        return 0.0
    if len(V) == 1:
        return float(best)
    m = len(V)

    def objective(lam):
        r = lam @ V - x
        return 0.5 * float(r @ r), V @ r

    res = minimize(objective, np.full(m, 1.0 / m), jac=True, method="SLSQP",
                   bounds=[(0.0, 1.0)] * m,
                   constraints=[{"type": "eq", "fun": lambda l: l.sum() - 1.0,
                                 "jac": lambda l: np.ones(m)}],
                   options={"maxiter": 200, "ftol": 1e-14})
    return float(min(best, np.linalg.norm(res.x @ V - x)))


def hausdorff_distance(P: Polytope, Q: Polytope) -> float:
    d1 = max(point_distance(Q, v) for v in P.vertex_array)
    d2 = max(point_distance(P, w) for w in Q.vertex_array)
    return max(d1, d2)


def feasible_point(halfspace_list, dim):
    """Chebyshev-style feasible point of an intersection of halfspaces,
    or None when the system is infeasible."""
    if not halfspace_list:
        return np.zeros(dim)
    A = np.array([np.asarray(c, dtype=float) for c, _ in halfspace_list])
    b = np.array([float(d) for _, d in halfspace_list])
    norms = np.linalg.norm(A, axis=1)
    ok = norms > 1e-12
    if np.any(~ok):
        if np.any(b[~ok] < -FEAS_TOL):
            return None
        A, b, norms = A[ok], b[ok], norms[ok]
        if len(A) == 0:
            return np.zeros(dim)
    # maximize r subject to a.x + |a| r <= b, r bounded to keep the LP finite
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    A_ub = np.hstack([A, norms[:, None]])
    b_ub = b
    bounds = [(None, None)] * dim + [(None, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success or res.x is None or res.x[-1] < -FEAS_TOL:
        return None
    return res.x[:-1]
