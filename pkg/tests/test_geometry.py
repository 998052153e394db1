import math

import numpy as np
import pytest

from funcbody import (
    DiscreteSphericalMeasure,
    GeometryError,
    UnimodularMap,
    convex_hull,
    cosine_transform,
    difference_body,
    hausdorff_distance,
    linear_image,
    minkowski_sum,
    moment_body_support,
    moment_vector,
    projection_body,
    reflect,
    subspace_projection,
    support,
    surface_area_measure,
    translate,
    volume,
)
from funcbody.geometry import (
    facets,
    halfspaces,
    orthonormal_complement,
    point_distance,
    random_special_linear,
    relative_volume,
)

from conftest import random_polytope, random_unit_vectors, stretched_simplex

E1, E2, E3 = np.eye(3)


class TestConvexHull:
    def test_midpoint_removed(self):
        P = convex_hull([[0, 0, 0], [1, 0, 0], [0.5, 0, 0]])
        assert np.allclose(P.vertex_array, [[0, 0, 0], [1, 0, 0]])

    def test_interior_point_removed(self, unit_cube):
        pts = list(unit_cube.vertices) + [(0.5, 0.5, 0.5)]
        assert convex_hull(pts) == unit_cube

    def test_simplex_is_own_hull(self, simplex3):
        assert convex_hull(simplex3.vertices) == simplex3

    def test_empty_input(self):
        with pytest.raises(GeometryError, match="empty point set"):
            convex_hull([])

    def test_canonical_order_independent(self, rng=np.random.default_rng(0)):
        pts = rng.uniform(-1, 1, size=(12, 3))
        P = convex_hull(pts)
        Q = convex_hull(pts[rng.permutation(12)])
        assert P == Q


class TestSupport:
    @pytest.mark.parametrize("s", [1.0, 2.0, 3.0])
    def test_stretched_simplex(self, s):
        Ts = stretched_simplex(s)
        assert support(Ts, E1) == pytest.approx(s, abs=1e-12)
        assert support(Ts, -E1) == pytest.approx(0.0, abs=1e-12)

    def test_zero_direction(self, simplex3):
        assert support(simplex3, np.zeros(3)) == 0.0

    def test_dimension_mismatch(self, simplex3):
        with pytest.raises(GeometryError):
            support(simplex3, np.array([1.0, 0.0]))


class TestMinkowskiSum:
    def test_segments_make_square(self):
        A = convex_hull([[0, 0, 0], [1, 0, 0]])
        B = convex_hull([[0, 0, 0], [0, 1, 0]])
        S = minkowski_sum(A, B)
        assert np.allclose(S.vertex_array,
                           [[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 0]])

    def test_origin_is_identity(self, simplex3):
        assert minkowski_sum(simplex3, convex_hull([[0, 0, 0]])) == simplex3

    def test_difference_body_supports(self, simplex3):
        rng = np.random.default_rng(1)
        D = minkowski_sum(simplex3, reflect(simplex3))
        for z in random_unit_vectors(rng, 100):
            expected = support(simplex3, z) + support(simplex3, -z)
            assert support(D, z) == pytest.approx(expected, abs=1e-9)

    def test_support_additivity(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            P = random_polytope(rng)
            Q = random_polytope(rng)
            S = minkowski_sum(P, Q)
            for z in random_unit_vectors(rng, 40):
                lhs = support(S, z)
                rhs = support(P, z) + support(Q, z)
                assert abs(lhs - rhs) <= 1e-9


class TestLinearImages:
    def test_identity(self, simplex3):
        assert linear_image(simplex3, UnimodularMap.identity(3)) == simplex3

    def test_reflect_involution(self, lemma_P):
        assert reflect(reflect(lemma_P)) == lemma_P

    def test_diagonal_box(self, unit_cube):
        phi = UnimodularMap.from_array(np.diag([2.0, 0.5, 1.0]))
        box = linear_image(unit_cube, phi)
        assert support(box, E1) == pytest.approx(2.0)
        assert support(box, E2) == pytest.approx(0.5)
        assert support(box, E3) == pytest.approx(1.0)

    def test_singular_rejected(self):
        with pytest.raises(GeometryError):
            UnimodularMap.from_array(np.diag([1.0, 1.0, 0.0]))

    def test_special_linear_flag(self):
        with pytest.raises(GeometryError):
            UnimodularMap.from_array(np.diag([2.0, 1.0, 1.0]), special=True)

    def test_translation(self, simplex3):
        T = translate(simplex3, [1.0, -2.0, 0.25])
        assert np.allclose(T.vertex_array.min(axis=0), [1.0, -2.0, 0.25])


class TestSurfaceAreaMeasure:
    def test_unit_cube_atoms(self, unit_cube):
        sam = surface_area_measure(unit_cube)
        dirs = sorted(tuple(np.round(d, 9)) for d, _ in sam.atoms)
        expected = sorted(tuple(v) for v in np.vstack([np.eye(3), -np.eye(3)]))
        assert dirs == expected
        assert all(w == pytest.approx(1.0, abs=1e-12) for _, w in sam.atoms)

    def test_degenerate_triangle(self, lemma_Q):
        sam = surface_area_measure(lemma_Q)
        assert len(sam.atoms) == 2
        weights = sorted(w for _, w in sam.atoms)
        assert weights == pytest.approx([0.5, 0.5], abs=1e-12)
        dirs = np.array([d for d, _ in sam.atoms])
        assert np.allclose(np.abs(dirs), [[1, 0, 0], [1, 0, 0]], atol=1e-12)

    def test_too_flat_rejected(self):
        seg = convex_hull([[0, 0, 0], [1, 0, 0]])
        with pytest.raises(GeometryError, match="dimension n-1"):
            surface_area_measure(seg)

    def test_closure(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            sam = surface_area_measure(random_polytope(rng))
            assert sam.centroid_defect() <= 1e-9


class TestCosineTransform:
    def test_single_atom(self):
        Y = DiscreteSphericalMeasure.from_atoms([(E1, 1.0)])
        assert cosine_transform(Y, E1) == pytest.approx(1.0)

    def test_cube_measure(self, unit_cube):
        Y = surface_area_measure(unit_cube)
        assert cosine_transform(Y, E1) == pytest.approx(2.0, abs=1e-12)

    def test_zero_direction(self, unit_cube):
        Y = surface_area_measure(unit_cube)
        assert cosine_transform(Y, np.zeros(3)) == 0.0

    def test_homogeneous(self, simplex3):
        Y = surface_area_measure(simplex3)
        z = np.array([0.2, -0.5, 0.8])
        assert cosine_transform(Y, 3.0 * z) == pytest.approx(
            3.0 * cosine_transform(Y, z), abs=1e-12)


class TestProjectionBody:
    def test_anchor_values(self, lemma_P, lemma_Q):
        PiP = projection_body(lemma_P)
        PiQ = projection_body(lemma_Q)
        assert support(PiP, E1) == pytest.approx(0.5, abs=1e-9)
        assert support(PiP, E2) == pytest.approx(0.25, abs=1e-9)
        assert support(PiP, E1 + E2) == pytest.approx(0.5, abs=1e-9)
        assert support(PiQ, E1) == pytest.approx(0.5, abs=1e-9)
        assert support(PiQ, E2) == pytest.approx(0.0, abs=1e-9)
        assert support(PiQ, E1 + E2) == pytest.approx(0.5, abs=1e-9)

    def test_cube(self, unit_cube, sym_cube):
        assert hausdorff_distance(projection_body(unit_cube), sym_cube) <= 1e-9

    def test_matches_half_cosine(self):
        rng = np.random.default_rng(4)
        P = random_polytope(rng)
        Pi = projection_body(P)
        sam = surface_area_measure(P)
        for z in random_unit_vectors(rng, 50):
            assert support(Pi, z) == pytest.approx(
                0.5 * cosine_transform(sam, z), abs=1e-9)

    def test_origin_symmetric(self):
        rng = np.random.default_rng(5)
        P = random_polytope(rng)
        Pi = projection_body(P)
        for z in random_unit_vectors(rng, 20):
            assert support(Pi, z) == pytest.approx(support(Pi, -z), abs=1e-12)

    def test_translation_invariant(self, lemma_P):
        moved = translate(lemma_P, [3.0, -1.0, 2.0])
        assert hausdorff_distance(projection_body(lemma_P),
                                  projection_body(moved)) <= 1e-9

    def test_equivariance(self, simplex3):
        rng = np.random.default_rng(6)
        for _ in range(5):
            phi = random_special_linear(3, rng)
            lhs = projection_body(linear_image(simplex3, phi))
            rhs = linear_image(projection_body(simplex3),
                               UnimodularMap.from_array(phi.inverse_transpose))
            for z in random_unit_vectors(rng, 25):
                assert support(lhs, z) == pytest.approx(support(rhs, z),
                                                        abs=1e-9)

    def test_projection_interpretation(self):
        rng = np.random.default_rng(7)
        P = random_polytope(rng)
        Pi = projection_body(P)
        for z in random_unit_vectors(rng, 25):
            shadow = subspace_projection(P, orthonormal_complement(z))
            assert support(Pi, z) == pytest.approx(volume(shadow), abs=1e-9)


class TestMomentOperators:
    @pytest.mark.parametrize("s", [1.0, 2.0, 3.0])
    def test_stretched_simplex_values(self, s):
        Ts = stretched_simplex(s)
        expected = s * s / 24.0
        assert moment_vector(Ts)[0] == pytest.approx(expected, abs=1e-12)
        assert moment_body_support(Ts, E1) == pytest.approx(expected, abs=1e-12)

    def test_cube_moment_vector(self, unit_cube):
        assert np.allclose(moment_vector(unit_cube), [0.5, 0.5, 0.5],
                           atol=1e-12)

    def test_difference_body_simplex(self, simplex3):
        assert support(difference_body(simplex3), E1) == pytest.approx(1.0)

    def test_halfspace_consistency(self):
        # when P sits in {x.z >= 0} the moment body support equals m(P).z
        rng = np.random.default_rng(8)
        P = translate(random_polytope(rng, scale=0.5), [2.0, 0.0, 0.0])
        m = moment_vector(P)
        assert moment_body_support(P, E1) == pytest.approx(m @ E1, abs=1e-12)

    def test_degenerate_rejected(self, lemma_Q):
        with pytest.raises(GeometryError):
            moment_vector(lemma_Q)
        with pytest.raises(GeometryError):
            moment_body_support(lemma_Q, E1)

    def test_volume(self, unit_cube, simplex3):
        assert volume(unit_cube) == pytest.approx(1.0, abs=1e-12)
        assert volume(simplex3) == pytest.approx(1.0 / 6.0, abs=1e-12)

    def test_moment_body_random_oracle(self):
        # Monte Carlo cross-check of the simplex-splitting integral
        rng = np.random.default_rng(9)
        P = random_polytope(rng, npts=6)
        z = np.array([0.3, -1.1, 0.7])
        lo = P.vertex_array.min(axis=0)
        hi = P.vertex_array.max(axis=0)
        samples = rng.uniform(lo, hi, size=(200_000, 3))
        from funcbody.geometry import contains_point
        inside = np.array([contains_point(P, x) for x in samples[:20_000]])
        box_vol = np.prod(hi - lo)
        vals = np.abs(samples[:20_000] @ z) * inside
        mc = vals.mean() * box_vol
        exact = moment_body_support(P, z)
        assert exact == pytest.approx(mc, rel=0.05)


class TestSubspaceProjection:
    def test_cube_shadow(self, unit_cube):
        shadow = subspace_projection(unit_cube, np.eye(3)[:2])
        assert shadow.dim == 2
        assert volume(shadow) == pytest.approx(1.0, abs=1e-12)

    def test_not_orthonormal(self, unit_cube):
        with pytest.raises(GeometryError):
            subspace_projection(unit_cube, [[1.0, 1.0, 0.0]])


class TestFourDimensions:
    def test_hypercube_sam(self):
        cube4 = convex_hull([[a, b, c, d] for a in (0., 1.) for b in (0., 1.)
                             for c in (0., 1.) for d in (0., 1.)])
        sam = surface_area_measure(cube4)
        assert len(sam.atoms) == 8
        assert sam.total_mass == pytest.approx(8.0, abs=1e-9)
        assert volume(cube4) == pytest.approx(1.0, abs=1e-12)

    def test_simplex_projection_body_symmetry(self):
        T4 = convex_hull(np.vstack([np.zeros(4), np.eye(4)]))
        Pi = projection_body(T4)
        rng = np.random.default_rng(10)
        for z in random_unit_vectors(rng, 10, dim=4):
            assert support(Pi, z) == pytest.approx(support(Pi, -z), abs=1e-12)


# ---------------------------------------------------------------------------
# the planar brute-force oracle


def polygon_ccw_vertices(P):
    V = P.vertex_array
    c = V.mean(axis=0)
    order = np.argsort(np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0]))
    return V[order]


def polygon_edge_atoms(P):
    """(outward unit normal, edge length) pairs by direct edge enumeration."""
    V = polygon_ccw_vertices(P)
    atoms = []
    for p, q in zip(V, np.roll(V, -1, axis=0)):
        e = q - p
        length = np.linalg.norm(e)
        atoms.append(((e[1] / length, -e[0] / length), length))
    return atoms


class TestPlanarOracle:
    def test_sam_pi_d_against_edge_formulas(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            P = random_polytope(rng, dim=2, npts=7)
            atoms = polygon_edge_atoms(P)
            oracle = DiscreteSphericalMeasure.from_atoms(atoms)
            sam = surface_area_measure(P)
            assert len(sam.atoms) == len(oracle.atoms)
            assert np.allclose(np.array([d for d, _ in sam.atoms]),
                               np.array([d for d, _ in oracle.atoms]),
                               atol=1e-10)
            assert np.allclose(sam.weight_array, oracle.weight_array,
                               atol=1e-10)
            Pi = projection_body(P)
            D = difference_body(P)
            for z in random_unit_vectors(rng, 10, dim=2):
                h_pi = 0.5 * sum(w * abs(np.asarray(d) @ z) for d, w in atoms)
                assert support(Pi, z) == pytest.approx(h_pi, abs=1e-10)
                h_d = support(P, z) + support(P, -z)
                assert support(D, z) == pytest.approx(h_d, abs=1e-10)


class TestMetric:
    def test_point_distance_inside_and_out(self, unit_cube):
        assert point_distance(unit_cube, [0.5, 0.5, 0.5]) == 0.0
        assert point_distance(unit_cube, [2.0, 0.5, 0.5]) == pytest.approx(
            1.0, abs=1e-7)

    def test_hausdorff_scaled_cubes(self, sym_cube):
        half = convex_hull(0.5 * sym_cube.vertex_array)
        assert hausdorff_distance(sym_cube, half) == pytest.approx(
            0.5 * math.sqrt(3.0), abs=1e-7)


class TestStructure:
    def test_facet_offsets_match_support(self, lemma_P):
        for f in facets(lemma_P):
            assert f.offset == pytest.approx(
                support(lemma_P, np.asarray(f.normal)), abs=1e-12)

    def test_halfspaces_degenerate(self, lemma_Q):
        hs = halfspaces(lemma_Q)
        # two equality halfspaces pin the plane, the rest cut the triangle
        for v in lemma_Q.vertex_array:
            assert all(np.asarray(c) @ v <= d + 1e-12 for c, d in hs)

    def test_relative_volume(self, lemma_Q):
        assert relative_volume(lemma_Q) == pytest.approx(0.5, abs=1e-12)
