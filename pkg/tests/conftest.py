import numpy as np
import pytest

from funcbody import QuadratureConfig, WeightFunction, convex_hull


@pytest.fixture(scope="session")
def tent():
    return WeightFunction((0.0, 1.0), (1.0, 0.0))


@pytest.fixture(scope="session")
def cfg():
    return QuadratureConfig()


@pytest.fixture(scope="session")
def simplex3():
    return convex_hull([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])


@pytest.fixture(scope="session")
def unit_cube():
    return convex_hull([[i, j, k] for i in (0.0, 1.0)
                        for j in (0.0, 1.0) for k in (0.0, 1.0)])


@pytest.fixture(scope="session")
def sym_cube():
    return convex_hull([[2 * i - 1, 2 * j - 1, 2 * k - 1]
                        for i in (0, 1) for j in (0, 1) for k in (0, 1)])


@pytest.fixture(scope="session")
def cross_polytope():
    eye = np.eye(3)
    return convex_hull(np.vstack([eye, -eye]))


@pytest.fixture(scope="session")
def lemma_P():
    # tetrahedron with the halved diagonal vertex; its projection body has
    # the anchor support values used throughout the suite
    return convex_hull([[0, 0, 0], [0.5, 0.5, 0], [0, 1, 0], [0, 0, 1]])


@pytest.fixture(scope="session")
def lemma_Q():
    return convex_hull([[0, 0, 0], [0, 1, 0], [0, 0, 1]])


def stretched_simplex(s, dim=3):
    verts = [np.zeros(dim)]
    e1 = np.zeros(dim)
    e1[0] = s
    verts.append(e1)
    verts.extend(np.eye(dim)[i] for i in range(1, dim))
    return convex_hull(verts)


def random_polytope(rng, dim=3, npts=8, scale=1.0, contains_origin=False):
    pts = rng.uniform(-scale, scale, size=(npts, dim))
    if contains_origin:
        # the point centroid is a strict convex combination, hence interior
        pts = pts - pts.mean(axis=0)
    return convex_hull(pts)


def random_unit_vectors(rng, count, dim=3):
    raw = rng.normal(size=(count, dim))
    return raw / np.linalg.norm(raw, axis=1)[:, None]
