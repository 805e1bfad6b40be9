import numpy as np
import pytest

from ams3d import MatcherConfig, Surface


@pytest.fixture
def tetrahedron():
    """Smallest valid closed mesh."""
    vertices = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.5, 1.0, 0.0],
        [0.5, 0.5, 1.0],
    ]
    triangles = [[0, 1, 2], [0, 1, 3], [1, 2, 3], [0, 2, 3]]
    return Surface(vertices, triangles, {"NoseTip": 0})


def make_grid_surface(n: int, spacing: float = 1.0) -> Surface:
    """Planar n x n grid mesh, quads split along one diagonal."""
    vertices = [[i * spacing, j * spacing, 0.0] for i in range(n) for j in range(n)]
    triangles = []
    for i in range(n - 1):
        for j in range(n - 1):
            v00 = i * n + j
            v01 = i * n + j + 1
            v10 = (i + 1) * n + j
            v11 = (i + 1) * n + j + 1
            triangles.append([v00, v10, v11])
            triangles.append([v00, v11, v01])
    return Surface(vertices, triangles)


@pytest.fixture
def grid5():
    return make_grid_surface(5)


def make_icosahedron() -> Surface:
    """Regular icosahedron, edge length 2."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    vertices = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    triangles = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return Surface(vertices, triangles, {"NoseTip": 0})


def path_metric_surface() -> Surface:
    """Legal triangle mesh realizing the path metric on 3 collinear vertices.

    Vertices 0, 1, 2 sit on a unit-spaced line; a distant helper vertex 3
    provides triangles without offering any shortcut.
    """
    vertices = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [2.0, 0.0, 0.0],
        [1.0, 10.0, 0.0],
    ]
    triangles = [[0, 1, 3], [1, 2, 3]]
    return Surface(vertices, triangles)


def floyd_warshall_oracle(surface: Surface) -> np.ndarray:
    """Independent all-pairs shortest paths on the mesh edge graph."""
    n = surface.n_vertices
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for a, b in surface.edges:
        w = float(np.linalg.norm(surface.vertices[a] - surface.vertices[b]))
        dist[a, b] = min(dist[a, b], w)
        dist[b, a] = min(dist[b, a], w)
    for k in range(n):
        for i in range(n):
            dist[i] = np.minimum(dist[i], dist[i, k] + dist[k])
    return dist


@pytest.fixture
def fast_cfg():
    """Default matcher settings; the crop keeps synth scans under the sample cap."""
    return MatcherConfig()
