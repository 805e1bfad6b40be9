import numpy as np
import pytest

from ams3d import (
    NOSE_TIP,
    OffFormatError,
    Surface,
    SurfaceError,
    crop_geodesic,
    farthest_point_sample,
    format_off,
    geodesic_distances,
    load_surface,
    parse_off,
    save_surface,
)
from ams3d.synth import generate_identity

from conftest import floyd_warshall_oracle, make_grid_surface, make_icosahedron, path_metric_surface

TETRA_OFF = """OFF
4 4 0
0.0 0.0 0.0
1.0 0.0 0.0
0.5 1.0 0.0
0.5 0.5 1.0
3 0 1 2
3 0 1 3
3 1 2 3
3 0 2 3
#landmark NoseTip 0
"""


class TestSurfaceInvariants:
    def test_rejects_fewer_than_four_vertices(self):
        with pytest.raises(SurfaceError, match="at least 4"):
            Surface([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])

    def test_rejects_out_of_range_triangle(self):
        with pytest.raises(SurfaceError, match="out-of-range"):
            Surface(np.eye(4, 3), [[0, 1, 9]])

    def test_rejects_repeated_index_in_triangle(self):
        with pytest.raises(SurfaceError, match="repeats"):
            Surface(np.eye(4, 3), [[0, 1, 1], [0, 1, 2], [1, 2, 3], [0, 2, 3]])

    def test_rejects_disconnected_mesh(self):
        vertices = np.vstack([np.eye(4, 3), np.eye(4, 3) + 50.0])
        triangles = [[0, 1, 2], [0, 1, 3], [4, 5, 6], [4, 5, 7]]
        with pytest.raises(SurfaceError, match="disconnected"):
            Surface(vertices, triangles)

    def test_rejects_zero_length_edge(self):
        vertices = [[0, 0, 0], [0, 0, 0], [1, 0, 0], [0, 1, 0]]
        with pytest.raises(SurfaceError, match="zero-length"):
            Surface(vertices, [[0, 1, 2], [1, 2, 3], [0, 2, 3], [0, 1, 3]])

    def test_rejects_unknown_landmark(self):
        with pytest.raises(SurfaceError, match="unknown landmark"):
            Surface(np.eye(4, 3), [[0, 1, 2], [1, 2, 3]], {"Forehead": 0})

    def test_vertices_immutable(self, tetrahedron):
        with pytest.raises(ValueError):
            tetrahedron.vertices[0, 0] = 99.0


class TestOffIO:
    def test_parse_tetrahedron(self):
        s = parse_off(TETRA_OFF)
        assert s.n_vertices == 4
        assert len(s.triangles) == 4
        assert s.landmarks == {NOSE_TIP: 0}

    def test_out_of_range_index_reports_line(self):
        bad = TETRA_OFF.replace("3 0 2 3", "3 0 2 9")
        with pytest.raises(OffFormatError, match="line 10.*out of range"):
            parse_off(bad)

    def test_missing_header(self):
        with pytest.raises(OffFormatError, match="expected 'OFF'"):
            parse_off("NOFF\n4 4 0\n")

    def test_bad_counts_line(self):
        with pytest.raises(OffFormatError, match="counts"):
            parse_off("OFF\nx y\n")

    def test_non_triangle_face_rejected(self):
        bad = TETRA_OFF.replace("3 0 1 2", "4 0 1 2 3")
        with pytest.raises(OffFormatError, match="triangular"):
            parse_off(bad)

    def test_bad_landmark_name(self):
        bad = TETRA_OFF.replace("#landmark NoseTip 0", "#landmark nosetip 0")
        with pytest.raises(OffFormatError, match="unknown landmark"):
            parse_off(bad)

    def test_synth_round_trip_exact(self, tmp_path):
        surface = generate_identity(314)
        path = tmp_path / "scan.off"
        save_surface(surface, path)
        loaded = load_surface(path)
        assert np.array_equal(loaded.vertices, surface.vertices)
        assert np.array_equal(loaded.triangles, surface.triangles)
        assert loaded.landmarks == surface.landmarks

    def test_format_then_parse_is_identity(self, tetrahedron):
        again = parse_off(format_off(tetrahedron))
        assert again == tetrahedron


class TestGeodesics:
    def test_path_metric(self):
        s = path_metric_surface()
        dist = geodesic_distances(s, 0)
        assert dist[0] == 0.0
        assert dist[1] == 1.0
        assert dist[2] == 2.0

    def test_source_distance_zero(self, grid5):
        assert geodesic_distances(grid5, 7)[7] == 0.0

    def test_invalid_source(self, grid5):
        with pytest.raises(SurfaceError, match="out of range"):
            geodesic_distances(grid5, 99)

    def test_grid_matches_floyd_warshall(self, grid5):
        oracle = floyd_warshall_oracle(grid5)
        for source in range(grid5.n_vertices):
            got = geodesic_distances(grid5, source)
            assert np.max(np.abs(got - oracle[source])) < 1e-12

    def test_symmetry_and_triangle_inequality(self, grid5):
        oracle = floyd_warshall_oracle(grid5)
        n = grid5.n_vertices
        dist = np.vstack([geodesic_distances(grid5, s) for s in range(n)])
        assert np.max(np.abs(dist - dist.T)) < 1e-12
        for k in range(n):
            assert np.all(dist <= dist[:, [k]] + dist[[k], :] + 1e-9)
        assert np.max(np.abs(dist - oracle)) < 1e-12


class TestCropGeodesic:
    def test_radius_covering_everything_is_identity(self, tetrahedron):
        out = crop_geodesic(tetrahedron, NOSE_TIP, radius=100.0)
        assert out == tetrahedron

    def test_icosahedron_one_ring(self):
        ico = make_icosahedron()
        edge = 2.0
        out = crop_geodesic(ico, NOSE_TIP, radius=1.1 * edge)
        # Hand Dijkstra: neighbors of vertex 0 sit at exactly one edge length,
        # everything else at two or more.
        neighbor_ids = {11, 5, 1, 7, 10}
        kept_originals = {
            tuple(np.round(v, 9)) for v in out.vertices
        }
        expected = {
            tuple(np.round(ico.vertices[i], 9)) for i in neighbor_ids | {0}
        }
        assert out.n_vertices == 6
        assert kept_originals == expected
        assert len(out.triangles) == 5
        assert out.landmarks[NOSE_TIP] < 6

    def test_too_small_radius_errors(self, tetrahedron):
        with pytest.raises(SurfaceError):
            crop_geodesic(tetrahedron, NOSE_TIP, radius=1e-6)

    def test_missing_landmark(self, grid5):
        with pytest.raises(SurfaceError, match="not present"):
            crop_geodesic(grid5, NOSE_TIP, radius=1.0)

    def test_idempotent(self):
        surface = generate_identity(11)
        once = crop_geodesic(surface, NOSE_TIP, 80.0)
        twice = crop_geodesic(once, NOSE_TIP, 80.0)
        assert twice == once

    def test_landmarks_remapped(self):
        surface = generate_identity(12)
        out = crop_geodesic(surface, NOSE_TIP, 80.0)
        for name, idx in out.landmarks.items():
            assert np.allclose(
                out.vertices[idx], surface.vertices[surface.landmarks[name]]
            )


class TestFarthestPointSample:
    def test_count_equals_vertex_count(self, tetrahedron):
        got = farthest_point_sample(tetrahedron, 4, seed_vertex=2)
        assert sorted(got) == [0, 1, 2, 3]
        assert got[0] == 2

    def test_count_one(self, grid5):
        assert farthest_point_sample(grid5, 1, seed_vertex=6) == [6]

    def test_count_out_of_range(self, grid5):
        with pytest.raises(SurfaceError, match="out of range"):
            farthest_point_sample(grid5, 26, seed_vertex=0)

    def test_grid_corners_and_greedy_oracle(self, grid5):
        # Independent greedy max-min simulation on Floyd-Warshall distances.
        oracle_dist = floyd_warshall_oracle(grid5)
        chosen = [0]
        min_dist = oracle_dist[0].copy()
        for _ in range(3):
            nxt = int(np.argmax(min_dist))
            chosen.append(nxt)
            min_dist = np.minimum(min_dist, oracle_dist[nxt])
        got = farthest_point_sample(grid5, 4, seed_vertex=0)
        assert got == chosen
        corners = {0, 4, 20, 24}
        assert set(got) == corners

    def test_prefix_property(self, grid5):
        for k in range(1, 12):
            shorter = farthest_point_sample(grid5, k, seed_vertex=3)
            longer = farthest_point_sample(grid5, k + 1, seed_vertex=3)
            assert longer[:k] == shorter
