import json

import numpy as np
import pytest

from ams3d import (
    MatcherConfig,
    apply_expression,
    apply_rigid,
    canonicalize,
    generate_identity,
    identity_params,
    moment_distance,
    moment_vector,
    run_benchmark,
)
from ams3d.surface import LANDMARK_NAMES


def edge_lengths(surface):
    e = surface.edges
    return np.linalg.norm(surface.vertices[e[:, 0]] - surface.vertices[e[:, 1]], axis=1)


def signature(surface, cfg):
    return moment_vector(canonicalize(surface, cfg), cfg.degree)


class TestGenerateIdentity:
    def test_deterministic(self):
        a = generate_identity(123)
        b = generate_identity(123)
        assert np.array_equal(a.vertices, b.vertices)
        assert np.array_equal(a.triangles, b.triangles)
        assert a.landmarks == b.landmarks

    def test_params_deterministic(self):
        assert identity_params(9) == identity_params(9)

    def test_default_grid_dimensions(self):
        s = generate_identity(1)
        assert s.n_vertices == 400
        assert len(s.triangles) == 2 * 19 * 19

    def test_all_landmarks_present(self):
        s = generate_identity(2)
        assert set(s.landmarks) == set(LANDMARK_NAMES)

    def test_different_seeds_differ(self, fast_cfg):
        a = signature(generate_identity(100), fast_cfg)
        b = signature(generate_identity(101), fast_cfg)
        assert moment_distance(a, b) > 0

    def test_jitter_is_seeded_and_bounded(self):
        base = generate_identity(3)
        j1 = generate_identity(3, jitter_mm=0.5)
        j2 = generate_identity(3, jitter_mm=0.5)
        assert np.array_equal(j1.vertices, j2.vertices)
        assert np.max(np.abs(j1.vertices - base.vertices)) <= 0.5


class TestApplyExpression:
    def test_magnitude_zero_is_identity(self):
        s = generate_identity(4)
        assert apply_expression(s, 0.0, seed=1) is s

    def test_magnitude_out_of_range(self):
        s = generate_identity(4)
        with pytest.raises(ValueError, match="magnitude"):
            apply_expression(s, 1.5, seed=1)

    def test_near_isometry_audit(self):
        s = generate_identity(5)
        base = edge_lengths(s)
        worst = 0.0
        for seed in range(8):
            bent = apply_expression(s, 1.0, seed=seed)
            drift = np.abs(edge_lengths(bent) - base) / base
            worst = max(worst, float(drift.mean()))
            assert np.max(np.abs(bent.vertices - s.vertices)) > 0
        assert worst <= 0.02

    def test_signature_drift_below_inter_class(self, fast_cfg):
        s = generate_identity(6)
        sig = signature(s, fast_cfg)
        bent_sig = signature(apply_expression(s, 0.5, seed=3), fast_cfg)
        other = signature(generate_identity(7), fast_cfg)
        assert moment_distance(sig, bent_sig) < moment_distance(sig, other)

    def test_commutes_with_rigid_motion(self):
        s = generate_identity(8)
        rotvec, shift = [0.4, -0.2, 0.7], [12.0, -5.0, 30.0]
        a = apply_rigid(apply_expression(s, 0.7, seed=2), rotvec, shift)
        b = apply_expression(apply_rigid(s, rotvec, shift), 0.7, seed=2)
        assert np.max(np.abs(a.vertices - b.vertices)) < 1e-9


class TestApplyRigid:
    def test_identity_transform(self):
        s = generate_identity(9)
        out = apply_rigid(s, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
        assert np.allclose(out.vertices, s.vertices)

    def test_pairwise_distances_preserved(self):
        s = generate_identity(10)
        out = apply_rigid(s, [1.0, -0.3, 0.2], [5.0, 6.0, -7.0])
        rng = np.random.default_rng(0)
        idx = rng.integers(0, s.n_vertices, size=(200, 2))
        before = np.linalg.norm(s.vertices[idx[:, 0]] - s.vertices[idx[:, 1]], axis=1)
        after = np.linalg.norm(out.vertices[idx[:, 0]] - out.vertices[idx[:, 1]], axis=1)
        keep = before > 0
        assert np.max(np.abs(after[keep] - before[keep]) / before[keep]) < 1e-10

    def test_signature_invariance(self, fast_cfg):
        s = generate_identity(11)
        sig = signature(s, fast_cfg)
        moved_sig = signature(apply_rigid(s, [0.2, 0.2, -0.5], [40.0, -10.0, 25.0]), fast_cfg)
        rel = np.linalg.norm(moved_sig.values - sig.values) / np.linalg.norm(sig.values)
        assert rel <= 1e-6


class TestRunBenchmark:
    def test_probe_counting(self, fast_cfg):
        report = run_benchmark(2, 2, fast_cfg, seed=0)
        assert len(report.probe_labels) == 2
        assert report.distances.shape == (2, 2)
        assert report.intra_stats["count"] == 2
        assert report.inter_stats["count"] == 2

    def test_enrolled_probes_give_perfect_rank1(self, fast_cfg):
        report = run_benchmark(3, 1, fast_cfg, seed=1, rigid=False)
        assert report.rank1_accuracy == 1.0
        assert report.intra_stats["max"] == 0.0

    def test_deterministic_given_seed(self, fast_cfg):
        a = run_benchmark(2, 2, fast_cfg, seed=5)
        b = run_benchmark(2, 2, fast_cfg, seed=5)
        assert np.array_equal(a.distances, b.distances)

    def test_report_serialization(self, fast_cfg, tmp_path):
        report = run_benchmark(2, 2, fast_cfg, seed=2)
        json_path = tmp_path / "bench.json"
        csv_path = tmp_path / "bench.csv"
        report.save_json(json_path)
        report.save_distances_csv(csv_path)
        loaded = json.loads(json_path.read_text())
        assert loaded["rank1_accuracy"] == report.rank1_accuracy
        assert len(loaded["distances"]) == 2
        lines = csv_path.read_text().splitlines()
        assert lines[0].startswith("probe,true_id")
        assert len(lines) == 3

    def test_ten_identities_separate_fully(self, fast_cfg):
        report = run_benchmark(10, 5, fast_cfg, seed=0)
        assert report.rank1_accuracy >= 0.9
        assert report.inter_stats["mean"] >= 2 * report.intra_stats["mean"]

    def test_ten_seed_inter_exceeds_intra_under_expressions(self, fast_cfg):
        # Distance-table check on ten seeds: every cross-identity distance
        # beats the worst within-identity distance at bend magnitudes up to 1.
        enrolled, probe_sets = {}, {}
        for seed in range(10):
            base = generate_identity(seed)
            enrolled[seed] = signature(base, fast_cfg)
            probe_sets[seed] = [
                signature(apply_expression(base, m, seed=100 * seed + int(m * 4)), fast_cfg)
                for m in (0.25, 0.5, 0.75, 1.0)
            ]
        max_intra = max(
            moment_distance(p, enrolled[seed])
            for seed, probes in probe_sets.items()
            for p in probes
        )
        min_inter = min(
            moment_distance(p, enrolled[other])
            for seed, probes in probe_sets.items()
            for p in list(probes) + [enrolled[seed]]
            for other in enrolled
            if other != seed
        )
        assert min_inter > max_intra

    def test_sweep_rates_monotone(self, fast_cfg):
        report = run_benchmark(3, 3, fast_cfg, seed=3)
        taus = [t for t, _, _ in report.threshold_sweep]
        tars = [a for _, a, _ in report.threshold_sweep]
        fars = [f for _, _, f in report.threshold_sweep]
        assert taus == sorted(taus)
        assert tars == sorted(tars)
        assert fars == sorted(fars)
        assert 0.0 <= report.rank1_accuracy <= 1.0
