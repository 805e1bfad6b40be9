"""Canonical forms: bending-invariant 3D embeddings of cropped face surfaces.

The pipeline samples a cropped surface, embeds the sampled geodesic distance
matrix with classical multidimensional scaling, and normalizes the pose so
that two scans of the same face land in directly comparable coordinates.
Geodesics survive expression-like bending, which is what makes the embedding
expression-insensitive.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

import numpy as np
import scipy.linalg as la
from scipy.sparse import csgraph

from .surface import NOSE_TIP, Surface, SurfaceError, crop_geodesic, farthest_point_sample

if TYPE_CHECKING:  # pragma: no cover
    from .matcher import MatcherConfig

#: Sign of a principal axis is pinned by its third-order moment when the
#: moment is larger than this; smaller moments leave the axis ambiguous.
AXIS_SIGN_TOL = 1e-12


class CanonicalForm:
    """Pose-normalized M x 3 embedding of a sampled surface.

    Invariants (enforced at construction): centroid at the origin, diagonal
    covariance with non-increasing axis variances, and non-negative
    third-order axis moments on every axis whose moment is decisively nonzero.
    """

    def __init__(self, points, sample_indices=None, ambiguous_axes=()):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("canonical form points must be an (m, 3) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("canonical form points contain non-finite values")
        m = len(pts)
        if m < 1:
            raise ValueError("canonical form needs at least one point")
        if sample_indices is None:
            sample_indices = np.arange(m, dtype=np.int64)
        idx = np.asarray(sample_indices, dtype=np.int64)
        if idx.shape != (m,):
            raise ValueError("sample_indices must have one entry per point")

        scale = max(1.0, float(np.sqrt(np.mean(np.sum(pts**2, axis=1)))))
        centroid = pts.mean(axis=0)
        if np.max(np.abs(centroid)) > 1e-9 * scale:
            raise ValueError("canonical form is not centered")
        cov = pts.T @ pts / m
        diag = np.diag(cov)
        off = cov - np.diag(diag)
        if diag.max() > 0 and np.max(np.abs(off)) > 1e-9 * diag.max():
            raise ValueError("canonical form covariance is not diagonal")
        if np.any(diag[1:] > diag[:-1] * (1 + 1e-9) + 1e-12 * scale**2):
            raise ValueError("axis variances are not in non-increasing order")
        m3 = (pts**3).mean(axis=0)
        for k in range(3):
            if k not in ambiguous_axes and m3[k] < -AXIS_SIGN_TOL:
                raise ValueError(f"axis {k} violates the third-moment sign convention")

        pts.flags.writeable = False
        idx.flags.writeable = False
        self.points = pts
        self.sample_indices = idx
        self.ambiguous_axes = tuple(sorted(ambiguous_axes))

    @property
    def n_points(self) -> int:
        return len(self.points)

    def __repr__(self):
        return f"CanonicalForm({self.n_points} points, ambiguous_axes={self.ambiguous_axes})"


def geodesic_matrix(surface: Surface, samples: Sequence[int]) -> np.ndarray:
    """Symmetric matrix of pairwise graph geodesics (mm) between sample vertices."""
    idx = np.asarray(samples, dtype=np.int64)
    if idx.ndim != 1 or len(idx) == 0:
        raise SurfaceError("samples must be a nonempty index list")
    if idx.min() < 0 or idx.max() >= surface.n_vertices:
        raise SurfaceError("sample index out of range")
    if len(np.unique(idx)) != len(idx):
        raise SurfaceError("sample indices must be distinct")
    dist = csgraph.dijkstra(surface.adjacency, directed=False, indices=idx)[:, idx]
    # Forward/backward runs agree up to summation order; take the minimum so the
    # result is exactly symmetric with an exactly zero diagonal.
    dist = np.minimum(dist, dist.T)
    np.fill_diagonal(dist, 0.0)
    return dist


def classical_mds(dist: np.ndarray, dim: int) -> np.ndarray:
    """Embed a distance matrix into ``dim`` coordinates by classical MDS.

    Double-centers the squared distances, takes the top ``dim`` eigenpairs
    (negative eigenvalues clamped to zero, as graph metrics are never exactly
    Euclidean), and scales eigenvectors by square roots of the eigenvalues.
    Columns come out ordered by decreasing eigenvalue.
    """
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    n = d.shape[0]
    if not 1 <= dim <= n:
        raise ValueError(f"embedding dimension {dim} out of range 1..{n}")
    if not np.all(np.isfinite(d)):
        raise ValueError("distance matrix contains non-finite entries")
    if np.any(d < 0):
        raise ValueError("distance matrix has negative entries")
    scale = d.max() if d.size else 0.0
    if not np.allclose(d, d.T, rtol=0, atol=1e-10 * max(scale, 1.0)):
        raise ValueError("distance matrix is not symmetric")
    d = 0.5 * (d + d.T)

    sq = d**2
    row = sq.mean(axis=1, keepdims=True)
    col = sq.mean(axis=0, keepdims=True)
    b = -0.5 * (sq - row - col + sq.mean())

    evals, evecs = la.eigh(b)  # ascending; raises LinAlgError on non-convergence
    order = np.argsort(evals)[::-1][:dim]
    lam = np.clip(evals[order], 0.0, None)
    return evecs[:, order] * np.sqrt(lam)


def normalize_pose(points, sample_indices=None) -> CanonicalForm:
    """Center, rotate to principal axes, and fix axis signs.

    Axes are ordered by decreasing variance. Each axis is flipped so its
    third-order moment is non-negative; axes whose third moment is within
    ``AXIS_SIGN_TOL`` of zero are left as computed and reported in
    ``ambiguous_axes``.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must be an (m, 3) array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite values")
    centered = pts - pts.mean(axis=0)
    cov = centered.T @ centered / len(centered)
    evals, evecs = la.eigh(cov)
    order = np.argsort(evals)[::-1]
    rotated = centered @ evecs[:, order]

    ambiguous = []
    m3 = (rotated**3).mean(axis=0)
    for k in range(3):
        if abs(m3[k]) <= AXIS_SIGN_TOL:
            ambiguous.append(k)
        elif m3[k] < 0:
            rotated[:, k] = -rotated[:, k]
    return CanonicalForm(rotated, sample_indices, tuple(ambiguous))


def canonicalize(surface: Surface, cfg: "MatcherConfig") -> CanonicalForm:
    """Full canonical-form pipeline: crop, sample, embed, normalize.

    Crops a geodesic ball of ``cfg.crop_radius_mm`` around the nose tip,
    samples up to ``cfg.sample_count`` vertices by farthest-point sampling
    seeded at the nose tip (fewer if the crop is smaller), embeds the sampled
    geodesic matrix in 3D, and pose-normalizes. Deterministic for a given
    surface and config.
    """
    if NOSE_TIP not in surface.landmarks:
        raise SurfaceError(f"landmark {NOSE_TIP!r} required for canonicalization")
    cropped = crop_geodesic(surface, NOSE_TIP, cfg.crop_radius_mm)
    count = min(cfg.sample_count, cropped.n_vertices)
    samples = farthest_point_sample(cropped, count, cropped.landmarks[NOSE_TIP])
    dist = geodesic_matrix(cropped, samples)
    coords = classical_mds(dist, 3)
    return normalize_pose(coords, samples)
