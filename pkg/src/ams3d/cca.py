"""Canonical correlation analysis between two feature blocks.

Finds paired linear combinations of the P-block and Q-block variables with
maximal correlation, each variate scaled to unit sample variance, successive
pairs uncorrelated with all earlier ones. Solved by whitening both blocks and
taking the singular structure of the whitened cross-covariance.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as la

DEFAULT_RIDGE_FACTOR = 1e-8


class CcaModel:
    """Fitted CCA: projection directions, correlations, and centering offsets."""

    def __init__(self, directions_p, directions_q, correlations, means_p, means_q, ridge):
        self.directions_p = np.asarray(directions_p, dtype=np.float64)
        self.directions_q = np.asarray(directions_q, dtype=np.float64)
        self.correlations = np.asarray(correlations, dtype=np.float64)
        self.means_p = np.asarray(means_p, dtype=np.float64)
        self.means_q = np.asarray(means_q, dtype=np.float64)
        self.ridge = float(ridge)
        for arr in (self.directions_p, self.directions_q, self.correlations,
                    self.means_p, self.means_q):
            arr.flags.writeable = False

    @property
    def k(self) -> int:
        return len(self.correlations)

    def __repr__(self):
        return f"CcaModel(k={self.k}, correlations={np.round(self.correlations, 4)})"


def _inv_sqrt(cov: np.ndarray) -> np.ndarray:
    evals, evecs = la.eigh(cov)
    evals = np.clip(evals, np.finfo(np.float64).tiny, None)
    return (evecs / np.sqrt(evals)) @ evecs.T


def fit_cca(p: np.ndarray, q: np.ndarray, k: int, ridge_factor: float = DEFAULT_RIDGE_FACTOR) -> CcaModel:
    """Fit CCA on row-paired data matrices ``p`` (n x d_p) and ``q`` (n x d_q).

    Within-block covariances are ridged by ``ridge_factor * trace/dim`` to
    tolerate rank-deficient blocks. Directions are rescaled so every training
    variate has unit sample variance, and each pair's sign is flipped so the
    first nonzero entry of the P-side direction is positive.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.ndim != 2 or q.ndim != 2:
        raise ValueError("data blocks must be 2-D matrices")
    if p.shape[0] != q.shape[0]:
        raise ValueError(f"row counts differ: {p.shape[0]} vs {q.shape[0]}")
    n, dp = p.shape
    dq = q.shape[1]
    if n < 2:
        raise ValueError("need at least 2 rows to fit")
    if not 1 <= k <= min(dp, dq):
        raise ValueError(f"k={k} out of range 1..{min(dp, dq)}")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(q))):
        raise ValueError("data contains non-finite entries")

    means_p = p.mean(axis=0)
    means_q = q.mean(axis=0)
    pc = p - means_p
    qc = q - means_q

    cpp = pc.T @ pc / (n - 1)
    cqq = qc.T @ qc / (n - 1)
    cpq = pc.T @ qc / (n - 1)
    ridge_p = ridge_factor * np.trace(cpp) / dp
    ridge_q = ridge_factor * np.trace(cqq) / dq
    cpp = cpp + ridge_p * np.eye(dp)
    cqq = cqq + ridge_q * np.eye(dq)

    wp = _inv_sqrt(cpp)
    wq = _inv_sqrt(cqq)
    u, s, vt = la.svd(wp @ cpq @ wq, full_matrices=False)

    dir_p = wp @ u[:, :k]
    dir_q = wq @ vt[:k].T

    # Rescale to exactly unit sample variance on the training variates, then
    # report the empirical correlation of each final pair (the ridge shrinks
    # the singular values slightly; the variates themselves do not inherit
    # that bias).
    corr = np.empty(k)
    for j in range(k):
        up = pc @ dir_p[:, j]
        vq = qc @ dir_q[:, j]
        sp = float(np.std(up, ddof=1))
        sq = float(np.std(vq, ddof=1))
        if sp > 0:
            dir_p[:, j] /= sp
        if sq > 0:
            dir_q[:, j] /= sq
        denom = sp * sq * (n - 1)
        corr[j] = abs(float(up @ vq)) / denom if denom > 0 else 0.0
        nz = np.flatnonzero(np.abs(dir_p[:, j]) > 1e-12 * np.abs(dir_p[:, j]).max())
        if len(nz) and dir_p[nz[0], j] < 0:
            dir_p[:, j] = -dir_p[:, j]
            dir_q[:, j] = -dir_q[:, j]

    order = np.argsort(-corr, kind="stable")  # keep non-increasing after re-estimation
    return CcaModel(dir_p[:, order], dir_q[:, order], np.clip(corr[order], 0.0, 1.0),
                    means_p, means_q, ridge_factor)


def project(model: CcaModel, x: np.ndarray, block: str) -> np.ndarray:
    """Map rows of one block's space to canonical variates: (x - means) @ directions."""
    if block == "P":
        means, directions = model.means_p, model.directions_p
    elif block == "Q":
        means, directions = model.means_q, model.directions_q
    else:
        raise ValueError(f"block must be 'P' or 'Q', got {block!r}")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != len(means):
        raise ValueError(f"expected {len(means)} columns for block {block}, got {x.shape[1]}")
    return (x - means) @ directions


def cca_distance(model: CcaModel, p_row: np.ndarray, q_row: np.ndarray) -> float:
    """Euclidean distance between projections, components weighted by correlation."""
    u = project(model, p_row, "P")[0]
    v = project(model, q_row, "Q")[0]
    return float(np.linalg.norm(model.correlations * (u - v)))
