"""Moment signatures of canonical forms and the squared-difference match score.

A signature collects the monomial averages over the canonical form's points
for every exponent triple (p, q, r) with p + q + r <= P. Signatures are the
stored biometric template; two surfaces are compared by the sum of squared
differences between their signature vectors.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .canonical import CanonicalForm


def moment_indices(degree: int) -> list[tuple[int, int, int]]:
    """Canonical exponent ordering: total degree ascending, then lexicographic.

    This ordering is part of the stored-template contract; persisted value
    arrays follow it exactly.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    out = []
    for total in range(degree + 1):
        block = [
            (p, q, total - p - q)
            for p in range(total + 1)
            for q in range(total - p + 1)
        ]
        out.extend(sorted(block))
    return out


def signature_length(degree: int) -> int:
    return comb(degree + 3, 3)


class MomentSignature:
    """Vector of monomial averages up to a fixed total degree."""

    def __init__(self, degree: int, values):
        vals = np.asarray(values, dtype=np.float64)
        if degree < 0:
            raise ValueError("degree must be non-negative")
        if vals.shape != (signature_length(degree),):
            raise ValueError(
                f"degree {degree} signature needs {signature_length(degree)} values, "
                f"got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("signature values contain non-finite entries")
        vals.flags.writeable = False
        self.degree = int(degree)
        self.values = vals

    def __eq__(self, other):
        if not isinstance(other, MomentSignature):
            return NotImplemented
        return self.degree == other.degree and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"MomentSignature(degree={self.degree}, n={len(self.values)})"


def moment_vector(form: CanonicalForm, degree: int, normalize_scale: bool = False) -> MomentSignature:
    """Average monomials x^p y^q z^r over the form's points, p+q+r <= degree.

    ``normalize_scale`` divides coordinates by the RMS point radius first,
    making the signature scale-free; by default absolute size (in mm) is kept
    as biometric signal.
    """
    pts = form.points
    if normalize_scale:
        rms = float(np.sqrt(np.mean(np.sum(pts**2, axis=1))))
        if rms > 0:
            pts = pts / rms
    # Per-point power tables keep the cost at O(m * n_moments) with small constants.
    powers = np.arange(degree + 1)
    px = pts[:, 0][:, None] ** powers
    py = pts[:, 1][:, None] ** powers
    pz = pts[:, 2][:, None] ** powers
    idx = np.array(moment_indices(degree))
    monomials = px[:, idx[:, 0]] * py[:, idx[:, 1]] * pz[:, idx[:, 2]]
    return MomentSignature(degree, monomials.mean(axis=0))


def moment_distance(a: MomentSignature, b: MomentSignature) -> float:
    """Sum of squared differences between two signatures of equal degree.

    Symmetric, non-negative, and zero exactly when the vectors are identical;
    its square root is the Euclidean metric on signature vectors.
    """
    if a.degree != b.degree:
        raise ValueError(f"signature degree mismatch: {a.degree} vs {b.degree}")
    diff = a.values - b.values
    return float(np.dot(diff, diff))
