"""Verification (1:1) and identification (1:N) over moment signatures.

A record's score against a probe is the minimum distance over its stored
signatures (enrollment keeps one signature per expression scan, so the best
expression wins). Decisions compare the score to a threshold; probes that
clear no record are strangers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from statistics import median
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

import numpy as np

from .cca import CcaModel, cca_distance, fit_cca
from .moments import MomentSignature, moment_distance

if TYPE_CHECKING:  # pragma: no cover
    from .gallery import EnrollmentRecord

MATCHED = "matched"
STRANGER = "stranger"


@dataclass(frozen=True)
class MatcherConfig:
    """Knobs for the canonicalize -> signature -> decide pipeline."""

    degree: int = 5
    crop_radius_mm: float = 80.0
    sample_count: int = 200
    threshold: float = 0.0
    cca_enabled: bool = False
    cca_k: int = 4
    tie_break: str = "student_id"
    rank_depth: int = 5

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        if self.sample_count < 4:
            raise ValueError("sample_count must be at least 4")
        if self.crop_radius_mm <= 0:
            raise ValueError("crop_radius_mm must be positive")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")
        if self.cca_enabled and self.cca_k < 1:
            raise ValueError("cca_k must be at least 1 when cca is enabled")
        if self.tie_break != "student_id":
            raise ValueError(f"unknown tie_break rule {self.tie_break!r}")
        if self.rank_depth < 1:
            raise ValueError("rank_depth must be at least 1")


@dataclass(frozen=True)
class MatchResult:
    """Outcome of identification: decision, best score, and a ranked short list."""

    decision: str  # MATCHED or STRANGER
    student_id: Optional[int]
    best_distance: float
    ranked: tuple[tuple[int, float], ...]


def _signature_distance(a: MomentSignature, b: MomentSignature,
                        cca_model: Optional[CcaModel]) -> float:
    if cca_model is None:
        return moment_distance(a, b)
    if a.degree != b.degree:
        raise ValueError(f"signature degree mismatch: {a.degree} vs {b.degree}")
    return cca_distance(cca_model, a.values, b.values)


def _record_distance(probe: MomentSignature, record: "EnrollmentRecord",
                     cca_model: Optional[CcaModel]) -> float:
    if not record.signatures:
        raise ValueError(f"record {record.student_id} has no signatures")
    return min(_signature_distance(probe, sig, cca_model) for sig in record.signatures)


def verify(probe: MomentSignature, record: "EnrollmentRecord", threshold: float,
           cca_model: Optional[CcaModel] = None) -> tuple[bool, float]:
    """1:1 check: accept when the record's best signature is within threshold."""
    distance = _record_distance(probe, record, cca_model)
    return distance <= threshold, distance


def identify(probe: MomentSignature, gallery: Sequence["EnrollmentRecord"],
             threshold: float, rank_depth: int = 5,
             cca_model: Optional[CcaModel] = None) -> MatchResult:
    """1:N search: rank records by distance, decide matched vs stranger.

    Ranking sorts by distance then by student id, so equal-distance ties and
    gallery order never change the decision.
    """
    scored = sorted(
        ((_record_distance(probe, r, cca_model), r.student_id) for r in gallery),
        key=lambda pair: (pair[0], pair[1]),
    )
    ranked = tuple((sid, dist) for dist, sid in scored[:rank_depth])
    if scored and scored[0][0] <= threshold:
        return MatchResult(MATCHED, scored[0][1], scored[0][0], ranked)
    best = scored[0][0] if scored else float("inf")
    return MatchResult(STRANGER, None, best, ranked)


def calibrate_threshold(gallery: Sequence["EnrollmentRecord"], margin: float = 1.5) -> float:
    """Derive a decision threshold from the enrolled gallery.

    Prefers intra-record spread: margin times the largest pairwise distance
    between signatures of one student. With single-signature records only, it
    falls back to half the median nearest-neighbor distance between records.
    """
    intra_max = [
        max(moment_distance(a, b) for a, b in itertools.combinations(r.signatures, 2))
        for r in gallery
        if len(r.signatures) >= 2
    ]
    if intra_max:
        return margin * max(intra_max)
    if len(gallery) < 2:
        raise ValueError("calibration needs a record with >=2 signatures or >=2 records")
    nearest = []
    for r in gallery:
        others = [
            min(moment_distance(a, b) for a in r.signatures for b in o.signatures)
            for o in gallery
            if o.student_id != r.student_id
        ]
        nearest.append(min(others))
    return 0.5 * median(nearest)


def fit_gallery_cca(gallery: Sequence["EnrollmentRecord"], k: int) -> CcaModel:
    """Fit the optional fusion model relating probe-condition to enrollment-condition.

    Pairs every extra signature of a record (probe-condition block) with that
    record's first signature (enrollment-condition block). Needs at least two
    such pairs, i.e. records enrolled with multiple expression scans.
    """
    p_rows, q_rows = [], []
    for r in gallery:
        for sig in r.signatures[1:]:
            p_rows.append(sig.values)
            q_rows.append(r.signatures[0].values)
    if len(p_rows) < 2:
        raise ValueError("gallery CCA needs at least 2 multi-scan signature pairs")
    return fit_cca(np.array(p_rows), np.array(q_rows), k)
