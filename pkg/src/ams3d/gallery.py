"""Student and stranger databases with JSON Lines persistence.

Each database is one human-auditable JSONL file: a fixed header line followed
by one record per line, records sorted by id so that saving the same database
twice produces identical bytes. Writes go to a temp file and are renamed into
place. Raw scans are never stored, only signatures plus capture ids pointing
at the external scan archive.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import TYPE_CHECKING, Optional, Sequence

from .canonical import canonicalize
from .moments import MomentSignature, moment_vector

if TYPE_CHECKING:  # pragma: no cover
    from .matcher import MatcherConfig
    from .surface import Surface

FORMAT_HEADER = {"format": "ams-gallery", "version": 1}

PENDING = "pending"
LINKED = "linked"
CONFIRMED_STRANGER = "confirmed_stranger"


class GalleryError(ValueError):
    pass


class DuplicateRollError(GalleryError):
    pass


@dataclass(frozen=True)
class EnrollmentRecord:
    student_id: int
    name: str
    roll_number: str
    parent_contact: str
    signatures: tuple[MomentSignature, ...]
    enrolled_at: str  # ISO-8601

    def to_json_dict(self) -> dict:
        return {
            "student_id": self.student_id,
            "name": self.name,
            "roll_number": self.roll_number,
            "parent_contact": self.parent_contact,
            "enrolled_at": self.enrolled_at,
            "signatures": [
                {"degree": s.degree, "values": s.values.tolist()} for s in self.signatures
            ],
        }


@dataclass(frozen=True)
class StrangerRecord:
    stranger_id: int
    capture_id: str
    camera_id: str
    timestamp: str  # ISO-8601 of the capture
    signature: MomentSignature
    status: str = PENDING
    linked_student_id: Optional[int] = None

    def to_json_dict(self) -> dict:
        d = {
            "stranger_id": self.stranger_id,
            "capture_id": self.capture_id,
            "camera_id": self.camera_id,
            "timestamp": self.timestamp,
            "status": self.status,
            "signature": {"degree": self.signature.degree, "values": self.signature.values.tolist()},
        }
        if self.status == LINKED:
            d["student_id"] = self.linked_student_id
        return d


def _signature_from_json(obj, where: str) -> MomentSignature:
    try:
        return MomentSignature(obj["degree"], obj["values"])
    except (KeyError, TypeError, ValueError) as exc:
        raise GalleryError(f"{where}: bad signature: {exc}")


def _write_jsonl(path, dicts) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    lines = [json.dumps(FORMAT_HEADER, sort_keys=True, separators=(",", ":"))]
    lines += [json.dumps(d, sort_keys=True, separators=(",", ":")) for d in dicts]
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_jsonl(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise GalleryError("line 1: missing header")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise GalleryError(f"line 1: malformed header: {exc}")
    if not isinstance(header, dict) or header.get("format") != FORMAT_HEADER["format"]:
        raise GalleryError(f"line 1: not an ams-gallery file")
    if header.get("version") != FORMAT_HEADER["version"]:
        raise GalleryError(f"line 1: unsupported version {header.get('version')!r}")
    records = []
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise GalleryError(f"line {no}: malformed record: {exc}")
        records.append((no, obj))
    return records


class StudentDB:
    """The enrollment database: id- and roll-unique student records."""

    def __init__(self, records: Sequence[EnrollmentRecord] = ()):
        self._by_id: dict[int, EnrollmentRecord] = {}
        self._by_roll: dict[str, int] = {}
        for rec in records:
            self._insert(rec)

    def _insert(self, rec: EnrollmentRecord) -> None:
        if rec.student_id in self._by_id:
            raise GalleryError(f"duplicate student_id {rec.student_id}")
        if rec.roll_number in self._by_roll:
            raise DuplicateRollError(f"duplicate roll number {rec.roll_number!r}")
        if not rec.signatures:
            raise GalleryError(f"student {rec.student_id} has no signatures")
        degrees = {s.degree for s in rec.signatures}
        if len(degrees) != 1:
            raise GalleryError(f"student {rec.student_id} mixes signature degrees {degrees}")
        self._by_id[rec.student_id] = rec
        self._by_roll[rec.roll_number] = rec.student_id

    def __len__(self):
        return len(self._by_id)

    def __contains__(self, student_id: int):
        return student_id in self._by_id

    def get(self, student_id: int) -> EnrollmentRecord:
        try:
            return self._by_id[student_id]
        except KeyError:
            raise GalleryError(f"unknown student_id {student_id}")

    def records(self) -> list[EnrollmentRecord]:
        return [self._by_id[sid] for sid in sorted(self._by_id)]

    def enroll(self, name: str, roll_number: str, parent_contact: str,
               scans: Sequence["Surface"], cfg: "MatcherConfig",
               enrolled_at: Optional[str] = None) -> EnrollmentRecord:
        """Canonicalize every scan into a signature and persist one record.

        All scans are processed before the database is touched, so a failing
        scan leaves no partial record behind.
        """
        if not name or not roll_number:
            raise GalleryError("name and roll_number must be nonempty")
        if roll_number in self._by_roll:
            raise DuplicateRollError(f"roll number {roll_number!r} already enrolled")
        if not scans:
            raise GalleryError("enrollment needs at least one scan")
        signatures = tuple(
            moment_vector(canonicalize(scan, cfg), cfg.degree) for scan in scans
        )
        if enrolled_at is None:
            enrolled_at = datetime.now(timezone.utc).isoformat()
        rec = EnrollmentRecord(
            student_id=max(self._by_id, default=0) + 1,
            name=name,
            roll_number=roll_number,
            parent_contact=parent_contact,
            signatures=signatures,
            enrolled_at=enrolled_at,
        )
        self._insert(rec)
        return rec

    def save(self, path) -> None:
        _write_jsonl(path, [r.to_json_dict() for r in self.records()])

    @classmethod
    def load(cls, path) -> "StudentDB":
        db = cls()
        for no, obj in _read_jsonl(path):
            try:
                rec = EnrollmentRecord(
                    student_id=int(obj["student_id"]),
                    name=obj["name"],
                    roll_number=obj["roll_number"],
                    parent_contact=obj["parent_contact"],
                    enrolled_at=obj["enrolled_at"],
                    signatures=tuple(
                        _signature_from_json(s, f"line {no}") for s in obj["signatures"]
                    ),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise GalleryError(f"line {no}: malformed student record: {exc}")
            db._insert(rec)
        return db


class StrangerDB:
    """Unmatched-capture records awaiting triage."""

    def __init__(self, records: Sequence[StrangerRecord] = ()):
        self._by_id: dict[int, StrangerRecord] = {}
        for rec in records:
            if rec.stranger_id in self._by_id:
                raise GalleryError(f"duplicate stranger_id {rec.stranger_id}")
            self._by_id[rec.stranger_id] = rec

    def __len__(self):
        return len(self._by_id)

    def get(self, stranger_id: int) -> StrangerRecord:
        try:
            return self._by_id[stranger_id]
        except KeyError:
            raise GalleryError(f"unknown stranger_id {stranger_id}")

    def records(self, status: Optional[str] = None) -> list[StrangerRecord]:
        recs = [self._by_id[sid] for sid in sorted(self._by_id)]
        if status is not None:
            recs = [r for r in recs if r.status == status]
        return recs

    def add(self, capture_id: str, camera_id: str, timestamp: str,
            signature: MomentSignature) -> StrangerRecord:
        rec = StrangerRecord(
            stranger_id=max(self._by_id, default=0) + 1,
            capture_id=capture_id,
            camera_id=camera_id,
            timestamp=timestamp,
            signature=signature,
        )
        self._by_id[rec.stranger_id] = rec
        return rec

    def resolve(self, stranger_id: int, action: str,
                student_id: Optional[int] = None,
                students: Optional[StudentDB] = None) -> StrangerRecord:
        """Transition a Pending record: action 'link' (to a student) or 'confirm'.

        The only legal transitions are pending -> linked and pending ->
        confirmed_stranger; anything else, including a second resolution, is
        rejected.
        """
        rec = self.get(stranger_id)
        if rec.status != PENDING:
            raise GalleryError(f"stranger {stranger_id} already resolved ({rec.status})")
        if action == "link":
            if students is None or student_id is None:
                raise GalleryError("link requires a student_id and the student database")
            if student_id not in students:
                raise GalleryError(f"cannot link: unknown student_id {student_id}")
            updated = replace(rec, status=LINKED, linked_student_id=int(student_id))
        elif action == "confirm":
            updated = replace(rec, status=CONFIRMED_STRANGER)
        else:
            raise GalleryError(f"unknown resolve action {action!r}")
        self._by_id[stranger_id] = updated
        return updated

    def save(self, path) -> None:
        _write_jsonl(path, [r.to_json_dict() for r in self.records()])

    @classmethod
    def load(cls, path) -> "StrangerDB":
        recs = []
        for no, obj in _read_jsonl(path):
            try:
                status = obj["status"]
                if status not in (PENDING, LINKED, CONFIRMED_STRANGER):
                    raise GalleryError(f"unknown status {status!r}")
                recs.append(StrangerRecord(
                    stranger_id=int(obj["stranger_id"]),
                    capture_id=obj["capture_id"],
                    camera_id=obj["camera_id"],
                    timestamp=obj["timestamp"],
                    signature=_signature_from_json(obj["signature"], f"line {no}"),
                    status=status,
                    linked_student_id=int(obj["student_id"]) if status == LINKED else None,
                ))
            except GalleryError:
                raise
            except (KeyError, TypeError, ValueError) as exc:
                raise GalleryError(f"line {no}: malformed stranger record: {exc}")
        return cls(recs)


def check_referential_integrity(students: StudentDB, strangers: StrangerDB) -> None:
    """Every linked stranger must point at an existing enrollment."""
    for rec in strangers.records(status=LINKED):
        if rec.linked_student_id not in students:
            raise GalleryError(
                f"stranger {rec.stranger_id} linked to missing student {rec.linked_student_id}"
            )
