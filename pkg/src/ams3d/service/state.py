"""Capture ingestion pipeline and the service's persistent state.

One ``ServiceState`` owns the student and stranger databases, the attendance
ledger, and an idempotency journal keyed by capture id. Mutations are
serialized through a lock; every successful mutation persists all files
atomically, and replaying an event log is a no-op (byte-identical files)
because journaled capture ids short-circuit to Duplicate.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Optional
from zoneinfo import ZoneInfo

from ..attendance import AttendanceLedger, dispatch_notifications, format_percentage, load_calendar
from ..canonical import canonicalize
from ..cca import CcaModel
from ..gallery import (
    GalleryError,
    StrangerDB,
    StudentDB,
    check_referential_integrity,
)
from ..matcher import MATCHED, STRANGER, fit_gallery_cca, identify
from ..moments import moment_vector
from ..surface import load_surface, parse_off
from .config import ServiceConfig

JOURNAL_HEADER = {"format": "ams-journal", "version": 1}

DUPLICATE = "duplicate"
FAILED = "failed"


class ServiceError(ValueError):
    pass


@dataclass(frozen=True)
class CaptureEvent:
    """One camera capture: unique id, source camera, instant, and the scan.

    ``scan`` is either an OFF document (detected by its header) or a path,
    resolved against the configured scan archive directory.
    """

    capture_id: str
    camera_id: str
    timestamp: str
    scan: str

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CaptureEvent":
        try:
            return cls(
                capture_id=str(obj["capture_id"]),
                camera_id=str(obj["camera_id"]),
                timestamp=str(obj["timestamp"]),
                scan=str(obj["scan"]),
            )
        except KeyError as exc:
            raise ServiceError(f"capture event missing field {exc}")


@dataclass
class PipelineReport:
    capture_id: str
    decision: str  # matched | stranger | duplicate | failed
    student_id: Optional[int] = None
    stranger_id: Optional[int] = None
    attendance_marked: bool = False
    attendance_date: Optional[str] = None
    distances: list = field(default_factory=list)  # [(student_id, distance)]
    stage_timings: dict = field(default_factory=dict)
    reason: Optional[str] = None

    def to_json_dict(self) -> dict:
        return {
            "capture_id": self.capture_id,
            "decision": self.decision,
            "student_id": self.student_id,
            "stranger_id": self.stranger_id,
            "attendance_marked": self.attendance_marked,
            "attendance_date": self.attendance_date,
            "distances": [
                {"student_id": sid, "distance": dist} for sid, dist in self.distances
            ],
            "stage_timings": self.stage_timings,
            "reason": self.reason,
        }


def parse_timestamp(value: str, tz: ZoneInfo) -> datetime:
    """ISO-8601 instant; naive values are assumed to be in the configured zone."""
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    try:
        stamp = datetime.fromisoformat(text)
    except ValueError:
        raise ServiceError(f"unparseable timestamp {value!r}")
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=tz)
    return stamp


class ServiceState:
    """Owner of all mutable state behind the REST API and CLI."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.matcher_config = config.matcher_config()
        try:
            self.tz = ZoneInfo(config.timezone)
        except Exception:
            raise ServiceError(f"unknown timezone {config.timezone!r}")
        self._lock = threading.Lock()

        if not os.path.exists(config.calendar_path):
            raise ServiceError(f"calendar file not found: {config.calendar_path}")
        working_days = load_calendar(config.calendar_path)

        self.students = (
            StudentDB.load(config.gallery_path)
            if os.path.exists(config.gallery_path) else StudentDB()
        )
        self.strangers = (
            StrangerDB.load(config.stranger_path)
            if os.path.exists(config.stranger_path) else StrangerDB()
        )
        check_referential_integrity(self.students, self.strangers)
        self.ledger = (
            AttendanceLedger.load(config.ledger_path, working_days)
            if os.path.exists(config.ledger_path) else AttendanceLedger(working_days)
        )
        self.journal: dict[str, dict] = {}
        self._journal_order: list[str] = []
        if os.path.exists(config.journal_path):
            self._load_journal(config.journal_path)
        self._cca_model: Optional[CcaModel] = None

    # -- persistence ---------------------------------------------------------

    def _load_journal(self, path) -> None:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise ServiceError("journal: line 1: missing header")
        header = json.loads(lines[0])
        if header.get("format") != JOURNAL_HEADER["format"]:
            raise ServiceError("journal: line 1: not an ams-journal file")
        if header.get("version") != JOURNAL_HEADER["version"]:
            raise ServiceError(f"journal: unsupported version {header.get('version')!r}")
        for no, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
                cid = entry["capture_id"]
            except (json.JSONDecodeError, KeyError) as exc:
                raise ServiceError(f"journal: line {no}: malformed entry: {exc}")
            self.journal[cid] = entry
            self._journal_order.append(cid)

    def _save_journal(self) -> None:
        path = self.config.journal_path
        lines = [json.dumps(JOURNAL_HEADER, sort_keys=True, separators=(",", ":"))]
        for cid in self._journal_order:
            lines.append(json.dumps(self.journal[cid], sort_keys=True, separators=(",", ":")))
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def save_all(self) -> None:
        self.students.save(self.config.gallery_path)
        self.strangers.save(self.config.stranger_path)
        self.ledger.save(self.config.ledger_path)
        self._save_journal()

    # -- matcher plumbing ----------------------------------------------------

    def _cca(self) -> Optional[CcaModel]:
        if not self.matcher_config.cca_enabled:
            return None
        if self._cca_model is None:
            self._cca_model = fit_gallery_cca(self.students.records(), self.matcher_config.cca_k)
        return self._cca_model

    def _load_scan(self, scan: str):
        if scan.lstrip().startswith("OFF"):
            return parse_off(scan)
        path = scan
        if not os.path.isabs(path):
            path = os.path.join(self.config.scan_archive_dir, path)
        if not os.path.exists(path):
            raise ServiceError(f"scan not found: {scan}")
        return load_surface(path)

    # -- operations ----------------------------------------------------------

    def enroll(self, name: str, roll_number: str, parent_contact: str,
               scan_documents: list[str], enrolled_at: Optional[str] = None):
        """Parse, canonicalize, and store one student; persists on success."""
        surfaces = [self._load_scan(doc) for doc in scan_documents]
        with self._lock:
            record = self.students.enroll(
                name, roll_number, parent_contact, surfaces,
                self.matcher_config, enrolled_at=enrolled_at,
            )
            self._cca_model = None  # gallery changed; refit lazily
            self.save_all()
            return record

    def ingest(self, event: CaptureEvent) -> PipelineReport:
        """Run one capture through canonicalize, identify, and bookkeeping.

        Effects are exactly-once per capture id: replays return Duplicate and
        change nothing. A pipeline failure is journaled (and thereby consumed)
        with no other state change. The expensive stages run outside the lock
        against an immutable gallery snapshot, so concurrent ingests proceed
        in parallel; the journal is re-checked before applying effects in
        case a rival finished the same capture id first.
        """
        with self._lock:
            if event.capture_id in self.journal:
                return PipelineReport(
                    capture_id=event.capture_id, decision=DUPLICATE,
                    reason="capture_id already processed",
                )
            gallery = self.students.records()
            cca_model = self._cca()

        timings = {}
        try:
            stamp = parse_timestamp(event.timestamp, self.tz)
            t0 = time.perf_counter()
            surface = self._load_scan(event.scan)
            timings["load"] = time.perf_counter() - t0

            t0 = time.perf_counter()
            form = canonicalize(surface, self.matcher_config)
            timings["canonicalize"] = time.perf_counter() - t0

            t0 = time.perf_counter()
            signature = moment_vector(form, self.matcher_config.degree)
            timings["moments"] = time.perf_counter() - t0

            if gallery and gallery[0].signatures[0].degree != signature.degree:
                raise ServiceError(
                    f"degree mismatch: gallery stores "
                    f"{gallery[0].signatures[0].degree}, config produces {signature.degree}"
                )
            t0 = time.perf_counter()
            result = identify(
                signature, gallery, self.matcher_config.threshold,
                rank_depth=self.matcher_config.rank_depth, cca_model=cca_model,
            )
            timings["identify"] = time.perf_counter() - t0
        except (ServiceError, ValueError, OSError) as exc:
            with self._lock:
                if event.capture_id in self.journal:
                    return PipelineReport(
                        capture_id=event.capture_id, decision=DUPLICATE,
                        reason="capture_id already processed",
                    )
                entry = {"capture_id": event.capture_id, "decision": FAILED, "reason": str(exc)}
                self.journal[event.capture_id] = entry
                self._journal_order.append(event.capture_id)
                self.save_all()
            return PipelineReport(
                capture_id=event.capture_id, decision=FAILED,
                stage_timings=timings, reason=str(exc),
            )

        with self._lock:
            if event.capture_id in self.journal:
                return PipelineReport(
                    capture_id=event.capture_id, decision=DUPLICATE,
                    reason="capture_id already processed",
                )
            local_date = stamp.astimezone(self.tz).date()
            if result.decision == MATCHED:
                marked = False
                if self.ledger.is_working_day(local_date):
                    if not self.ledger.is_present(result.student_id, local_date):
                        self.ledger.mark_present(result.student_id, local_date)
                        marked = True
                    reason = None if marked else "already marked for this day"
                else:
                    reason = "not a working day"
                entry = {
                    "capture_id": event.capture_id,
                    "decision": MATCHED,
                    "student_id": result.student_id,
                    "date": local_date.isoformat(),
                    "marked": marked,
                }
                self.journal[event.capture_id] = entry
                self._journal_order.append(event.capture_id)
                self.save_all()
                return PipelineReport(
                    capture_id=event.capture_id, decision=MATCHED,
                    student_id=result.student_id, attendance_marked=marked,
                    attendance_date=local_date.isoformat(),
                    distances=list(result.ranked), stage_timings=timings, reason=reason,
                )

            stranger = self.strangers.add(
                event.capture_id, event.camera_id, stamp.isoformat(), signature,
            )
            entry = {
                "capture_id": event.capture_id,
                "decision": STRANGER,
                "stranger_id": stranger.stranger_id,
                "date": local_date.isoformat(),
                "marked": False,
            }
            self.journal[event.capture_id] = entry
            self._journal_order.append(event.capture_id)
            self.save_all()
            return PipelineReport(
                capture_id=event.capture_id, decision=STRANGER,
                stranger_id=stranger.stranger_id,
                distances=list(result.ranked), stage_timings=timings,
            )

    def resolve_stranger(self, stranger_id: int, action: str,
                         student_id: Optional[int] = None) -> PipelineReport:
        """Link or confirm a pending stranger; linking marks attendance for the
        capture's local date when it falls on a working day."""
        with self._lock:
            record = self.strangers.resolve(
                stranger_id, action, student_id=student_id, students=self.students,
            )
            marked = False
            attendance_date = None
            if action == "link":
                stamp = parse_timestamp(record.timestamp, self.tz)
                local_date = stamp.astimezone(self.tz).date()
                attendance_date = local_date.isoformat()
                if self.ledger.is_working_day(local_date) and not self.ledger.is_present(
                    student_id, local_date
                ):
                    self.ledger.mark_present(student_id, local_date)
                    marked = True
            self.save_all()
            return PipelineReport(
                capture_id=record.capture_id,
                decision=MATCHED if action == "link" else STRANGER,
                student_id=student_id if action == "link" else None,
                stranger_id=stranger_id,
                attendance_marked=marked,
                attendance_date=attendance_date,
            )

    # -- read-side reporting ------------------------------------------------

    def attendance_summary(self, student_id: int, start: date, end: date) -> dict:
        record = self.students.get(student_id)
        percentage = self.ledger.attendance_percentage(student_id, start, end)
        return {
            "student_id": student_id,
            "name": record.name,
            "from": start.isoformat(),
            "to": end.isoformat(),
            "working_days": self.ledger.working_count(start, end),
            "present_days": self.ledger.present_count(student_id, start, end),
            "percentage": format_percentage(percentage),
        }

    def percentage_rows(self, start: date, end: date) -> list[dict]:
        if self.ledger.working_count(start, end) == 0:
            raise ServiceError(
                f"no working days between {start.isoformat()} and {end.isoformat()}"
            )
        return [
            {
                "student_id": r.student_id,
                "name": r.name,
                "percentage": format_percentage(
                    self.ledger.attendance_percentage(r.student_id, start, end)
                ),
            }
            for r in self.students.records()
        ]

    def monthly_counts(self, student_id: int, year: int) -> dict[str, int]:
        self.students.get(student_id)
        counts = self.ledger.monthly_breakdown(student_id, year)
        return {str(month): counts[month] for month in range(1, 13)}

    def stranger_rows(self, status: Optional[str] = None) -> list[dict]:
        """Triage view: stranger records plus fresh top-R match suggestions."""
        gallery = self.students.records()
        rows = []
        for rec in self.strangers.records(status=status):
            result = identify(
                rec.signature, gallery, self.matcher_config.threshold,
                rank_depth=self.matcher_config.rank_depth, cca_model=self._cca(),
            )
            rows.append({
                "stranger_id": rec.stranger_id,
                "capture_id": rec.capture_id,
                "camera_id": rec.camera_id,
                "timestamp": rec.timestamp,
                "status": rec.status,
                "student_id": rec.linked_student_id,
                "suggestions": [
                    {"student_id": sid, "distance": dist} for sid, dist in result.ranked
                ],
            })
        return rows

    def absentee_batch(self, day: date):
        return self.ledger.absentees(day, self.students.records())

    def dispatch_absentees(self, day: date):
        batch = self.absentee_batch(day)
        if not self.config.sms_webhook_url:
            raise ServiceError("sms_webhook_url is not configured")
        return dispatch_notifications(batch, self.config.sms_webhook_url)
