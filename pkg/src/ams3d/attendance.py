"""Attendance ledger, percentage and month-wise reports, absence notifications.

The working-day calendar is an explicit input (institutions differ too much
for weekday rules); marking is an idempotent set insert keyed by (student,
date). Percentages are computed on exact rationals and rounded half-up to two
decimals only at the reporting boundary.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, replace
from datetime import date
from decimal import Decimal
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

import requests

if TYPE_CHECKING:  # pragma: no cover
    from .gallery import EnrollmentRecord

LEDGER_HEADER = {"format": "ams-ledger", "version": 1}

QUEUED = "queued"
SENT = "sent"
FAILED = "failed"


class LedgerError(ValueError):
    pass


@dataclass(frozen=True)
class AbsenceNotification:
    """One absence message addressed to a parent; at most one per (student, date)."""

    student_id: int
    date: date
    destination: str
    status: str = QUEUED
    reason: Optional[str] = None

    @property
    def idempotency_key(self) -> str:
        return f"{self.student_id}:{self.date.isoformat()}"


def load_calendar(path) -> list[date]:
    """Working-day calendar file: one ISO-8601 date per line, '#' comments allowed."""
    days = []
    with open(path, "r", encoding="utf-8") as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                days.append(date.fromisoformat(line))
            except ValueError:
                raise LedgerError(f"line {no}: invalid date {line!r}")
    return sorted(set(days))


def round_half_up_percent(marked: int, total: int) -> Decimal:
    """Exact 100*marked/total rounded half-up to 2 decimals."""
    if total <= 0:
        raise LedgerError("no working days in range")
    cents, rem = divmod(10000 * marked, total)
    if 2 * rem >= total:
        cents += 1
    return Decimal(cents).scaleb(-2).quantize(Decimal("0.01"))


def format_percentage(value: Decimal) -> str:
    return f"{value}%"


class AttendanceLedger:
    """Working-day calendar plus (student, date) presence marks."""

    def __init__(self, working_days: Iterable[date], marks: Iterable[tuple[int, date]] = ()):
        self.working_days = sorted(set(working_days))
        self._working_set = frozenset(self.working_days)
        self.marks: set[tuple[int, date]] = set()
        for student_id, day in marks:
            self.mark_present(student_id, day)

    def is_working_day(self, day: date) -> bool:
        return day in self._working_set

    def mark_present(self, student_id: int, day: date) -> None:
        """Idempotent insert; rejects dates outside the working calendar."""
        if day not in self._working_set:
            raise LedgerError(f"{day.isoformat()} is not a working day")
        self.marks.add((int(student_id), day))

    def is_present(self, student_id: int, day: date) -> bool:
        return (student_id, day) in self.marks

    def present_count(self, student_id: int, start: date, end: date) -> int:
        return sum(
            1 for d in self.working_days if start <= d <= end and (student_id, d) in self.marks
        )

    def working_count(self, start: date, end: date) -> int:
        return sum(1 for d in self.working_days if start <= d <= end)

    def attendance_percentage(self, student_id: int, start: date, end: date) -> Decimal:
        """100 x marked/working days in the range, half-up at 2 decimals."""
        total = self.working_count(start, end)
        if total == 0:
            raise LedgerError(
                f"no working days between {start.isoformat()} and {end.isoformat()}"
            )
        return round_half_up_percent(self.present_count(student_id, start, end), total)

    def monthly_breakdown(self, student_id: int, year: int) -> dict[int, int]:
        """Per-month present counts for one year; the twelve counts sum to the
        student's total marks in that year."""
        counts = {month: 0 for month in range(1, 13)}
        for sid, day in self.marks:
            if sid == student_id and day.year == year:
                counts[day.month] += 1
        return counts

    def absentees(self, day: date, roster: Sequence["EnrollmentRecord"]) -> list[AbsenceNotification]:
        """One queued notification per roster student with no mark on ``day``."""
        if day not in self._working_set:
            raise LedgerError(f"{day.isoformat()} is not a working day")
        return [
            AbsenceNotification(r.student_id, day, r.parent_contact)
            for r in roster
            if (r.student_id, day) not in self.marks
        ]

    # -- persistence (marks only; the calendar is its own input file) --------

    def save(self, path) -> None:
        directory = os.path.dirname(os.path.abspath(path))
        lines = [json.dumps(LEDGER_HEADER, sort_keys=True, separators=(",", ":"))]
        for sid, day in sorted(self.marks, key=lambda m: (m[1], m[0])):
            lines.append(json.dumps(
                {"date": day.isoformat(), "student_id": sid},
                sort_keys=True, separators=(",", ":"),
            ))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path, working_days: Iterable[date]) -> "AttendanceLedger":
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise LedgerError("line 1: missing header")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise LedgerError(f"line 1: malformed header: {exc}")
        if not isinstance(header, dict) or header.get("format") != LEDGER_HEADER["format"]:
            raise LedgerError("line 1: not an ams-ledger file")
        if header.get("version") != LEDGER_HEADER["version"]:
            raise LedgerError(f"line 1: unsupported version {header.get('version')!r}")
        ledger = cls(working_days)
        for no, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                ledger.mark_present(int(obj["student_id"]), date.fromisoformat(obj["date"]))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise LedgerError(f"line {no}: malformed mark: {exc}")
        return ledger


def dispatch_notifications(batch: Sequence[AbsenceNotification], gateway_endpoint: str,
                           timeout: float = 10.0,
                           session: Optional[requests.Session] = None) -> list[AbsenceNotification]:
    """POST each queued notification to the SMS gateway webhook once.

    2xx marks it sent; anything else, including an unreachable endpoint, marks
    it failed with a reason so a later dispatch can retry. The idempotency key
    travels in the payload so the gateway can deduplicate (delivery is
    at-least-once).
    """
    own_session = session is None
    sess = session or requests.Session()
    results = []
    try:
        for note in batch:
            if note.status == SENT:  # queued and failed ones are (re)tried
                results.append(note)
                continue
            payload = {
                "student_id": note.student_id,
                "date": note.date.isoformat(),
                "destination": note.destination,
                "idempotency_key": note.idempotency_key,
                "text": (
                    f"Student {note.student_id} was absent on {note.date.isoformat()}."
                ),
            }
            try:
                resp = sess.post(gateway_endpoint, json=payload, timeout=timeout)
            except requests.RequestException as exc:
                results.append(replace(note, status=FAILED, reason=f"unreachable: {exc}"))
                continue
            if 200 <= resp.status_code < 300:
                results.append(replace(note, status=SENT, reason=None))
            else:
                results.append(replace(note, status=FAILED, reason=f"HTTP {resp.status_code}"))
    finally:
        if own_session:
            sess.close()
    return results
