"""End-to-end workflow: enroll, ingest captures, triage a stranger, report.

Builds a throwaway deployment under a temp directory, exactly what the CLI
(`ams3d serve` / `ams3d ingest-file` / `ams3d report`) operates on.

Run:  python demos/05_attendance_service.py
"""

import tempfile
from datetime import date
from pathlib import Path

from ams3d import calibrate_threshold, format_off, generate_identity
from ams3d.service import CaptureEvent, ServiceState, load_config
from ams3d.synth import apply_expression

root = Path(tempfile.mkdtemp(prefix="ams3d-demo-"))
(root / "calendar.txt").write_text("2026-03-02\n2026-03-03\n2026-03-04\n")
(root / "scans").mkdir()
(root / "ams.conf").write_text(
    "calendar_path = calendar.txt\n"
    "gallery_path = students.jsonl\n"
    "stranger_path = strangers.jsonl\n"
    "ledger_path = attendance.jsonl\n"
    "journal_path = journal.jsonl\n"
    "scan_archive_dir = scans\n"
    "timezone = Asia/Kolkata\n"
)

state = ServiceState(load_config(root / "ams.conf"))

# Enroll two students, each with a neutral and an expression scan.
for i, seed in enumerate((101, 202)):
    base = generate_identity(seed)
    scans = [base, apply_expression(base, 0.6, seed=seed)]
    record = state.enroll(f"student-{i}", f"roll-{i}", f"+91-{i:05d}",
                          [format_off(s) for s in scans])
    print(f"enrolled {record.name} as id {record.student_id}")

# Threshold from the gallery's own intra-record spread.
tau = calibrate_threshold(state.students.records())
state.matcher_config = state.matcher_config.__class__(
    **{**state.matcher_config.__dict__, "threshold": tau})
print(f"calibrated threshold: {tau:.3e}")

# Morning captures: an enrolled student (bent + at the door twice) and an
# unenrolled visitor.
events = [
    CaptureEvent("c-1", "cam-entry", "2026-03-02T09:00:00+05:30",
                 format_off(apply_expression(generate_identity(101), 0.4, seed=5))),
    CaptureEvent("c-2", "cam-entry", "2026-03-02T12:00:00+05:30",
                 format_off(generate_identity(101))),
    CaptureEvent("c-3", "cam-entry", "2026-03-02T09:02:00+05:30",
                 format_off(generate_identity(999))),
]
for event in events:
    report = state.ingest(event)
    print(f"{event.capture_id}: {report.decision}"
          + (f" student={report.student_id}" if report.student_id else "")
          + (" (marked)" if report.attendance_marked else ""))

# Replays are duplicates, by capture id.
print("replay c-1:", state.ingest(events[0]).decision)

# Triage: the visitor waits as a pending stranger with ranked suggestions.
for row in state.stranger_rows(status="pending"):
    suggested = [s["student_id"] for s in row["suggestions"]]
    print(f"pending stranger {row['stranger_id']} from {row['capture_id']}, "
          f"suggested students: {suggested}")
state.resolve_stranger(1, "confirm")

# Reports: the percentage table and month-wise counts.
for row in state.percentage_rows(date(2026, 3, 2), date(2026, 3, 4)):
    print(f"{row['student_id']}  {row['name']:<12} {row['percentage']}")
print("monthly counts for student 1:", state.monthly_counts(1, 2026))

# Absentees for the day: everyone on the roster without a mark.
for note in state.absentee_batch(date(2026, 3, 2)):
    print(f"absence notification queued: {note.idempotency_key} -> {note.destination}")
print(f"state files live in {root}")
