"""REST surface of the attendance service (JSON bodies, FastAPI)."""

from __future__ import annotations

import os
from datetime import date
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..gallery import DuplicateRollError, GalleryError
from ..attendance import LedgerError
from ..surface import SurfaceError
from .state import CaptureEvent, ServiceError, ServiceState


class EnrollmentBody(BaseModel):
    name: str
    roll_number: str
    parent_contact: str = ""
    scans: list[str] = Field(min_length=1, description="OFF documents, one per scan")


class CaptureBody(BaseModel):
    capture_id: str
    camera_id: str
    timestamp: str
    scan: str


class ResolveBody(BaseModel):
    action: str
    student_id: Optional[int] = None


def _parse_day(value: str, name: str) -> date:
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise HTTPException(status_code=400, detail=f"{name} must be YYYY-MM-DD, got {value!r}")


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="ams3d", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    @app.post("/students", status_code=201)
    def enroll_student(body: EnrollmentBody):
        try:
            record = state.enroll(body.name, body.roll_number, body.parent_contact, body.scans)
        except DuplicateRollError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (GalleryError, SurfaceError, ServiceError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"student_id": record.student_id}

    @app.get("/students/{student_id}")
    def get_student(student_id: int):
        try:
            record = state.students.get(student_id)
        except GalleryError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {
            "student_id": record.student_id,
            "name": record.name,
            "roll_number": record.roll_number,
            "parent_contact": record.parent_contact,
            "enrolled_at": record.enrolled_at,
            "signature_count": len(record.signatures),
            "signature_degree": record.signatures[0].degree,
        }

    @app.post("/captures")
    def ingest_capture(body: CaptureBody):
        event = CaptureEvent(
            capture_id=body.capture_id, camera_id=body.camera_id,
            timestamp=body.timestamp, scan=body.scan,
        )
        return state.ingest(event).to_json_dict()

    @app.get("/attendance/{student_id}")
    def attendance(student_id: int, start: str = Query(alias="from"), to: str = Query()):
        start_day = _parse_day(start, "from")
        end_day = _parse_day(to, "to")
        try:
            return state.attendance_summary(student_id, start_day, end_day)
        except GalleryError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except (LedgerError, ServiceError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/reports/percentages")
    def percentages(start: str = Query(alias="from"), to: str = Query()):
        start_day = _parse_day(start, "from")
        end_day = _parse_day(to, "to")
        try:
            return state.percentage_rows(start_day, end_day)
        except (LedgerError, ServiceError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/reports/monthly/{student_id}")
    def monthly(student_id: int, year: int = Query()):
        try:
            return state.monthly_counts(student_id, year)
        except GalleryError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/strangers")
    def strangers(status: Optional[str] = Query(default=None)):
        if status is not None and status not in ("pending", "linked", "confirmed_stranger"):
            raise HTTPException(status_code=400, detail=f"unknown status filter {status!r}")
        return state.stranger_rows(status=status)

    @app.post("/strangers/{stranger_id}/resolve")
    def resolve(stranger_id: int, body: ResolveBody):
        if body.action not in ("link", "confirm"):
            raise HTTPException(status_code=400, detail=f"unknown action {body.action!r}")
        if body.action == "link" and body.student_id is None:
            raise HTTPException(status_code=400, detail="link requires student_id")
        try:
            report = state.resolve_stranger(stranger_id, body.action, body.student_id)
        except GalleryError as exc:
            detail = str(exc)
            status_code = 404 if "unknown" in detail else 409
            raise HTTPException(status_code=status_code, detail=detail)
        return report.to_json_dict()

    if state.config.console_dir and os.path.isdir(state.config.console_dir):
        app.mount("/console", StaticFiles(directory=state.config.console_dir, html=True),
                  name="console")

    return app
