"""Command-line entry points: serve, enroll, ingest-file, report, calibrate, cca, bench."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import date

import numpy as np

from ..attendance import LedgerError, QUEUED
from ..cca import fit_cca
from ..gallery import GalleryError
from ..matcher import MatcherConfig, calibrate_threshold
from ..surface import SurfaceError
from .config import ConfigError, ServiceConfig, load_config
from .state import CaptureEvent, ServiceError, ServiceState


def _state_from(args) -> ServiceState:
    config_path = args.config or os.environ.get("AMS_CONFIG")
    if not config_path:
        raise ConfigError("no config file: pass --config or set AMS_CONFIG")
    return ServiceState(load_config(config_path))


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    state = _state_from(args)
    host, _, port = state.config.listen_addr.rpartition(":")
    app = create_app(state)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def _cmd_enroll(args) -> int:
    state = _state_from(args)
    documents = []
    for path in args.scans:
        with open(path, "r", encoding="utf-8") as fh:
            documents.append(fh.read())
    record = state.enroll(args.name, args.roll, args.contact, documents)
    print(f"enrolled student_id={record.student_id} roll={record.roll_number} "
          f"signatures={len(record.signatures)}")
    return 0


def _cmd_ingest_file(args) -> int:
    state = _state_from(args)
    if os.path.isdir(args.path):
        paths = sorted(
            os.path.join(args.path, name)
            for name in os.listdir(args.path)
            if name.endswith(".json")
        )
    else:
        paths = [args.path]
    if not paths:
        print("no capture files found", file=sys.stderr)
        return 1
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            event = CaptureEvent.from_json_dict(json.load(fh))
        report = state.ingest(event)
        line = {k: v for k, v in report.to_json_dict().items()
                if k != "stage_timings" and v not in (None, [])}
        print(json.dumps(line, sort_keys=True))
    return 0


def _cmd_report(args) -> int:
    state = _state_from(args)
    if args.absentees:
        day = date.fromisoformat(args.absentees)
        batch = state.absentee_batch(day)
        if args.dispatch:
            results = state.dispatch_absentees(day)
            for note in results:
                print(f"{note.idempotency_key} -> {note.status}"
                      + (f" ({note.reason})" if note.reason else ""))
        else:
            for note in batch:
                print(f"absent {note.student_id} on {note.date.isoformat()} "
                      f"notify {note.destination}")
            print(f"{len(batch)} absentee(s)")
        return 0
    if args.monthly:
        if args.student is None or args.year is None:
            print("--monthly needs --student and --year", file=sys.stderr)
            return 2
        counts = state.monthly_counts(args.student, args.year)
        for month in range(1, 13):
            print(f"{args.year}-{month:02d}: {counts[str(month)]}")
        return 0
    start = date.fromisoformat(args.start)
    end = date.fromisoformat(args.end)
    if args.student is not None:
        summary = state.attendance_summary(args.student, start, end)
        print(summary["percentage"])
        return 0
    for row in state.percentage_rows(start, end):
        print(f"{row['student_id']}\t{row['name']}\t{row['percentage']}")
    return 0


def _cmd_calibrate(args) -> int:
    state = _state_from(args)
    tau = calibrate_threshold(state.students.records(), margin=args.margin)
    print(f"threshold = {tau!r}")
    if args.write:
        config_path = args.config or os.environ.get("AMS_CONFIG")
        with open(config_path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        out, replaced = [], False
        for line in lines:
            key = line.split("=")[0].strip() if "=" in line else None
            if key == "threshold":
                out.append(f"threshold = {tau!r}")
                replaced = True
            else:
                out.append(line)
        if not replaced:
            out.append(f"threshold = {tau!r}")
        with open(config_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(out) + "\n")
        print(f"wrote threshold to {config_path}")
    return 0


def _read_csv_matrix(path: str) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                if rows:
                    raise
                continue  # tolerate one header line
    if not rows:
        raise ServiceError(f"{path}: no numeric rows")
    return np.array(rows)


def _cmd_cca(args) -> int:
    p = _read_csv_matrix(args.p_csv)
    q = _read_csv_matrix(args.q_csv)
    model = fit_cca(p, q, args.k)
    prefix = args.out_prefix
    with open(f"{prefix}_correlations.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair", "correlation"])
        for i, rho in enumerate(model.correlations, start=1):
            writer.writerow([i, repr(float(rho))])
    for name, directions in (("p", model.directions_p), ("q", model.directions_q)):
        with open(f"{prefix}_directions_{name}.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            for row in directions:
                writer.writerow([repr(float(x)) for x in row])
    print(f"correlations: {[round(float(r), 6) for r in model.correlations]}")
    print(f"wrote {prefix}_correlations.csv, {prefix}_directions_p.csv, {prefix}_directions_q.csv")
    return 0


def _cmd_bench(args) -> int:
    from ..synth import run_benchmark

    if args.config:
        cfg = load_config(args.config).matcher_config()
    else:
        cfg = MatcherConfig()
    report = run_benchmark(args.identities, args.expressions, cfg, seed=args.seed)
    report.save_json(f"{args.out_prefix}.json")
    report.save_distances_csv(f"{args.out_prefix}_distances.csv")
    print(f"rank-1 accuracy: {report.rank1_accuracy}")
    print(f"intra mean {report.intra_stats['mean']:.6g}, inter mean {report.inter_stats['mean']:.6g}")
    print(f"wrote {args.out_prefix}.json and {args.out_prefix}_distances.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ams3d",
        description="3D-face attendance: enrollment, capture ingestion, reports",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="config file (default: $AMS_CONFIG)")

    p = sub.add_parser("serve", help="run the REST service")
    add_config(p)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("enroll", help="enroll a student from OFF scan files")
    add_config(p)
    p.add_argument("--name", required=True)
    p.add_argument("--roll", required=True)
    p.add_argument("--contact", default="")
    p.add_argument("scans", nargs="+", help="OFF scan files (>=1)")
    p.set_defaults(func=_cmd_enroll)

    p = sub.add_parser("ingest-file", help="ingest capture event JSON files")
    add_config(p)
    p.add_argument("path", help="capture .json file or directory of them")
    p.set_defaults(func=_cmd_ingest_file)

    p = sub.add_parser("report", help="attendance reports and absentee dispatch")
    add_config(p)
    p.add_argument("--student", type=int)
    p.add_argument("--from", dest="start", help="range start YYYY-MM-DD")
    p.add_argument("--to", dest="end", help="range end YYYY-MM-DD")
    p.add_argument("--monthly", action="store_true", help="month-wise counts")
    p.add_argument("--year", type=int)
    p.add_argument("--absentees", metavar="DATE", help="list absentees for DATE")
    p.add_argument("--dispatch", action="store_true", help="send absentee SMS webhooks")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("calibrate", help="derive a match threshold from the gallery")
    add_config(p)
    p.add_argument("--margin", type=float, default=1.5)
    p.add_argument("--write", action="store_true", help="write threshold back to the config")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("cca", help="canonical correlation analysis of two CSV matrices")
    p.add_argument("p_csv")
    p.add_argument("q_csv")
    p.add_argument("-k", type=int, required=True, help="number of canonical pairs")
    p.add_argument("--out-prefix", default="cca")
    p.set_defaults(func=_cmd_cca)

    p = sub.add_parser("bench", help="run the synthetic recognition benchmark")
    add_config(p)
    p.add_argument("--identities", type=int, default=10)
    p.add_argument("--expressions", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", default="bench")
    p.set_defaults(func=_cmd_bench)

    return parser


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ServiceError, GalleryError, SurfaceError, LedgerError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
