"""Flat key=value configuration for the attendance service.

Relative paths are resolved against the config file's directory. The
``AMS_CONFIG`` environment variable supplies the default config path for the
CLI; there is no other environment magic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

from ..matcher import MatcherConfig


class ConfigError(ValueError):
    pass


@dataclass
class ServiceConfig:
    degree: int = 5
    crop_radius_mm: float = 80.0
    sample_count: int = 200
    threshold: float = 0.0
    cca_enabled: bool = False
    cca_k: int = 4
    timezone: str = "UTC"
    calendar_path: str = "calendar.txt"
    gallery_path: str = "students.jsonl"
    stranger_path: str = "strangers.jsonl"
    ledger_path: str = "attendance.jsonl"
    journal_path: str = "journal.jsonl"
    scan_archive_dir: str = "scans"
    sms_webhook_url: str = ""
    listen_addr: str = "127.0.0.1:8642"
    console_dir: str = ""

    def matcher_config(self) -> MatcherConfig:
        return MatcherConfig(
            degree=self.degree,
            crop_radius_mm=self.crop_radius_mm,
            sample_count=self.sample_count,
            threshold=self.threshold,
            cca_enabled=self.cca_enabled,
            cca_k=self.cca_k,
        )


_PATH_KEYS = ("calendar_path", "gallery_path", "stranger_path", "ledger_path",
              "journal_path", "scan_archive_dir", "console_dir")
_BOOL_TRUE = ("true", "yes", "1", "on")
_BOOL_FALSE = ("false", "no", "0", "off")


def parse_config(text: str, base_dir: str = ".") -> ServiceConfig:
    """Parse ``key = value`` lines; '#' starts a comment, blanks are ignored."""
    field_types = {f.name: f.type for f in fields(ServiceConfig)}
    values = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {no}: expected 'key = value', got {line!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in field_types:
            raise ConfigError(f"line {no}: unknown config key {key!r}")
        if key in values:
            raise ConfigError(f"line {no}: duplicate config key {key!r}")
        values[key] = (no, val)

    kwargs = {}
    for key, (no, val) in values.items():
        ftype = field_types[key]
        try:
            if ftype in ("int", int):
                kwargs[key] = int(val)
            elif ftype in ("float", float):
                kwargs[key] = float(val)
            elif ftype in ("bool", bool):
                low = val.lower()
                if low in _BOOL_TRUE:
                    kwargs[key] = True
                elif low in _BOOL_FALSE:
                    kwargs[key] = False
                else:
                    raise ValueError(f"not a boolean: {val!r}")
            else:
                kwargs[key] = val
        except ValueError as exc:
            raise ConfigError(f"line {no}: bad value for {key}: {exc}")

    cfg = ServiceConfig(**kwargs)
    for key in _PATH_KEYS:
        val = getattr(cfg, key)
        if val and not os.path.isabs(val):
            setattr(cfg, key, os.path.normpath(os.path.join(base_dir, val)))
    try:
        cfg.matcher_config()
    except ValueError as exc:
        raise ConfigError(str(exc))
    return cfg


def load_config(path: str) -> ServiceConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))
