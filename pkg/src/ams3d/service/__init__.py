from .config import ConfigError, ServiceConfig, load_config, parse_config
from .state import CaptureEvent, PipelineReport, ServiceError, ServiceState, parse_timestamp
from .cli import build_parser, main, run_cli

__all__ = [
    "CaptureEvent",
    "ConfigError",
    "PipelineReport",
    "ServiceConfig",
    "ServiceError",
    "ServiceState",
    "build_parser",
    "load_config",
    "main",
    "parse_config",
    "parse_timestamp",
    "run_cli",
]
