"""Service configuration: defaults, then YAML file, then environment.

Environment variables use the ``IMGPIVOT_`` prefix and win over the file,
which wins over built-in defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

import yaml

_ENV_PREFIX = "IMGPIVOT_"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    data_dir: str = "./campaign-data"
    lease_ttl: float = 900.0
    lease_slack: int = 1
    ui_dir: str | None = None

    def validate(self) -> "ServiceConfig":
        if self.port < 1 or self.port > 65535:
            raise ValueError(f"port out of range: {self.port}")
        if self.lease_ttl <= 0:
            raise ValueError(f"lease_ttl must be positive, got {self.lease_ttl}")
        if self.lease_slack < 0:
            raise ValueError(f"lease_slack must be >= 0, got {self.lease_slack}")
        return self


def load_config(path=None, environ=None) -> ServiceConfig:
    environ = os.environ if environ is None else environ
    values: dict = {}
    if path is not None:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        if not isinstance(raw, dict):
            raise ValueError(f"config file {path} must hold a mapping")
        known = {f.name for f in fields(ServiceConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(raw)
    for f in fields(ServiceConfig):
        env_value = environ.get(_ENV_PREFIX + f.name.upper())
        if env_value is not None:
            values[f.name] = env_value
    config = ServiceConfig()
    for f in fields(ServiceConfig):
        if f.name not in values:
            continue
        value = values[f.name]
        if value is not None:
            if f.name in ("port", "lease_slack"):
                value = int(value)
            elif f.name == "lease_ttl":
                value = float(value)
            else:
                value = str(value)
        setattr(config, f.name, value)
    return config.validate()
