"""Service configuration: key=value file with NELS_-prefixed env overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from nels.errors import ConfigurationError

ENV_PREFIX = "NELS_"


@dataclass
class ServiceConfig:
    listen_addr: str = "127.0.0.1:8080"
    index_path: str = "index.ndjson"
    model_path: str = "model.nels"
    embeddings_path: str = "embeddings.txt"
    source: str = "local:."

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        addr = self.listen_addr
        if ":" not in addr:
            raise ConfigurationError(f"listen_addr needs host:port, got {addr!r}")
        try:
            return int(addr.rsplit(":", 1)[1])
        except ValueError:
            raise ConfigurationError(f"bad port in listen_addr {addr!r}") from None


def load_config(path: Optional[str | Path] = None) -> ServiceConfig:
    """Read key=value lines, then apply NELS_<KEY> environment overrides."""
    known = {f.name for f in fields(ServiceConfig)}
    values: dict[str, str] = {}
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            key = key.strip()
            if key not in known:
                raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value.strip()
    for key in known:
        env = os.environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            values[key] = env
    return ServiceConfig(**values)
