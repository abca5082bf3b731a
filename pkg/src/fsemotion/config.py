"""Simulation configuration: defaults, flat ``key = value`` files, validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

__all__ = ["ConfigError", "SimConfig", "load_config", "parse_config_text"]

PIPELINE_CHOICES = ("fse_aware", "fse_agnostic", "both")
PHANTOM_CHOICES = ("procedural", "file")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    # 320 x 288 acquisition matrix with the 288 axis phase encoded
    ny: int = 288
    nx: int = 320
    etl: int = 16
    esp_ms: float = 12.0
    n_events: int = 9
    sigma_deg: float = 2.0
    sigma_noise: float = 0.0
    n_samples: int = 819
    base_seed: int = 0
    pipeline: str = "both"
    phantom: str = "procedural"
    phantom_path: Optional[str] = None

    def __post_init__(self):
        self.validate()

    @property
    def n_tr(self) -> int:
        return self.ny // self.etl

    @property
    def pipelines(self) -> tuple[str, ...]:
        return ("fse_aware", "fse_agnostic") if self.pipeline == "both" else (self.pipeline,)

    def validate(self) -> None:
        for name in ("ny", "nx", "etl", "n_events", "n_samples"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.base_seed < 0:
            raise ConfigError(f"base_seed must be non-negative, got {self.base_seed}")
        if self.ny % self.etl:
            raise ConfigError(f"etl={self.etl} must divide ny={self.ny}")
        if self.n_tr % self.n_events:
            raise ConfigError(f"n_events={self.n_events} must divide the TR count {self.n_tr}")
        if not self.esp_ms > 0:
            raise ConfigError(f"esp_ms must be positive, got {self.esp_ms}")
        if not (self.sigma_deg >= 0 and self.sigma_noise >= 0):
            raise ConfigError("sigma_deg and sigma_noise must be non-negative")
        if self.pipeline not in PIPELINE_CHOICES:
            raise ConfigError(f"pipeline must be one of {PIPELINE_CHOICES}, got {self.pipeline!r}")
        if self.phantom not in PHANTOM_CHOICES:
            raise ConfigError(f"phantom must be one of {PHANTOM_CHOICES}, got {self.phantom!r}")
        if self.phantom == "file" and not self.phantom_path:
            raise ConfigError("phantom = file needs phantom_path")

    def replace(self, **changes) -> "SimConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)

    def items(self) -> dict:
        """Ordered ``name -> text`` mapping, as echoed into manifests."""
        return {f.name: _fmt(getattr(self, f.name)) for f in dataclasses.fields(self)}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _coerce(name: str, text: str):
    field = {f.name: f for f in dataclasses.fields(SimConfig)}[name]
    kind = field.type
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r} as {kind}") from None
    return text or None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    known = {f.name for f in dataclasses.fields(SimConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        if key not in known:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, value)
    return values


def load_config(path=None, **overrides) -> SimConfig:
    """Defaults, then the file at ``path``, then non-``None`` ``overrides``."""
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text(), str(path)))
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SimConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
