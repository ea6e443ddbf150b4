"""Run configuration shared by the CLI commands.

An optional key=value config file supplies defaults; command-line flags
override it, and built-in defaults fill the rest (flags > file > defaults).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

MODEL_KINDS = ("cnn3d", "lcn_dvector")


@dataclass
class RunConfig:
    zeta: int = 20
    n_dev_speakers: int | None = None
    lr: float = 0.003
    momentum: float = 0.9
    batch: int = 8
    epochs: int = 20
    seed: int = 0
    model: str = "cnn3d"
    corpus_dir: Path | None = None
    checkpoint_path: Path | None = None
    report_dir: Path | None = None

    def validate(self) -> "RunConfig":
        if self.zeta < 1:
            raise ConfigError(f"zeta must be >= 1, got {self.zeta}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"model must be one of {MODEL_KINDS}, got {self.model!r}")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_INT_KEYS = ("zeta", "n_dev_speakers", "batch", "epochs", "seed")
_FLOAT_KEYS = ("lr", "momentum")


def parse_config_file(path) -> dict:
    """key=value lines, '#' comments; keys must be RunConfig fields."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    values: dict = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in ("corpus_dir", "checkpoint_path", "report_dir"):
                values[key] = Path(value)
            else:
                values[key] = value
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values
