"""Experiment configuration files.

Grammar (INI, read with :mod:`configparser`)::

    [section]
    key = value          ; or # starts a comment
    list_key = 1, 2, 3   ; comma-separated lists

Every experiment declares its sections and keys with defaults; an unknown
section or key, or a value that does not parse, is a :class:`ConfigError`.
The ``[run]`` section (``seed``, ``repetitions``, ``averaging``) is shared.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping


class ConfigError(ValueError):
    """Malformed or unknown configuration."""


@dataclass(frozen=True)
class Field:
    parse: Callable[[str], Any]
    default: Any
    doc: str = ""


def _finite(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"{x} is not finite")
    return x


def real(text: str) -> float:
    return _finite(float(text))


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise ValueError("must be >= 1")
    return v


def nonnegative_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise ValueError("must be >= 0")
    return v


def real_list(text: str) -> tuple[float, ...]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(real(t) for t in items)


def int_list(text: str) -> tuple[int, ...]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(positive_int(t) for t in items)


def choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return t

    return parse


def fixed(value: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text.strip() != value:
            raise ValueError(f"this experiment sweeps {value!r}")
        return value

    return parse


Schema = Mapping[str, Mapping[str, Field]]

RUN_SECTION: Mapping[str, Field] = {
    "seed": Field(nonnegative_int, 20240601, "master seed for all random streams"),
    "repetitions": Field(positive_int, 15, "sampled chain runs averaged per point"),
    "averaging": Field(choice("sampled", "exact"), "sampled", "chain averaging: sampled runs or exact outcome enumeration"),
}


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    values: Mapping[str, Mapping[str, Any]]

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    @property
    def seed(self) -> int:
        return int(self.values["run"]["seed"])

    @property
    def repetitions(self) -> int:
        return int(self.values["run"]["repetitions"])

    def canonical(self) -> str:
        """Resolved configuration as sorted ``section.key = value`` lines."""
        lines = [f"experiment = {self.name}"]
        for sec in sorted(self.values):
            for key in sorted(self.values[sec]):
                lines.append(f"{sec}.{key} = {_fmt(self.values[sec][key])}")
        return "\n".join(lines) + "\n"

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def full_schema(schema: Schema) -> dict[str, Mapping[str, Field]]:
    out = {"run": RUN_SECTION}
    out.update(schema)
    return out


def load_config(
    name: str,
    schema: Schema,
    path: str | Path | None = None,
    seed: int | None = None,
) -> ExperimentConfig:
    """Resolve defaults, the optional file at ``path`` and a seed override."""
    sch = full_schema(schema)
    values = {sec: {k: f.default for k, f in fields.items()} for sec, fields in sch.items()}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
        parser.optionxform = str  # keys are case-sensitive
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        for sec in parser.sections():
            if sec == "experiment":
                for key, text in parser.items(sec):
                    if key != "name":
                        raise ConfigError(f"unknown key [experiment] {key}")
                    if text.strip() != name:
                        raise ConfigError(f"config is for experiment {text.strip()!r}, not {name!r}")
                continue
            if sec not in sch:
                raise ConfigError(f"unknown section [{sec}] for experiment {name!r}")
            for key, text in parser.items(sec):
                if key not in sch[sec]:
                    raise ConfigError(f"unknown key [{sec}] {key}")
                try:
                    values[sec][key] = sch[sec][key].parse(text)
                except ValueError as exc:
                    raise ConfigError(f"bad value for [{sec}] {key} = {text!r}: {exc}") from exc
    if seed is not None:
        if seed < 0:
            raise ConfigError("seed must be >= 0")
        values["run"]["seed"] = int(seed)
    return ExperimentConfig(name, values)
