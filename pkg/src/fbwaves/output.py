"""CSV, key/value sidecars and run manifests.

Floats are written with 17 significant digits so that every value round-trips
exactly; formatting never depends on the locale.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__

OUTPUT_ENV = "FBWAVES_OUTPUT_DIR"


def fmt(value: Any) -> str:
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    try:
        f = float(value)
    except (TypeError, ValueError):
        return str(value)
    if math.isnan(f):
        return "nan"
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    return format(f, ".17g")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader if row]


def write_kv(path: Path, items: dict[str, Any]) -> Path:
    path = Path(path)
    with path.open("w", encoding="ascii") as fh:
        for key, value in items.items():
            fh.write(f"{key} = {fmt(value)}\n")
    return path


def read_kv(path: Path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="ascii").splitlines():
        if "=" not in line:
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def output_dir(requested: str | os.PathLike | None, default: str) -> Path:
    """Explicit path wins, then the environment override, then ``default``."""
    if requested:
        base = Path(requested)
    elif os.environ.get(OUTPUT_ENV):
        base = Path(os.environ[OUTPUT_ENV]) / default
    else:
        base = Path(default)
    base.mkdir(parents=True, exist_ok=True)
    return base


@dataclass
class RunManifest:
    """Record of one CLI invocation; written once, after all outputs."""

    subcommand: str
    parameters: dict[str, Any]
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)

    def add(self, path: Path) -> Path:
        self.outputs.append(str(path))
        return path

    def write(self, path: Path) -> Path:
        path = Path(path)
        self.outputs.append(str(path))
        payload = {
            "subcommand": self.subcommand,
            "version": __version__,
            "parameters": {k: _jsonable(v) for k, v in self.parameters.items()},
            "inputs": self.inputs,
            "outputs": self.outputs,
            "wall_clock_seconds": time.perf_counter() - self.started,
        }
        # "x" mode: manifests are never overwritten
        with path.open("x", encoding="ascii") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    if isinstance(value, float):
        return fmt(value) if not math.isfinite(value) else value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)
