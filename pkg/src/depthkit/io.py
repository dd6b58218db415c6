"""CSV/JSON reading and writing with round-trip float formatting, and run manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .datagen import RNG_ALGORITHM
from .exceptions import DepthError
from .geometry import Dataset

__all__ = [
    "RunManifest",
    "file_digest",
    "format_number",
    "read_csv",
    "to_jsonable",
    "write_csv",
    "write_json",
]


def format_number(x) -> str:
    """Shortest round-trip decimal for floats; plain digits for integers."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_csv(path) -> Dataset:
    """Read a numeric CSV; a non-numeric first row is taken as the header.

    Lines starting with ``#`` are comments.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DepthError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if not ln.lstrip().startswith("#")]
    rows = [r for r in csv.reader(lines) if r and any(c.strip() for c in r)]
    if not rows:
        raise DepthError(f"{path}: no data rows")
    labels = ()
    if not all(_is_number(c) for c in rows[0]):
        labels = tuple(c.strip() for c in rows[0])
        rows = rows[1:]
    if not rows:
        raise DepthError(f"{path}: header but no data rows")
    width = len(rows[0])
    values = []
    for k, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DepthError(f"{path}: data row {k}: expected {width} columns, got {len(row)}")
        try:
            values.append([float(c) for c in row])
        except ValueError as exc:
            raise DepthError(f"{path}: data row {k}: non-numeric value ({exc})") from exc
    return Dataset(np.array(values), labels)


def _csv_text(header, rows, comment=None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, comment: str | None = None) -> None:
    """Write rows with round-trip number formatting; ``path=None`` or ``'-'`` means stdout.

    An optional ``comment`` becomes a leading ``# ...`` line.
    """
    text = _csv_text(header, rows, comment)
    if path is None or str(path) == "-":
        import sys
        sys.stdout.write(text)
        return
    Path(path).write_text(text, newline="")


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def write_json(path, obj) -> None:
    text = json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, newline="")


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


@dataclass
class RunManifest:
    """Everything needed to reproduce a CLI run: command, arguments, seeds, input digests."""

    command: str
    argv: list
    params: dict
    seeds: list = field(default_factory=list)
    input_digests: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    version: str = __version__
    rng: str = RNG_ALGORITHM

    @classmethod
    def for_inputs(cls, command, argv, params, seeds=(), inputs=()):
        digests = {os.fspath(p): file_digest(p) for p in inputs if p}
        return cls(command=command, argv=list(argv), params=dict(params),
                   seeds=list(seeds), input_digests=digests)

    def write(self, path) -> None:
        write_json(path, asdict(self))

    @classmethod
    def read(cls, path) -> "RunManifest":
        try:
            doc = json.loads(Path(path).read_text())
            return cls(**doc)
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise DepthError(f"cannot read manifest {path}: {exc}") from exc

    def check_inputs(self) -> None:
        """Raise if any recorded input file changed since the run."""
        for p, digest in self.input_digests.items():
            if file_digest(p) != digest:
                raise DepthError(f"input {p} changed since the manifest was written")
