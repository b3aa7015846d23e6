"""CSV emission and run manifests."""

from __future__ import annotations

import csv
import dataclasses
import datetime as _dt
import io
import json
import sys
from dataclasses import dataclass
from typing import Any, Optional

from . import __version__
from .analytics import FringeScan
from .errors import ParameterError

FRINGE_COLUMNS = ("phase", "detector", "value")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        # shortest round-trip repr: exact on re-read
        return repr(value)
    return str(value)


def _rows(records):
    if isinstance(records, FringeScan):
        records = [records]
    records = list(records)
    if not records:
        raise ParameterError("refusing to write an empty record list")
    if isinstance(records[0], FringeScan):
        rows = []
        for scan in records:
            for detector, counts in ((1, scan.counts1), (2, scan.counts2)):
                rows.extend((p, detector, c) for p, c in zip(scan.phase_points, counts))
        return FRINGE_COLUMNS, rows
    header = tuple(f.name for f in dataclasses.fields(records[0]))
    return header, [tuple(getattr(r, name) for name in header) for r in records]


def format_csv(records) -> str:
    header, rows = _rows(records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([_cell(v) for v in row] for row in rows)
    return buf.getvalue()


def emit_csv(records, path=None) -> None:
    """Write records as CSV with a header row; ``path`` None or ``"-"`` means stdout.

    Dataclass records give one column per field. A :class:`FringeScan` is
    written in long format with columns ``phase, detector, value``.
    """
    text = format_csv(records)  # validates before touching the filesystem
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


@dataclass
class RunManifest:
    command: str
    options: dict
    config: str
    seed: int
    tool_version: str = __version__
    timestamp: str = ""

    def __post_init__(self):
        if not self.timestamp:
            self.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


def manifest_path(data_path: str) -> str:
    return f"{data_path}.manifest.json"


def write_manifest(manifest: RunManifest, data_path: str) -> str:
    path = manifest_path(data_path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(manifest.to_json())
    return path


def read_manifest(path: str) -> RunManifest:
    with open(path, encoding="utf-8") as fh:
        return RunManifest.from_json(fh.read())
