"""Parsing of alarm logs and placement of events on a uniform time grid.

A log is a CSV with one ALM or RTN message per row::

    tag,timestamp,kind,event_type
    FI101,1000,HI,ALM
    FI101,1012,HI,RTN

Timestamps are either epoch seconds (integer or decimal) or ISO-8601; the
format is detected once per file from the first non-empty value. Times are
stored as integer milliseconds.
"""

from __future__ import annotations

import csv
import io
import math
import re
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, TextIO

KINDS = ("HH", "HI", "LO", "LL")
EVENT_TYPES = ("ALM", "RTN")
DEFAULT_SCHEMA = {
    "tag": "tag",
    "timestamp": "timestamp",
    "kind": "kind",
    "event_type": "event_type",
}


class AlarmLogError(ValueError):
    """A file-level problem that prevents reading the log at all."""


class Mode(str, Enum):
    POINT = "point-based"
    INTERVAL = "interval-based"


@dataclass(frozen=True)
class Diagnostic:
    line: Optional[int]
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"{self.severity}: {where}{self.message}"


@dataclass(frozen=True)
class AlarmEvent:
    tag_id: str
    timestamp_ms: int
    kind: str
    event_type: str

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown alarm kind {self.kind!r}")
        if self.event_type not in EVENT_TYPES:
            raise ValueError(f"unknown event type {self.event_type!r}")
        if self.timestamp_ms < 0:
            raise ValueError("timestamp must be non-negative")

    @property
    def timestamp(self) -> float:
        """Seconds since epoch."""
        return self.timestamp_ms / 1000.0


@dataclass(frozen=True)
class TimeGrid:
    """``length`` samples starting at ``start_ms``, ``resolution_ms`` apart."""

    start_ms: int
    resolution_ms: int
    length: int

    def __post_init__(self) -> None:
        if self.resolution_ms <= 0:
            raise ValueError("grid resolution must be positive")
        if self.length < 1:
            raise ValueError("grid length must be at least 1")

    @classmethod
    def from_seconds(cls, start: float, resolution: float, length: int) -> "TimeGrid":
        return cls(round(start * 1000), round(resolution * 1000), length)

    @property
    def start(self) -> float:
        return self.start_ms / 1000.0

    @property
    def resolution(self) -> float:
        return self.resolution_ms / 1000.0

    def time_of(self, index: int) -> float:
        return (self.start_ms + index * self.resolution_ms) / 1000.0

    def index_of(self, timestamp_ms: int) -> int:
        """Sample containing ``timestamp_ms``; ``ValueError`` when off-grid."""
        idx = (timestamp_ms - self.start_ms) // self.resolution_ms
        if not 0 <= idx < self.length:
            raise ValueError(f"time {timestamp_ms / 1000.0}s lies outside the grid")
        return idx


@dataclass(frozen=True)
class TagLog:
    tag_id: str
    events: tuple[AlarmEvent, ...]
    mode: Mode


def _parse_epoch(text: str) -> int:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite timestamp {text!r}")
    return round(value * 1000)


_FRACTION = re.compile(r"(T\d{2}:\d{2}:\d{2})\.(\d+)")


def _parse_iso(text: str) -> int:
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    # fromisoformat on 3.10 wants exactly 3 or 6 fraction digits
    text = _FRACTION.sub(lambda m: f"{m.group(1)}.{m.group(2)[:6]:0<6}", text.replace(" ", "T", 1))
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return round(dt.timestamp() * 1000)


def _looks_numeric(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def parse_alarm_log(
    data: bytes | str | TextIO,
    schema: Optional[Mapping[str, str]] = None,
) -> tuple[list[AlarmEvent], list[Diagnostic]]:
    """Parse an alarm-log CSV into events, in file order.

    ``schema`` maps the four logical fields (``tag``, ``timestamp``, ``kind``,
    ``event_type``) to header names. Each bad row produces a
    :class:`Diagnostic` naming its line number instead of an event; a missing
    header or column raises :class:`AlarmLogError`.
    """
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    fh = io.StringIO(data) if isinstance(data, str) else data
    reader = csv.reader(fh)
    header = next(reader, None)
    if not header:
        raise AlarmLogError("alarm log has no header row")
    header = [h.strip() for h in header]
    cols = {}
    for field_name, column in schema.items():
        if column not in header:
            raise AlarmLogError(f"missing column {column!r} (for {field_name})")
        cols[field_name] = header.index(column)

    events: list[AlarmEvent] = []
    diagnostics: list[Diagnostic] = []
    parse_time = None
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) < len(header):
                raise ValueError(f"expected {len(header)} fields, got {len(row)}")
            tag, ts, kind, etype = (row[cols[k]].strip() for k in ("tag", "timestamp", "kind", "event_type"))
            if not tag:
                raise ValueError("empty tag")
            if parse_time is None:
                parse_time = _parse_epoch if _looks_numeric(ts) else _parse_iso
            try:
                ts_ms = parse_time(ts)
            except (ValueError, OverflowError):
                raise ValueError(f"malformed timestamp {ts!r}") from None
            events.append(AlarmEvent(tag, ts_ms, kind.upper(), etype.upper()))
        except ValueError as exc:
            diagnostics.append(Diagnostic(line, str(exc)))
    return events, diagnostics


def read_alarm_log(path, schema=None) -> tuple[list[AlarmEvent], list[Diagnostic]]:
    with open(path, "rb") as fh:
        return parse_alarm_log(fh.read(), schema)


def _format_seconds(ms: int) -> str:
    return str(ms // 1000) if ms % 1000 == 0 else f"{ms / 1000:.3f}"


def serialize_alarm_log(events: Iterable[AlarmEvent]) -> str:
    """Write events in the default CSV layout (epoch-second timestamps)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DEFAULT_SCHEMA.values())
    for e in events:
        w.writerow([e.tag_id, _format_seconds(e.timestamp_ms), e.kind, e.event_type])
    return buf.getvalue()


def group_by_tag(events: Sequence[AlarmEvent]) -> tuple[dict[str, TagLog], list[Diagnostic]]:
    """Split events by tag, sort them in time and classify each tag's mode.

    An RTN is kept only if an ALM of the same kind is active when it
    arrives; otherwise it is dropped with a warning. Repeated ALMs without an
    intervening RTN are kept (they count as separate annunciations in
    point-based sequences and are merged in interval-based ones).
    """
    by_tag: dict[str, list[tuple[int, AlarmEvent]]] = {}
    for pos, e in enumerate(events):
        by_tag.setdefault(e.tag_id, []).append((pos, e))

    logs: dict[str, TagLog] = {}
    diagnostics: list[Diagnostic] = []
    for tag, items in by_tag.items():
        items.sort(key=lambda it: (it[1].timestamp_ms, it[0]))
        active = {k: False for k in KINDS}
        kept = []
        for _, e in items:
            if e.event_type == "ALM":
                active[e.kind] = True
            elif active[e.kind]:
                active[e.kind] = False
            else:
                diagnostics.append(
                    Diagnostic(
                        None,
                        f"{tag} {e.kind}: RTN at {e.timestamp}s has no active ALM; dropped",
                        "warning",
                    )
                )
                continue
            kept.append(e)
        mode = Mode.INTERVAL if any(e.event_type == "RTN" for e in kept) else Mode.POINT
        logs[tag] = TagLog(tag, tuple(kept), mode)
    return logs, diagnostics


def infer_grid(logs: Iterable[TagLog], resolution: float = 1.0) -> TimeGrid:
    """Smallest grid covering every event, padded by one sample at each end."""
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    res_ms = round(resolution * 1000)
    if res_ms <= 0:
        raise ValueError("resolution must be at least 1 ms")
    times = [e.timestamp_ms for log in logs for e in log.events]
    if not times:
        raise ValueError("empty log")
    lo, hi = min(times), max(times)
    start = lo - res_ms
    length = (hi - lo) // res_ms + 3
    return TimeGrid(start, res_ms, length)


def print_diagnostics(diagnostics: Iterable[Diagnostic], stream=None) -> None:
    stream = stream or sys.stderr
    for d in diagnostics:
        print(d, file=stream)
