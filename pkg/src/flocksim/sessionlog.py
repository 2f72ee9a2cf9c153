"""Append-only session logs: line-delimited JSON, one object per line.

Layout: a header line, then records ordered by (tick, kind), then a footer
carrying the final state hash. A crash leaves a valid-but-truncated log
(no footer), which reads back with a warning. Logs are the training-data
source and the replay input, so every field name here is a contract.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable

from .classifier import TrainingExample
from .features import FeatureVector
from .gestures import Gesture
from .modes import ModeId

LOG_FORMAT_VERSION = 1


class LogFormatError(ValueError):
    """Malformed log line, broken ordering, or integrity failure."""


class RecordKind(str, Enum):
    COMMAND = "command"
    TRAINING_LABEL = "training_label"
    SOUND_EVENT = "sound_event"
    SNAPSHOT = "snapshot"


# Within one tick: commands apply first, labels follow their command,
# sound events happen mid-step, the snapshot closes the tick.
KIND_RANK: dict[RecordKind, int] = {
    RecordKind.COMMAND: 0,
    RecordKind.TRAINING_LABEL: 1,
    RecordKind.SOUND_EVENT: 2,
    RecordKind.SNAPSHOT: 3,
}


def canonical_json(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def state_hash(snapshot_dict: dict) -> str:
    return hashlib.sha256(canonical_json(snapshot_dict).encode()).hexdigest()


@dataclass(frozen=True)
class LogRecord:
    tick: int
    kind: RecordKind
    payload: dict

    def to_line_dict(self) -> dict:
        return {"kind": self.kind.value, "tick": self.tick, "payload": self.payload}


@dataclass(frozen=True)
class LogHeader:
    seed: int
    config: dict
    robots: list
    scenario: str | None = None
    started_at: str | None = None
    model: dict | None = None
    version: int = LOG_FORMAT_VERSION

    def to_line_dict(self) -> dict:
        return {
            "kind": "header",
            "version": self.version,
            "seed": self.seed,
            "scenario": self.scenario,
            "started_at": self.started_at,
            "config": self.config,
            "robots": self.robots,
            "model": self.model,
        }

    @classmethod
    def from_line_dict(cls, d: dict) -> "LogHeader":
        return cls(
            seed=int(d["seed"]),
            config=d["config"],
            robots=d["robots"],
            scenario=d.get("scenario"),
            started_at=d.get("started_at"),
            model=d.get("model"),
            version=int(d["version"]),
        )


@dataclass(frozen=True)
class LogFooter:
    final_tick: int
    final_state_hash: str

    def to_line_dict(self) -> dict:
        return {
            "kind": "footer",
            "final_tick": self.final_tick,
            "final_state_hash": self.final_state_hash,
        }


@dataclass
class SessionLog:
    header: LogHeader
    records: list[LogRecord] = field(default_factory=list)
    footer: LogFooter | None = None
    truncated: bool = False

    @property
    def session_id(self) -> str:
        return hashlib.sha256(
            canonical_json(self.header.to_line_dict()).encode()
        ).hexdigest()[:12]

    def by_kind(self, kind: RecordKind) -> list[LogRecord]:
        return [r for r in self.records if r.kind is kind]


class LogWriter:
    """Streams one session to disk. Single-owner: exactly one writer per
    file, records must arrive in (tick, kind) order."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._fh: IO[str] | None = self.path.open("w")
        self._last_key: tuple[int, int] | None = None

    def write_header(self, header: LogHeader) -> None:
        self._write_line(header.to_line_dict())

    def write_record(self, record: LogRecord) -> None:
        key = (record.tick, KIND_RANK[record.kind])
        if self._last_key is not None and key < self._last_key:
            raise LogFormatError(f"record out of order: tick {record.tick} {record.kind.value}")
        self._last_key = key
        self._write_line(record.to_line_dict())

    def write_footer(self, footer: LogFooter) -> None:
        self._write_line(footer.to_line_dict())

    def _write_line(self, d: dict) -> None:
        assert self._fh is not None, "writer already closed"
        self._fh.write(canonical_json(d) + "\n")

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "LogWriter":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def read_log(path: str | Path) -> SessionLog:
    """Parse and validate a session log.

    Checks line syntax, record ordering, and (when a footer is present)
    that the footer hash matches the last snapshot record. A missing
    footer marks the log truncated and emits a warning instead of failing.
    """
    header: LogHeader | None = None
    records: list[LogRecord] = []
    footer: LogFooter | None = None
    last_key: tuple[int, int] | None = None
    last_snapshot: LogRecord | None = None

    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or "kind" not in obj:
                raise LogFormatError(f"line {lineno}: missing 'kind'")
            kind = obj["kind"]
            if kind == "header":
                if header is not None:
                    raise LogFormatError(f"line {lineno}: duplicate header")
                if obj.get("version") != LOG_FORMAT_VERSION:
                    raise LogFormatError(
                        f"line {lineno}: log version {obj.get('version')} unsupported"
                    )
                try:
                    header = LogHeader.from_line_dict(obj)
                except (KeyError, TypeError, ValueError) as exc:
                    raise LogFormatError(f"line {lineno}: malformed header: {exc}") from exc
                continue
            if header is None:
                raise LogFormatError(f"line {lineno}: expected header first")
            if footer is not None:
                raise LogFormatError(f"line {lineno}: content after footer")
            if kind == "footer":
                try:
                    footer = LogFooter(
                        final_tick=int(obj["final_tick"]),
                        final_state_hash=str(obj["final_state_hash"]),
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise LogFormatError(f"line {lineno}: malformed footer: {exc}") from exc
                continue
            try:
                record = LogRecord(
                    tick=int(obj["tick"]), kind=RecordKind(kind), payload=obj["payload"]
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise LogFormatError(f"line {lineno}: malformed record: {exc}") from exc
            key = (record.tick, KIND_RANK[record.kind])
            if last_key is not None and key < last_key:
                raise LogFormatError(
                    f"line {lineno}: record out of order "
                    f"(tick {record.tick} {record.kind.value})"
                )
            last_key = key
            records.append(record)
            if record.kind is RecordKind.SNAPSHOT:
                last_snapshot = record

    if header is None:
        raise LogFormatError("log has no header")
    truncated = footer is None
    if truncated:
        warnings.warn(f"log {path} has no footer (truncated run?)", stacklevel=2)
    elif last_snapshot is not None:
        if state_hash(last_snapshot.payload) != footer.final_state_hash:
            raise LogFormatError(
                "footer hash does not match the final snapshot record"
            )
    return SessionLog(header=header, records=records, footer=footer, truncated=truncated)


def export_training_data(log: SessionLog) -> list[TrainingExample]:
    """One example per choreographer mode selection recorded in the log."""
    examples = []
    sid = log.session_id
    for rec in log.by_kind(RecordKind.TRAINING_LABEL):
        examples.append(
            TrainingExample(
                features=FeatureVector.from_dict(rec.payload["features"]),
                label=ModeId(rec.payload["label"]),
                tick=rec.tick,
                session_id=sid,
            )
        )
    return examples


def mode_histogram(log: SessionLog) -> dict[ModeId, float]:
    """Seconds spent in each weight mode.

    Snapshot records are decimated, but the writer forces a record on every
    mode change, so attributing each inter-snapshot gap to the newer
    snapshot's mode is exact.
    """
    snaps = log.by_kind(RecordKind.SNAPSHOT)
    if len(snaps) < 2:
        return {}
    dt = 1.0 / float(log.header.config["tick_hz"])
    occupancy: dict[ModeId, float] = {}
    for prev, cur in zip(snaps, snaps[1:]):
        mode = ModeId(cur.payload["active_mode"])
        occupancy[mode] = occupancy.get(mode, 0.0) + (cur.tick - prev.tick) * dt
    return occupancy


def gesture_histogram(log: SessionLog) -> dict[Gesture, int]:
    """Debounced gesture onsets per gesture. Onset ticks always carry a
    snapshot record, so decimation loses nothing."""
    counts: dict[Gesture, int] = {}
    for rec in log.by_kind(RecordKind.SNAPSHOT):
        for onset in rec.payload.get("gesture_onsets", []):
            g = Gesture(onset["gesture"])
            counts[g] = counts.get(g, 0) + 1
    return counts


def iter_snapshot_payloads(log: SessionLog) -> Iterable[dict]:
    for rec in log.by_kind(RecordKind.SNAPSHOT):
        yield rec.payload
