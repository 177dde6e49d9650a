import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

from src.constants import TRACE_SCHEMA_VERSION
from src.exceptions import SetFileError
from src.utils import jsonable


@dataclass
class TraceEvent:
    step: int
    branch: str
    quantities: Dict[str, Any] = field(default_factory=dict)
    certificate: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "branch": self.branch,
            "quantities": jsonable(self.quantities),
            "certificate": jsonable(self.certificate),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TraceEvent":
        return cls(
            step=int(data["step"]),
            branch=str(data["branch"]),
            quantities=dict(data.get("quantities") or {}),
            certificate=data.get("certificate"),
        )


class EventLogger:
    """
    Ordered record of the branches an engine run takes.

    Events are indexed by their position rather than by wall-clock time, so two runs
    on the same input serialize to identical bytes.
    """

    def __init__(self, begin: str = None):
        self._started = False
        self._events: List[TraceEvent] = []
        if begin:
            self.start_event(begin)

    def start_event(self, label: str = "start", **quantities):
        """Clears the log and records the opening event."""
        self._started = True
        self._events.clear()
        self._events.append(TraceEvent(0, label, dict(quantities)))

    def log_event(self, branch: str, certificate: Optional[dict] = None, **quantities) -> TraceEvent:
        if not self._started:
            raise RuntimeError("EventLogger must be started using start_event() before logging events.")
        event = TraceEvent(len(self._events), branch, dict(quantities), certificate)
        self._events.append(event)
        return event

    @property
    def started(self) -> bool:
        return self._started

    def get_events(self) -> List[TraceEvent]:
        return self._events

    def get_event(self, branch: str) -> Optional[TraceEvent]:
        """Returns the first event recorded for a branch."""
        for event in self._events:
            if event.branch == branch:
                return event
        return None

    def branches(self) -> List[str]:
        return [event.branch for event in self._events]

    def to_dict(self) -> list[dict]:
        return [event.to_dict() for event in self._events]

    @classmethod
    def from_dict(cls, data: list[dict]) -> "EventLogger":
        logger = cls()
        logger._started = True
        logger._events = [TraceEvent.from_dict(item) for item in data if isinstance(item, dict)]
        return logger

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def to_jsonl(self) -> str:
        return "\n".join(canonical_json(event.to_dict()) for event in self._events)

    def save_to_file(self, path: str):
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())

    def __str__(self):
        return "\n".join(f"{event.step:4d} - {event.branch}" for event in self._events)


def canonical_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"))


def trace_digest(lines: Iterable[str]) -> str:
    digest = hashlib.sha256()
    for line in lines:
        digest.update(line.encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()


def trace_lines(header: dict, logger: EventLogger) -> List[str]:
    """
    Serialize a run as JSON lines: header, one line per event, then a closing line
    carrying the SHA-256 of everything before it.
    """
    head = dict(header)
    head["schema"] = TRACE_SCHEMA_VERSION
    head["kind"] = "header"
    lines = [canonical_json(head)]
    lines.extend(canonical_json(event.to_dict()) for event in logger.get_events())
    lines.append(canonical_json({"kind": "end", "digest": trace_digest(lines)}))
    return lines


def write_trace(path: str, header: dict, logger: EventLogger) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(trace_lines(header, logger)) + "\n")


def parse_trace(text: str) -> tuple[dict, List[TraceEvent], str, List[str]]:
    """
    Split a trace file into header, events, recorded digest and the raw lines the
    digest covers. Raises SetFileError on structural problems.
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) < 2:
        raise SetFileError("Trace file needs at least a header and an end line.")
    try:
        records = [json.loads(line) for line in lines]
    except json.JSONDecodeError as e:
        raise SetFileError(f"Trace file is not valid JSON lines: {e}")
    header, end = records[0], records[-1]
    if not isinstance(header, dict) or header.get("kind") != "header":
        raise SetFileError("Trace file does not start with a header line.")
    if header.get("schema") != TRACE_SCHEMA_VERSION:
        raise SetFileError(
            f"Trace schema {header.get('schema')!r} is not supported (expected {TRACE_SCHEMA_VERSION})."
        )
    if not isinstance(end, dict) or end.get("kind") != "end" or "digest" not in end:
        raise SetFileError("Trace file does not end with a digest line.")
    try:
        events = [TraceEvent.from_dict(record) for record in records[1:-1]]
    except (KeyError, TypeError, ValueError) as e:
        raise SetFileError(f"Malformed trace event: {e}")
    return header, events, str(end["digest"]), lines[:-1]
