"""File ingestion: structure documents and recorded trace spans.

Structure files are JSON (one document), traces are JSON lines (one span
per line).  Parsing is strict about shape and local invariants; whether a
span's code is actually part of the ingested model is deliberately NOT an
error here — live traces routinely reference unmodeled code, so aggregation
tallies such spans instead of failing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import ParseError, ValidationError
from .model import CommunicationLink, StructureModel, validate_structure

__all__ = [
    "TraceRecord",
    "AggregationResult",
    "ingest_structure",
    "read_trace_records",
    "aggregate_traces",
]

_MAX_NANOS = 2**64 - 1


@dataclass(frozen=True)
class TraceRecord:
    """One recorded method execution (span) within a trace tree.

    Attributes:
        trace_id: groups spans of one request.
        span_id: unique within the trace.
        parent_span_id: the calling span, or None for a root span.
        method_fqn: application + dotted package path + class + "." + method.
        start_nanos / end_nanos: execution window, end >= start.
    """

    trace_id: str
    span_id: str
    parent_span_id: str | None
    method_fqn: str
    start_nanos: int
    end_nanos: int

    def __post_init__(self) -> None:
        for name in ("trace_id", "span_id", "method_fqn"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise ValueError(f"{name} must be a non-empty string, got {value!r}")
        if self.parent_span_id is not None and (
            not isinstance(self.parent_span_id, str) or not self.parent_span_id
        ):
            raise ValueError("parent_span_id must be a non-empty string or None")
        for name in ("start_nanos", "end_nanos"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ValueError(f"{name} must be an int, got {value!r}")
            if not 0 <= value <= _MAX_NANOS:
                raise ValueError(f"{name} out of unsigned 64-bit range: {value}")
        if self.end_nanos < self.start_nanos:
            raise ValueError(
                f"span {self.span_id!r} ends before it starts "
                f"({self.end_nanos} < {self.start_nanos})"
            )

    @property
    def class_fqn(self) -> str | None:
        """The class part of method_fqn, or None if there is no method segment."""
        head, sep, _method = self.method_fqn.rpartition(".")
        return head if sep else None

    def to_json(self) -> dict[str, Any]:
        return {
            "traceId": self.trace_id,
            "spanId": self.span_id,
            "parentSpanId": self.parent_span_id,
            "methodFqn": self.method_fqn,
            "startNanos": self.start_nanos,
            "endNanos": self.end_nanos,
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "TraceRecord":
        try:
            return cls(
                trace_id=data["traceId"],
                span_id=data["spanId"],
                parent_span_id=data.get("parentSpanId"),
                method_fqn=data["methodFqn"],
                start_nanos=data["startNanos"],
                end_nanos=data["endNanos"],
            )
        except KeyError as exc:
            raise ValueError(f"span record is missing field {exc.args[0]!r}") from exc


def ingest_structure(data: bytes | str) -> StructureModel:
    """Parse and validate a structure document.

    Raises ParseError for malformed JSON or schema/type problems, and
    ValidationError (with a ``violations`` attribute) when the document
    parses but breaks a model invariant such as duplicate class FQNs.
    """
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed structure JSON: {exc}") from exc
    try:
        model = StructureModel.from_json(doc)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"bad structure document: {exc}") from exc
    violations = validate_structure(model)
    if violations:
        error = ValidationError(
            f"structure document violates model invariants: {'; '.join(violations)}"
        )
        error.violations = violations
        raise error
    return model


def read_trace_records(data: bytes | str) -> list[TraceRecord]:
    """Parse a JSON-lines trace file into TraceRecords.

    Blank lines are skipped.  Raises ParseError naming the offending line on
    any syntax or field problem.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    records: list[TraceRecord] = []
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"trace line {lineno}: malformed JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ParseError(f"trace line {lineno}: expected an object")
        try:
            records.append(TraceRecord.from_json(doc))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"trace line {lineno}: {exc}") from exc
    return records


@dataclass(frozen=True)
class AggregationResult:
    """Outcome of trace aggregation.

    Attributes:
        links: inter-class communication links, sorted by (source, target).
        dropped_spans: spans whose class FQN is absent from the model.
        dangling_parents: spans whose parent could not be resolved within
            their trace (absent, or itself dropped); they contribute no pair.
        self_calls: per-class tally of parent-child pairs within one class;
            kept separate because self-calls never become arcs.
    """

    links: tuple[CommunicationLink, ...]
    dropped_spans: int
    dangling_parents: int
    self_calls: Mapping[str, int] = field(default_factory=dict)


def aggregate_traces(
    records: Iterable[TraceRecord], model: StructureModel
) -> AggregationResult:
    """Aggregate parent-child span pairs into communication links.

    For every pair of spans (parent, child) in the same trace whose methods
    belong to different classes of ``model``, one call is counted from the
    parent's class to the child's class.  Spans whose class is not in the
    model are dropped (tallied, never an error) and form no pairs.
    """
    known_fqns = model.class_fqns()
    dropped = 0
    resolved: dict[tuple[str, str], str] = {}
    kept: list[TraceRecord] = []
    for record in records:
        cls = record.class_fqn
        if cls is None or cls not in known_fqns:
            dropped += 1
            continue
        resolved[(record.trace_id, record.span_id)] = cls
        kept.append(record)

    pair_counts: dict[tuple[str, str], int] = {}
    self_calls: dict[str, int] = {}
    dangling = 0
    for record in kept:
        if record.parent_span_id is None:
            continue
        parent_cls = resolved.get((record.trace_id, record.parent_span_id))
        if parent_cls is None:
            dangling += 1
            continue
        child_cls = resolved[(record.trace_id, record.span_id)]
        if parent_cls == child_cls:
            self_calls[parent_cls] = self_calls.get(parent_cls, 0) + 1
        else:
            key = (parent_cls, child_cls)
            pair_counts[key] = pair_counts.get(key, 0) + 1

    links = tuple(
        CommunicationLink(source_fqn=src, target_fqn=tgt, call_count=count)
        for (src, tgt), count in sorted(pair_counts.items())
    )
    return AggregationResult(
        links=links,
        dropped_spans=dropped,
        dangling_parents=dangling,
        self_calls=dict(sorted(self_calls.items())),
    )
