"""Persisted campaign reports, observation logs, and checkpoint diffing.

A report is the unit of longitudinal comparison: probing the same target at
different dates yields a series of reports whose idle-timeout and keep-alive
values can be diffed to surface silent platform changes. Serialization is
canonical (fixed key order, two-space indent), so reloading and re-serializing
a report is byte-stable and simulator-target runs are byte-identical across
invocations.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .engine import (
    CampaignSummary,
    IdleTimeoutEstimate,
    KeepAliveResult,
    LatencyResult,
)
from .errors import MalformedRecordLine, TargetMismatch
from .lifecycle import Duration, InvocationRecord, StartKind, Workload

_RECORD_KEYS = (
    "section",
    "seq",
    "scheduled_ms",
    "sent_ms",
    "latency_ms",
    "identity",
    "start",
    "workload",
    "retries",
)


@dataclass(frozen=True)
class ConfirmationSummary:
    interval_min: float
    invocations: int
    warm: int
    cold: int
    eligible: int
    warm_fraction: float

    @classmethod
    def from_campaign(cls, summary: CampaignSummary) -> ConfirmationSummary:
        return cls(
            interval_min=summary.interval.ms / 60_000,
            invocations=summary.invocations,
            warm=summary.warm,
            cold=summary.cold,
            eligible=summary.eligible,
            warm_fraction=summary.warm_fraction,
        )


@dataclass(frozen=True)
class IdleSection:
    idle_timeout_min: int
    idle_timeout_ms: int
    confirm_at_x: ConfirmationSummary
    confirm_at_x_plus_1: ConfirmationSummary

    @classmethod
    def from_estimate(cls, estimate: IdleTimeoutEstimate) -> IdleSection:
        return cls(
            idle_timeout_min=estimate.x.minutes,
            idle_timeout_ms=estimate.x.ms,
            confirm_at_x=ConfirmationSummary.from_campaign(estimate.confirm_at_x),
            confirm_at_x_plus_1=ConfirmationSummary.from_campaign(
                estimate.confirm_at_x_plus_1
            ),
        )


@dataclass(frozen=True)
class KeepAliveSection:
    polling_interval_min: float
    sample_count: int
    max_min: int
    max_ms: int
    p90_min: int
    p90_ms: int
    lifetimes_min: tuple[int, ...]
    finding: str | None = None

    @classmethod
    def from_result(cls, result: KeepAliveResult) -> KeepAliveSection:
        return cls(
            polling_interval_min=result.polling_interval.ms / 60_000,
            sample_count=len(result.samples),
            max_min=result.max.minutes,
            max_ms=result.max.ms,
            p90_min=result.p90.minutes,
            p90_ms=result.p90.ms,
            lifetimes_min=tuple(s.lifetime.minutes for s in result.samples),
        )

    @classmethod
    def no_recycle(cls, polling_interval: Duration) -> KeepAliveSection:
        return cls(
            polling_interval_min=polling_interval.ms / 60_000,
            sample_count=0,
            max_min=0,
            max_ms=0,
            p90_min=0,
            p90_ms=0,
            lifetimes_min=(),
            finding="no_recycle_observed",
        )


@dataclass(frozen=True)
class WorkloadLatencySection:
    cold_mean_ms: float
    warm_mean_ms: float
    repetitions: int


def latency_section(result: LatencyResult) -> dict[str, WorkloadLatencySection]:
    return {
        workload.value: WorkloadLatencySection(
            cold_mean_ms=stats.cold_mean_ms,
            warm_mean_ms=stats.warm_mean_ms,
            repetitions=stats.repetitions,
        )
        for workload, stats in sorted(result.stats.items(), key=lambda kv: kv[0].value)
    }


@dataclass
class CampaignReport:
    """Timestamped result bundle for one probe run against one target."""

    target_label: str
    started_at: str
    policy_checkpoint_label: str
    tool_version: str
    effective_config: dict
    idle_estimate: IdleSection | None = None
    keepalive: tuple[KeepAliveSection, ...] = ()
    latency: dict[str, WorkloadLatencySection] | None = None
    error: dict | None = None

    def has_results(self) -> bool:
        return bool(self.idle_estimate or self.keepalive or self.latency)


def report_to_dict(report: CampaignReport) -> dict:
    doc = asdict(report)
    doc["keepalive"] = [asdict(k) for k in report.keepalive]
    for section in doc["keepalive"]:
        section["lifetimes_min"] = list(section["lifetimes_min"])
    if report.latency is not None:
        doc["latency"] = {k: asdict(v) for k, v in report.latency.items()}
    return doc


def report_from_dict(doc: dict) -> CampaignReport:
    idle = None
    if doc.get("idle_estimate") is not None:
        raw = doc["idle_estimate"]
        idle = IdleSection(
            idle_timeout_min=raw["idle_timeout_min"],
            idle_timeout_ms=raw["idle_timeout_ms"],
            confirm_at_x=ConfirmationSummary(**raw["confirm_at_x"]),
            confirm_at_x_plus_1=ConfirmationSummary(**raw["confirm_at_x_plus_1"]),
        )
    keepalive = tuple(
        KeepAliveSection(**{**raw, "lifetimes_min": tuple(raw["lifetimes_min"])})
        for raw in doc.get("keepalive", [])
    )
    latency = None
    if doc.get("latency") is not None:
        latency = {
            key: WorkloadLatencySection(**raw) for key, raw in doc["latency"].items()
        }
    return CampaignReport(
        target_label=doc["target_label"],
        started_at=doc["started_at"],
        policy_checkpoint_label=doc["policy_checkpoint_label"],
        tool_version=doc["tool_version"],
        effective_config=doc["effective_config"],
        idle_estimate=idle,
        keepalive=keepalive,
        latency=latency,
        error=doc.get("error"),
    )


def report_to_bytes(report: CampaignReport) -> bytes:
    return (json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n").encode()


def persist_report(report: CampaignReport, path: Path | str) -> None:
    Path(path).write_bytes(report_to_bytes(report))


def load_report(path: Path | str) -> CampaignReport:
    return report_from_dict(json.loads(Path(path).read_text()))


def record_to_dict(record: InvocationRecord, section: str) -> dict:
    return {
        "section": section,
        "seq": record.sequence_no,
        "scheduled_ms": record.scheduled_at.ms,
        "sent_ms": record.sent_at.ms,
        "latency_ms": record.latency.ms,
        "identity": record.identity,
        "start": record.start_kind.value,
        "workload": record.workload.value,
        "retries": record.retries,
    }


def record_from_dict(doc: dict) -> tuple[str, InvocationRecord]:
    record = InvocationRecord(
        sequence_no=doc["seq"],
        scheduled_at=Duration(doc["scheduled_ms"]),
        sent_at=Duration(doc["sent_ms"]),
        latency=Duration(doc["latency_ms"]),
        identity=doc["identity"],
        start_kind=StartKind(doc["start"]),
        workload=Workload(doc["workload"]),
        retries=doc.get("retries", 0),
    )
    return doc["section"], record


def append_records(
    path: Path | str, section: str, records: Iterable[InvocationRecord]
) -> None:
    """Append records to a JSONL observation log, one per line, stable key order."""
    with open(path, "a", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record_to_dict(record, section)) + "\n")


def load_records(path: Path | str) -> list[tuple[str, InvocationRecord]]:
    rows: list[tuple[str, InvocationRecord]] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                rows.append(record_from_dict(doc))
            except (ValueError, KeyError, TypeError) as exc:
                raise MalformedRecordLine(line_no, str(exc)) from exc
    return rows


@dataclass(frozen=True)
class CheckpointRow:
    checkpoint: str
    started_at: str
    idle_timeout_min: int | None
    keepalive_max_min: int | None
    keepalive_p90_min: int | None


@dataclass(frozen=True)
class Change:
    field: str
    from_checkpoint: str
    to_checkpoint: str
    before: int
    after: int


@dataclass(frozen=True)
class DiffReport:
    target_label: str
    rows: tuple[CheckpointRow, ...]
    changes: tuple[Change, ...]

    def has_changes(self) -> bool:
        return bool(self.changes)


def _row_from_report(report: CampaignReport) -> CheckpointRow:
    # With several keep-alive intervals in one report, the diff tracks the
    # first one; longitudinal runs are expected to keep a stable interval.
    first_keepalive = next(
        (k for k in report.keepalive if k.finding is None), None
    )
    return CheckpointRow(
        checkpoint=report.policy_checkpoint_label,
        started_at=report.started_at,
        idle_timeout_min=(
            report.idle_estimate.idle_timeout_min if report.idle_estimate else None
        ),
        keepalive_max_min=first_keepalive.max_min if first_keepalive else None,
        keepalive_p90_min=first_keepalive.p90_min if first_keepalive else None,
    )


def compare_checkpoints(reports: Sequence[CampaignReport]) -> DiffReport:
    """Chronological comparison of repeated probes of one target.

    Emits one change marker per (field, checkpoint transition) where both
    checkpoints measured the field and the values differ.
    """
    if len(reports) < 2:
        raise TargetMismatch("need at least two reports to diff")
    labels = {r.target_label for r in reports}
    if len(labels) > 1:
        raise TargetMismatch(f"reports describe different targets: {sorted(labels)}")

    ordered = sorted(reports, key=lambda r: r.started_at)
    rows = tuple(_row_from_report(r) for r in ordered)

    changes: list[Change] = []
    for before_row, after_row in zip(rows, rows[1:]):
        for field_name in ("idle_timeout_min", "keepalive_max_min", "keepalive_p90_min"):
            before = getattr(before_row, field_name)
            after = getattr(after_row, field_name)
            if before is not None and after is not None and before != after:
                changes.append(
                    Change(
                        field=field_name,
                        from_checkpoint=before_row.checkpoint,
                        to_checkpoint=after_row.checkpoint,
                        before=before,
                        after=after,
                    )
                )

    return DiffReport(
        target_label=ordered[0].target_label, rows=rows, changes=tuple(changes)
    )


def diff_to_dict(diff: DiffReport) -> dict:
    return {
        "target_label": diff.target_label,
        "rows": [asdict(r) for r in diff.rows],
        "changes": [asdict(c) for c in diff.changes],
    }


def render_diff(diff: DiffReport) -> str:
    """Aligned plain-text view of a checkpoint diff."""
    def fmt(value: int | None) -> str:
        return "-" if value is None else str(value)

    lines = [f"target: {diff.target_label}"]
    lines.append(
        f"{'checkpoint':<20} {'idle_min':>8} {'ka_max_min':>10} {'ka_p90_min':>10}"
    )
    for row in diff.rows:
        lines.append(
            f"{row.checkpoint:<20} {fmt(row.idle_timeout_min):>8} "
            f"{fmt(row.keepalive_max_min):>10} {fmt(row.keepalive_p90_min):>10}"
        )
    if diff.changes:
        lines.append("changes:")
        for change in diff.changes:
            lines.append(
                f"  {change.field}: {change.before} -> {change.after} "
                f"({change.from_checkpoint} -> {change.to_checkpoint})"
            )
    else:
        lines.append("no changes")
    return "\n".join(lines)
