"""Measurement campaigns: idle-timeout search, keep-alive lifetimes, latency.

All campaigns schedule invocations at absolute target times on an injected
clock, one in-flight request at a time. Sequential probing is essential:
concurrent requests would trigger scale-out and hand responses to multiple
instances, corrupting any single-instance measurement. Record times are
relative to the start of the operation, so a full operation's records can be
replayed through the simulator to reproduce its cold/warm sequence.

The idle-timeout search descends linearly from the upper bound, one step at a
time, running a full campaign per interval. A bisection mode would converge
faster, but the linear descent is the measurement procedure the results are
defined by, so it is the only mode offered.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean

from .adapters import InvocationAdapter
from .clock import Clock
from .errors import (
    InconsistentPlatform,
    NoRecycleObserved,
    SearchExhausted,
    StalePlatformAssumption,
    UpperBoundTooLow,
)
from .lifecycle import (
    Duration,
    InstanceIdentity,
    InvocationRecord,
    LifetimeSample,
    StartKind,
    Workload,
    classify_start,
    summarize_lifetimes,
)

#: Fewer completed generations than this makes a 90th percentile meaningless.
DEFAULT_MIN_GENERATIONS = 10


@dataclass(frozen=True)
class SearchConfig:
    """Parameters of the descending idle-timeout search."""

    upper_bound: Duration = Duration.from_minutes(20)
    step: Duration = Duration.from_minutes(1)
    campaign_duration: Duration = Duration.from_hours(5)
    warm_confirm_threshold: float = 0.9

    def __post_init__(self):
        if self.step.ms <= 0:
            raise ValueError("step must be positive")
        if self.upper_bound <= self.step:
            raise ValueError("upper bound must exceed the step")
        if self.campaign_duration < 2 * self.upper_bound:
            raise ValueError("campaign duration must be at least twice the upper bound")
        if not 0 < self.warm_confirm_threshold <= 1:
            raise ValueError("warm confirm threshold must be in (0, 1]")


@dataclass(frozen=True)
class CampaignSummary:
    """Warm/cold tally of one fixed-interval campaign.

    ``eligible`` excludes the first record (no in-campaign gap to judge) and
    cold records that immediately follow a multi-request generation. The
    latter are recycle-cap decommissions, which legitimately inject colds into
    a long campaign even when the interval is within the idle timeout; an
    interval *above* the idle timeout instead produces single-request
    generations, whose colds all stay eligible.
    """

    interval: Duration
    invocations: int
    warm: int
    cold: int
    eligible: int
    warm_fraction: float


@dataclass(frozen=True)
class IdleTimeoutEstimate:
    """Search result: the largest interval at which an instance is reused."""

    x: Duration
    confirm_at_x: CampaignSummary
    confirm_at_x_plus_1: CampaignSummary
    records: tuple[InvocationRecord, ...]


@dataclass(frozen=True)
class KeepAliveResult:
    polling_interval: Duration
    samples: tuple[LifetimeSample, ...]
    max: Duration
    p90: Duration
    records: tuple[InvocationRecord, ...]


@dataclass(frozen=True)
class WorkloadLatencyStats:
    cold_mean_ms: float
    warm_mean_ms: float
    repetitions: int


@dataclass(frozen=True)
class LatencyResult:
    stats: dict[Workload, WorkloadLatencyStats]
    records: tuple[InvocationRecord, ...]


class _OperationRunner:
    """Sequential scheduler for one measurement operation.

    Keeps operation-relative time (epoch = clock position at construction),
    a running sequence number, and identity continuity across campaigns.
    """

    def __init__(self, adapter: InvocationAdapter, clock: Clock):
        self.adapter = adapter
        self.clock = clock
        self.epoch = clock.now()
        self.records: list[InvocationRecord] = []
        self._prev_identity: InstanceIdentity | None = None

    @property
    def last_scheduled(self) -> Duration | None:
        return self.records[-1].scheduled_at if self.records else None

    def invoke_at(self, rel_time: Duration, workload: Workload) -> InvocationRecord:
        absolute = self.epoch + rel_time
        self.clock.wait_until(absolute)
        sent_rel = self.clock.now() - self.epoch
        response = self.adapter.invoke(workload, at=absolute)
        record = InvocationRecord(
            sequence_no=len(self.records),
            scheduled_at=rel_time,
            sent_at=sent_rel,
            latency=response.latency,
            identity=response.identity,
            start_kind=classify_start(
                self._prev_identity, response.identity, response.created_this_call
            ),
            workload=workload,
            retries=response.retries,
        )
        self.records.append(record)
        self._prev_identity = response.identity
        return record

    def run_campaign(
        self, interval: Duration, duration: Duration, workload: Workload
    ) -> list[InvocationRecord]:
        """Invoke every ``interval`` for ``duration``, starting one interval after the last event."""
        last = self.last_scheduled
        start = last + interval if last is not None else Duration(0)
        count = duration.ms // interval.ms + 1
        return [self.invoke_at(start + k * interval, workload) for k in range(count)]


def _campaign_summary(
    all_records: list[InvocationRecord], start: int, interval: Duration
) -> CampaignSummary:
    """Tally the campaign beginning at ``all_records[start]``.

    Identity run lengths accumulate over the whole operation, not just the
    campaign: an instance created near the end of the previous campaign must
    still be recognized as multi-request when its recycle cold arrives early
    in this one.
    """
    warm = cold = excluded = 0
    run_identity: InstanceIdentity | None = None
    run_length = 0
    for index, record in enumerate(all_records):
        if index > start:
            if record.start_kind is StartKind.WARM:
                warm += 1
            elif record.start_kind is StartKind.COLD:
                cold += 1
                if run_length >= 2:
                    excluded += 1
        if record.identity == run_identity:
            run_length += 1
        else:
            run_identity = record.identity
            run_length = 1
    invocations = len(all_records) - start
    eligible = max(invocations - 1 - excluded, 0)
    return CampaignSummary(
        interval=interval,
        invocations=invocations,
        warm=warm,
        cold=cold,
        eligible=eligible,
        warm_fraction=warm / eligible if eligible else 0.0,
    )


def _has_warm_evidence(records: list[InvocationRecord]) -> bool:
    # The first record's gap belongs to the previous campaign, so only
    # in-campaign records count as evidence about this interval.
    return any(r.start_kind is StartKind.WARM for r in records[1:])


def find_idle_timeout(
    adapter: InvocationAdapter,
    clock: Clock,
    config: SearchConfig = SearchConfig(),
    workload: Workload = Workload.FIBONACCI,
) -> IdleTimeoutEstimate:
    """Measure the platform's idle timeout by descending-interval search.

    Runs a full campaign per interval, from the upper bound downward, until
    some interval makes two consecutive requests land on the same instance.
    That interval is the candidate ``x``; two confirmation campaigns then
    check that polling at ``x`` stays overwhelmingly warm while polling at
    ``x + step`` never goes warm.
    """
    runner = _OperationRunner(adapter, clock)

    interval = config.upper_bound
    x: Duration | None = None
    while interval >= config.step:
        records = runner.run_campaign(interval, config.campaign_duration, workload)
        if _has_warm_evidence(records):
            if interval == config.upper_bound:
                raise UpperBoundTooLow(
                    f"instances already reused at the {interval} upper bound; "
                    "raise the search upper bound"
                )
            x = interval
            break
        interval = interval - config.step
    if x is None:
        raise SearchExhausted(
            f"no instance reuse observed down to interval {config.step}"
        )

    confirm_x_start = len(runner.records)
    runner.run_campaign(x, config.campaign_duration, workload)
    confirm_x = _campaign_summary(runner.records, confirm_x_start, x)

    above = x + config.step
    confirm_above_start = len(runner.records)
    runner.run_campaign(above, config.campaign_duration, workload)
    confirm_above = _campaign_summary(runner.records, confirm_above_start, above)

    if confirm_above.warm > 0:
        raise InconsistentPlatform(
            f"warm responses at interval {above} contradict idle timeout {x}",
            confirm_at_x=confirm_x,
            confirm_at_x_plus_1=confirm_above,
        )
    if confirm_x.warm_fraction < config.warm_confirm_threshold:
        raise InconsistentPlatform(
            f"only {confirm_x.warm_fraction:.0%} warm at interval {x}, "
            f"below the {config.warm_confirm_threshold:.0%} confirmation threshold",
            confirm_at_x=confirm_x,
            confirm_at_x_plus_1=confirm_above,
        )

    return IdleTimeoutEstimate(
        x=x,
        confirm_at_x=confirm_x,
        confirm_at_x_plus_1=confirm_above,
        records=tuple(runner.records),
    )


def measure_keepalive(
    adapter: InvocationAdapter,
    clock: Clock,
    polling_interval: Duration,
    max_duration: Duration,
    min_generations: int = DEFAULT_MIN_GENERATIONS,
    workload: Workload = Workload.FIBONACCI,
) -> KeepAliveResult:
    """Poll at a fixed interval and measure how long each instance survives.

    The polling interval must be at or below the platform's idle timeout
    (caller-enforced), so every decommission observed is a recycle, not an
    idle death. Each identity change closes a lifetime sample running from the
    instance's first response to its last warm one. Polling stops once
    ``min_generations`` samples are collected, or at ``max_duration`` at the
    latest; a generation still alive at the end is discarded, not guessed at.
    """
    if polling_interval.ms <= 0:
        raise ValueError("polling interval must be positive")
    if min_generations < 1:
        raise ValueError("min_generations must be at least 1")

    runner = _OperationRunner(adapter, clock)
    samples: list[LifetimeSample] = []

    current_identity: InstanceIdentity | None = None
    first_seen_at = last_warm_at = Duration(0)

    poll_index = 0
    while len(samples) < min_generations:
        at = poll_index * polling_interval
        if at > max_duration:
            break
        record = runner.invoke_at(at, workload)
        if record.identity != current_identity:
            if current_identity is not None:
                samples.append(
                    LifetimeSample(current_identity, first_seen_at, last_warm_at)
                )
            current_identity = record.identity
            first_seen_at = last_warm_at = record.scheduled_at
        elif record.start_kind is StartKind.WARM:
            last_warm_at = record.scheduled_at
        poll_index += 1

    if not samples:
        raise NoRecycleObserved(
            f"no instance recycle observed within {max_duration} at interval "
            f"{polling_interval}; the platform outlived the campaign"
        )

    summary = summarize_lifetimes(samples)
    return KeepAliveResult(
        polling_interval=polling_interval,
        samples=tuple(samples),
        max=summary.max,
        p90=summary.p90,
        records=tuple(runner.records),
    )


def measure_latency(
    adapter: InvocationAdapter,
    clock: Clock,
    repetitions: int,
    cooldown: Duration,
    workloads: tuple[Workload, ...] = (Workload.FIBONACCI, Workload.HELLO_WORLD),
) -> LatencyResult:
    """Measure mean cold and warm response times per workload.

    Each repetition waits out the cool-down (which must exceed the platform's
    idle timeout, forcing a cold start), takes the cold sample, then invokes
    again immediately for the warm sample. A warm response right after the
    cool-down means the idle-timeout estimate behind it is stale.
    """
    if repetitions < 3:
        raise ValueError("at least 3 repetitions are needed for a usable mean")
    if cooldown.ms <= 0:
        raise ValueError("cooldown must be positive")

    runner = _OperationRunner(adapter, clock)
    stats: dict[Workload, WorkloadLatencyStats] = {}
    cursor = Duration(0)

    for workload in workloads:
        cold_ms: list[int] = []
        warm_ms: list[int] = []
        for _ in range(repetitions):
            cold_record = runner.invoke_at(cursor + cooldown, workload)
            if cold_record.start_kind is StartKind.WARM:
                raise StalePlatformAssumption(
                    f"warm response after a {cooldown} cool-down; "
                    "re-estimate the idle timeout before measuring latency"
                )
            warm_record = runner.invoke_at(
                cold_record.scheduled_at + Duration(1), workload
            )
            if warm_record.start_kind is not StartKind.WARM:
                raise InconsistentPlatform(
                    "back-to-back invocation was not served warm"
                )
            cold_ms.append(cold_record.latency.ms)
            warm_ms.append(warm_record.latency.ms)
            cursor = warm_record.scheduled_at
        stats[workload] = WorkloadLatencyStats(
            cold_mean_ms=fmean(cold_ms),
            warm_mean_ms=fmean(warm_ms),
            repetitions=repetitions,
        )

    return LatencyResult(stats=stats, records=tuple(runner.records))
