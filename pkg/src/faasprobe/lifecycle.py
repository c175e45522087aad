"""Shared lifecycle domain types and the statistics the reports need.

All campaign times are integer milliseconds relative to campaign start, which
keeps observation logs portable and exactly diffable. Minute values shown in
reports are always ``floor(ms / 60000)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import EmptySamples

#: Saturation ceiling for duration arithmetic (milliseconds).
MAX_MS = 2**63 - 1

#: An opaque instance fingerprint token. Equality is exact string equality.
InstanceIdentity = str


@dataclass(frozen=True, order=True)
class Duration:
    """A non-negative span of time in integer milliseconds.

    Addition and multiplication saturate at ``MAX_MS`` instead of wrapping;
    subtraction floors at zero, so no exported operation can produce a
    negative duration.
    """

    ms: int

    def __post_init__(self):
        if not isinstance(self.ms, int):
            raise TypeError(f"duration must be an int of milliseconds, got {self.ms!r}")
        if self.ms < 0:
            raise ValueError(f"duration must be non-negative, got {self.ms}")
        if self.ms > MAX_MS:
            object.__setattr__(self, "ms", MAX_MS)

    @classmethod
    def from_ms(cls, ms: int) -> Duration:
        return cls(ms)

    @classmethod
    def from_seconds(cls, seconds: float) -> Duration:
        return cls(round(seconds * 1_000))

    @classmethod
    def from_minutes(cls, minutes: float) -> Duration:
        return cls(round(minutes * 60_000))

    @classmethod
    def from_hours(cls, hours: float) -> Duration:
        return cls(round(hours * 3_600_000))

    @property
    def minutes(self) -> int:
        """Whole minutes, rounded down (the report-facing unit)."""
        return self.ms // 60_000

    def __add__(self, other: Duration) -> Duration:
        return Duration(min(self.ms + other.ms, MAX_MS))

    def __sub__(self, other: Duration) -> Duration:
        return Duration(max(self.ms - other.ms, 0))

    def __mul__(self, factor: int) -> Duration:
        if factor < 0:
            raise ValueError("cannot scale a duration by a negative factor")
        return Duration(min(self.ms * factor, MAX_MS))

    __rmul__ = __mul__

    def __str__(self) -> str:
        if self.ms and self.ms % 60_000 == 0:
            return f"{self.ms // 60_000}min"
        return f"{self.ms}ms"


ZERO = Duration(0)


class StartKind(Enum):
    """Whether an invocation was served by a fresh or a reused instance."""

    COLD = "cold"
    WARM = "warm"
    UNKNOWN = "unknown"


class Workload(Enum):
    """The two probe workloads: recursive Fibonacci (CPU-bound) and a no-op greeting."""

    FIBONACCI = "fib"
    HELLO_WORLD = "hello"


@dataclass(frozen=True)
class InvocationRecord:
    """One probe observation.

    ``scheduled_at`` and ``sent_at`` are campaign-relative; on a virtual clock
    they coincide, on a wall clock their difference is the per-request skew
    (absolute-time scheduling keeps it from accumulating).
    """

    sequence_no: int
    scheduled_at: Duration
    sent_at: Duration
    latency: Duration
    identity: InstanceIdentity
    start_kind: StartKind
    workload: Workload
    retries: int = 0

    def __post_init__(self):
        if self.sequence_no < 0:
            raise ValueError("sequence_no must be non-negative")
        if self.sent_at < self.scheduled_at:
            raise ValueError("sent_at cannot precede scheduled_at")
        if not self.identity:
            raise ValueError("identity must be non-empty")
        if self.retries < 0:
            raise ValueError("retries must be non-negative")


@dataclass(frozen=True)
class LifetimeSample:
    """One completed instance generation under keep-alive polling.

    The lifetime runs from the instance's first response (its creating cold
    serve) to its last warm response, which is how whole-minute keep-alive
    maxima fall out of minute-aligned polling.
    """

    identity: InstanceIdentity
    first_seen_at: Duration
    last_warm_at: Duration

    def __post_init__(self):
        if self.last_warm_at < self.first_seen_at:
            raise ValueError("last_warm_at cannot precede first_seen_at")

    @property
    def lifetime(self) -> Duration:
        return self.last_warm_at - self.first_seen_at


@dataclass(frozen=True)
class LifetimeSummary:
    max: Duration
    p90: Duration
    count: int


def classify_start(
    previous: InstanceIdentity | None,
    current: InstanceIdentity,
    adapter_cold_flag: bool | None = None,
) -> StartKind:
    """Classify an invocation as cold or warm.

    A target-reported creation flag is authoritative when present; otherwise
    the invocation is warm exactly when the serving identity matches the
    previous one. With neither a flag nor a previous identity the classification
    is unknown (only possible for the first record of a campaign).
    """
    if not current:
        raise ValueError("current identity must be non-empty")
    if adapter_cold_flag is not None:
        return StartKind.COLD if adapter_cold_flag else StartKind.WARM
    if previous is None:
        return StartKind.UNKNOWN
    return StartKind.WARM if previous == current else StartKind.COLD


def nearest_rank_percentile(samples: Sequence[Duration], p: int) -> Duration:
    """Nearest-rank percentile: element ``ceil(p/100 * n)`` (1-based) of the sorted samples.

    The result is always a member of ``samples``, so summaries only ever
    report values that were actually observed.
    """
    if not samples:
        raise EmptySamples("cannot take a percentile of zero samples")
    if not 1 <= p <= 100:
        raise ValueError(f"percentile must be in [1, 100], got {p}")
    ordered = sorted(samples)
    rank = math.ceil(p * len(ordered) / 100)
    return ordered[rank - 1]


def summarize_lifetimes(samples: Sequence[LifetimeSample]) -> LifetimeSummary:
    """Maximum and 90th-percentile lifetime over completed generations."""
    if not samples:
        raise EmptySamples("cannot summarize zero lifetime samples")
    lifetimes = [s.lifetime for s in samples]
    return LifetimeSummary(
        max=max(lifetimes),
        p90=nearest_rank_percentile(lifetimes, 90),
        count=len(lifetimes),
    )
