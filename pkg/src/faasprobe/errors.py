"""Exception hierarchy for probing, simulation, and persistence.

Every error carries a stable machine-readable ``code`` so CLI reports can
record failures without parsing messages.
"""

from __future__ import annotations


class ProbeError(Exception):
    """Base class for all errors raised by this package."""

    code = "probe_error"


class EmptySamples(ProbeError):
    """A summary statistic was requested over an empty sample set."""

    code = "empty_samples"


class TimeTravel(ProbeError):
    """A simulated invocation was scheduled before the simulator's last event."""

    code = "time_travel"


class UnsortedTimes(ProbeError):
    """A trace was given invocation times that are not strictly increasing."""

    code = "unsorted_times"


class UpperBoundTooLow(ProbeError):
    """Warm responses were observed already at the search upper bound.

    The true idle timeout is at or above the configured upper bound, so the
    descending search cannot bracket it. Reported as-is; the tool never
    guesses a value it could not confirm.
    """

    code = "upper_bound_too_low"


class InconsistentPlatform(ProbeError):
    """Confirmation campaigns contradicted the candidate idle timeout."""

    code = "inconsistent_platform"

    def __init__(self, message: str, confirm_at_x=None, confirm_at_x_plus_1=None):
        super().__init__(message)
        self.confirm_at_x = confirm_at_x
        self.confirm_at_x_plus_1 = confirm_at_x_plus_1


class SearchExhausted(ProbeError):
    """No interval in the descending grid produced a warm response.

    The platform's idle timeout is below the smallest probed interval; a finer
    ``step`` is needed to measure it.
    """

    code = "search_exhausted"


class NoRecycleObserved(ProbeError):
    """A keep-alive campaign ended without a single completed instance lifetime.

    This is a valid finding (the platform outlived the campaign), not a fault.
    """

    code = "no_recycle_observed"


class StalePlatformAssumption(ProbeError):
    """An invocation was warm after the cool-down gap that should force cold.

    The idle-timeout estimate the caller derived the cool-down from is
    outdated for this target.
    """

    code = "stale_platform_assumption"


class InvocationFailed(ProbeError):
    """Transport-level invocation failure (network error or non-success status)."""

    code = "invocation_failed"

    def __init__(self, message: str, *, retryable: bool, status: int | None = None):
        super().__init__(message)
        self.retryable = retryable
        self.status = status


class IdentityUnavailable(ProbeError):
    """The configured identity source could not be extracted from a response."""

    code = "identity_unavailable"

    def __init__(self, message: str, raw_body: bytes = b""):
        super().__init__(message)
        self.raw_body = raw_body


class TargetMismatch(ProbeError):
    """Checkpoint reports being diffed do not describe the same target."""

    code = "target_mismatch"


class ConfigError(ProbeError):
    """A probe configuration file failed schema validation."""

    code = "config_error"


class MalformedRecordLine(ProbeError):
    """An observation log line could not be parsed."""

    code = "malformed_record_line"

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
