"""Shipped provider policy presets.

Each preset encodes the measured behavior of one platform at one checkpoint:
its idle timeout, how instance lifetimes were distributed under keep-alive
polling, and the mean cold/warm response times of both probe workloads. The
presets ship with zero latency jitter so that measured means reproduce the
configured values exactly; campaigns that want noise can load a policy
document with ``jitter_ms`` set.
"""

from __future__ import annotations

from .lifecycle import Duration, Workload
from .policy import (
    EmpiricalCap,
    LatencyModel,
    PatternCap,
    PatternRule,
    ProviderPolicy,
    StaticCap,
)


def _minutes(m: float) -> Duration:
    return Duration.from_minutes(m)


def _latency(fib_cold: int, fib_warm: int, hello_cold: int, hello_warm: int):
    return {
        Workload.FIBONACCI: LatencyModel(Duration(fib_cold), Duration(fib_warm)),
        Workload.HELLO_WORLD: LatencyModel(Duration(hello_cold), Duration(hello_warm)),
    }


# Lifetimes observed under 5-minute polling cluster tightly below the maximum:
# nine generations recycled at 140 minutes for every one that reached 145.
_AWS_2021_LIFETIMES = tuple(_minutes(m) for m in [140] * 9 + [145])

# The long tail is rare: nine generations at 138 minutes per one at 336.
_IBM_2021_LIFETIMES = tuple(_minutes(m) for m in [138] * 9 + [336])

# Gaps of at most 5 minutes count as a frequent invocation pattern and earn
# long retention; anything slower up to the idle timeout is capped at 20
# minutes. Published figures for the long cap disagree (a 2675-minute table
# entry vs. a "44 hours 30 minutes" = 2670-minute narrative); the preset uses
# 2670 and keeps the discrepancy visible here rather than resolving it.
_AZURE_PATTERN = PatternCap(
    rules=(
        PatternRule(_minutes(0), _minutes(5), _minutes(2670)),
        PatternRule(Duration(5 * 60_000 + 1), _minutes(12), _minutes(20)),
    ),
    default_cap=_minutes(20),
)

_AWS_LATENCY = _latency(fib_cold=1161, fib_warm=778, hello_cold=698, hello_warm=79)
_IBM_LATENCY = _latency(fib_cold=3169, fib_warm=695, hello_cold=1495, hello_warm=169)
_AZURE_LATENCY = _latency(fib_cold=2825, fib_warm=628, hello_cold=2663, hello_warm=81)

PRESETS: dict[str, ProviderPolicy] = {
    "aws-2021": ProviderPolicy(
        name="aws-2021",
        idle_timeout=_minutes(5),
        recycle_rule=EmpiricalCap(_AWS_2021_LIFETIMES),
        latency=_AWS_LATENCY,
    ),
    "ibm-2021": ProviderPolicy(
        name="ibm-2021",
        idle_timeout=_minutes(10),
        recycle_rule=EmpiricalCap(_IBM_2021_LIFETIMES),
        latency=_IBM_LATENCY,
    ),
    "azure-2021": ProviderPolicy(
        name="azure-2021",
        idle_timeout=_minutes(12),
        recycle_rule=_AZURE_PATTERN,
        latency=_AZURE_LATENCY,
    ),
    "aws-2020": ProviderPolicy(
        name="aws-2020",
        idle_timeout=_minutes(10),
        recycle_rule=StaticCap(_minutes(145)),
        latency=_AWS_LATENCY,
    ),
    # Azure shortened its idle timeout twice during 2020 (20 min early in the
    # year, 14 min by autumn), hence two checkpoint presets.
    "azure-2020-early": ProviderPolicy(
        name="azure-2020-early",
        idle_timeout=_minutes(20),
        recycle_rule=_AZURE_PATTERN,
        latency=_AZURE_LATENCY,
    ),
    "azure-2020-late": ProviderPolicy(
        name="azure-2020-late",
        idle_timeout=_minutes(14),
        recycle_rule=_AZURE_PATTERN,
        latency=_AZURE_LATENCY,
    ),
}


def get_preset(name: str) -> ProviderPolicy:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown preset {name!r}; shipped presets: {known}") from None
