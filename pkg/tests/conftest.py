from __future__ import annotations

import sys
from pathlib import Path

# Make the sibling oracle helper importable regardless of invocation directory.
sys.path.insert(0, str(Path(__file__).parent))

import pytest

from faasprobe.lifecycle import Duration, Workload
from faasprobe.policy import LatencyModel, ProviderPolicy, StaticCap


def make_policy(
    idle_min: float,
    recycle_rule=None,
    *,
    name: str = "test-policy",
    jitter_ms: int = 0,
    fib_cold: int = 1000,
    fib_warm: int = 100,
    hello_cold: int = 500,
    hello_warm: int = 50,
) -> ProviderPolicy:
    """A policy with a huge static cap unless a rule is given."""
    if recycle_rule is None:
        recycle_rule = StaticCap(Duration.from_minutes(10**6))
    return ProviderPolicy(
        name=name,
        idle_timeout=Duration.from_minutes(idle_min),
        recycle_rule=recycle_rule,
        latency={
            Workload.FIBONACCI: LatencyModel(
                Duration(fib_cold), Duration(fib_warm), Duration(jitter_ms)
            ),
            Workload.HELLO_WORLD: LatencyModel(
                Duration(hello_cold), Duration(hello_warm), Duration(jitter_ms)
            ),
        },
    )


@pytest.fixture
def simple_policy() -> ProviderPolicy:
    return make_policy(idle_min=5)
