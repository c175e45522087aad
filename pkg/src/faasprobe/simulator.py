"""Deterministic discrete-event simulation of a FaaS platform's container lifecycle.

The simulator plays the platform side of the probe: it keeps at most one live
instance (probe traffic is strictly sequential), decommissions it when it has
been idle longer than the policy's idle timeout or older than its assigned
recycle cap, and serves every request with a seeded latency draw. Both
decommission comparisons are strict: a request arriving at an idle gap exactly
equal to the timeout, or at an age exactly equal to the cap, is still warm.
That boundary choice is what makes integer-configured policies measure back as
exactly their configured integers.

A simulator instance is single-threaded; run independent simulators for
parallel campaigns.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import TimeTravel, UnsortedTimes
from .lifecycle import Duration, InstanceIdentity, InvocationRecord, StartKind, Workload
from .policy import EmpiricalCap, PatternCap, ProviderPolicy, RecycleRule, StaticCap


@dataclass
class _LiveInstance:
    identity: InstanceIdentity
    created_at: Duration
    last_served_at: Duration
    assigned_cap: Duration  # immutable after creation


def assign_cap(
    rule: RecycleRule, observed_interval: Duration | None, draw_index: int
) -> Duration:
    """Pick the total-age cap for a freshly created instance.

    ``observed_interval`` is the most recent inter-arrival gap; it is absent
    only at the very first invocation a platform sees. ``draw_index`` advances
    by one per created instance, starting from the simulator seed, which keeps
    empirical-cap draws deterministic and independent of the latency RNG.
    """
    if isinstance(rule, StaticCap):
        return rule.cap
    if isinstance(rule, EmpiricalCap):
        return rule.lifetimes[draw_index % len(rule.lifetimes)]
    if isinstance(rule, PatternCap):
        if observed_interval is not None:
            for pattern in rule.rules:
                if pattern.interval_low <= observed_interval <= pattern.interval_high:
                    return pattern.cap
        return rule.default_cap
    raise TypeError(f"unknown recycle rule {rule!r}")


class FaasSimulator:
    """One simulated platform under a :class:`ProviderPolicy`."""

    def __init__(self, policy: ProviderPolicy, seed: int = 0):
        self.policy = policy
        self.seed = seed
        self._rng = random.Random(seed)
        self._live: _LiveInstance | None = None
        self._prev_request_at: Duration | None = None
        self._instances_created = 0
        self._cap_draws = 0
        self._sequence = 0

    def invoke(self, at: Duration, workload: Workload) -> InvocationRecord:
        """Serve one request at simulated time ``at``.

        The previous instance is dead iff its idle gap exceeds the idle
        timeout or its age exceeds its assigned cap (both strictly).
        """
        if self._prev_request_at is not None and at < self._prev_request_at:
            raise TimeTravel(
                f"invocation at {at} precedes last event at {self._prev_request_at}"
            )

        live = self._live
        alive = (
            live is not None
            and (at - live.last_served_at) <= self.policy.idle_timeout
            and (at - live.created_at) <= live.assigned_cap
        )

        if alive:
            start_kind = StartKind.WARM
            live.last_served_at = at
        else:
            start_kind = StartKind.COLD
            observed_interval = (
                at - self._prev_request_at if self._prev_request_at is not None else None
            )
            cap = assign_cap(
                self.policy.recycle_rule, observed_interval, self.seed + self._cap_draws
            )
            self._cap_draws += 1
            self._instances_created += 1
            live = _LiveInstance(
                identity=f"sim-{self._instances_created}",
                created_at=at,
                last_served_at=at,
                assigned_cap=cap,
            )
            self._live = live

        model = self.policy.latency_for(workload)
        mean = model.cold_mean if start_kind is StartKind.COLD else model.warm_mean
        latency = Duration(self._rng.randint(mean.ms - model.jitter.ms, mean.ms + model.jitter.ms))

        record = InvocationRecord(
            sequence_no=self._sequence,
            scheduled_at=at,
            sent_at=at,
            latency=latency,
            identity=live.identity,
            start_kind=start_kind,
            workload=workload,
        )
        self._sequence += 1
        self._prev_request_at = at
        return record


def run_trace(
    policy: ProviderPolicy,
    invocation_times: list[Duration] | tuple[Duration, ...],
    seed: int = 0,
    workload: Workload = Workload.FIBONACCI,
) -> list[InvocationRecord]:
    """Drive a fresh simulator through a sorted list of invocation times.

    Pure function of ``(policy, invocation_times, seed)``: same inputs, same
    records, byte for byte.
    """
    for earlier, later in zip(invocation_times, invocation_times[1:]):
        if later <= earlier:
            raise UnsortedTimes(
                f"invocation times must be strictly increasing ({later} after {earlier})"
            )
    simulator = FaasSimulator(policy, seed=seed)
    return [simulator.invoke(at, workload) for at in invocation_times]
