from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_policy
from faasprobe.errors import TimeTravel, UnsortedTimes
from faasprobe.lifecycle import Duration, StartKind, Workload
from faasprobe.policy import EmpiricalCap, PatternCap, PatternRule, StaticCap
from faasprobe.simulator import FaasSimulator, assign_cap, run_trace
from trace_oracle import oracle_classify

MIN = 60_000  # ms


def minutes(m: float) -> Duration:
    return Duration.from_minutes(m)


def trace_kinds(records) -> list[str]:
    return [r.start_kind.value for r in records]


class TestSimInvoke:
    def test_gap_equal_to_idle_is_warm(self):
        sim = FaasSimulator(make_policy(idle_min=5))
        first = sim.invoke(minutes(0), Workload.FIBONACCI)
        second = sim.invoke(minutes(5), Workload.FIBONACCI)
        assert first.start_kind is StartKind.COLD
        assert second.start_kind is StartKind.WARM
        assert second.identity == first.identity

    def test_gap_above_idle_is_cold(self):
        sim = FaasSimulator(make_policy(idle_min=5))
        sim.invoke(minutes(0), Workload.FIBONACCI)
        second = sim.invoke(minutes(6), Workload.FIBONACCI)
        assert second.start_kind is StartKind.COLD

    def test_cap_dominates_idle(self):
        policy = make_policy(idle_min=10, recycle_rule=StaticCap(minutes(10)))
        sim = FaasSimulator(policy)
        kinds = [
            sim.invoke(minutes(t), Workload.FIBONACCI).start_kind for t in (0, 9, 18)
        ]
        assert kinds == [StartKind.COLD, StartKind.WARM, StartKind.COLD]

    def test_age_equal_to_cap_is_warm(self):
        policy = make_policy(idle_min=10, recycle_rule=StaticCap(minutes(10)))
        sim = FaasSimulator(policy)
        sim.invoke(minutes(0), Workload.FIBONACCI)
        sim.invoke(minutes(5), Workload.FIBONACCI)
        at_cap = sim.invoke(minutes(10), Workload.FIBONACCI)
        assert at_cap.start_kind is StartKind.WARM

    def test_identities_are_sequential(self):
        sim = FaasSimulator(make_policy(idle_min=1))
        first = sim.invoke(minutes(0), Workload.FIBONACCI)
        second = sim.invoke(minutes(10), Workload.FIBONACCI)
        assert first.identity == "sim-1"
        assert second.identity == "sim-2"

    def test_time_travel_rejected(self):
        sim = FaasSimulator(make_policy(idle_min=5))
        sim.invoke(minutes(10), Workload.FIBONACCI)
        with pytest.raises(TimeTravel):
            sim.invoke(minutes(9), Workload.FIBONACCI)

    def test_zero_jitter_latency_is_exact(self):
        policy = make_policy(idle_min=5, fib_cold=1161, fib_warm=778)
        sim = FaasSimulator(policy)
        cold = sim.invoke(minutes(0), Workload.FIBONACCI)
        warm = sim.invoke(minutes(1), Workload.FIBONACCI)
        assert cold.latency == Duration(1161)
        assert warm.latency == Duration(778)

    def test_jitter_latency_within_half_width(self):
        policy = make_policy(
            idle_min=5, jitter_ms=50, fib_cold=1000, hello_warm=500
        )
        sim = FaasSimulator(policy, seed=11)
        cold = sim.invoke(minutes(0), Workload.FIBONACCI)
        assert 950 <= cold.latency.ms <= 1050


class TestAssignCap:
    AZURE_LIKE = PatternCap(
        rules=(
            PatternRule(minutes(0), minutes(5), minutes(2670)),
            PatternRule(Duration(5 * MIN + 1), minutes(12), minutes(20)),
        ),
        default_cap=minutes(20),
    )

    def test_pattern_frequent_interval_gets_long_cap(self):
        assert assign_cap(self.AZURE_LIKE, minutes(5), 0) == minutes(2670)

    def test_pattern_slow_interval_gets_short_cap(self):
        assert assign_cap(self.AZURE_LIKE, minutes(10), 0) == minutes(20)

    def test_pattern_no_interval_gets_default(self):
        assert assign_cap(self.AZURE_LIKE, None, 0) == minutes(20)

    def test_pattern_unmatched_interval_gets_default(self):
        assert assign_cap(self.AZURE_LIKE, minutes(15), 0) == minutes(20)

    def test_static_ignores_interval(self):
        rule = StaticCap(minutes(145))
        assert assign_cap(rule, minutes(3), 0) == minutes(145)
        assert assign_cap(rule, None, 99) == minutes(145)

    def test_empirical_cycles_from_seed(self):
        rule = EmpiricalCap(tuple(minutes(m) for m in (10, 20, 30)))
        draws = [assign_cap(rule, None, 7 + k) for k in range(4)]
        assert draws == [minutes(20), minutes(30), minutes(10), minutes(20)]


class TestRunTrace:
    def test_static_cap_keepalive_trace(self):
        policy = make_policy(idle_min=5, recycle_rule=StaticCap(minutes(145)))
        times = [minutes(m) for m in range(0, 151, 5)]
        records = run_trace(policy, times)
        kinds = trace_kinds(records)
        assert kinds[0] == "cold"
        assert all(k == "warm" for k in kinds[1:-1])  # warm through t=145
        assert kinds[-1] == "cold"  # age 150 exceeds the 145 cap

    def test_empty_times(self):
        assert run_trace(make_policy(idle_min=5), []) == []

    def test_unsorted_rejected(self):
        with pytest.raises(UnsortedTimes):
            run_trace(make_policy(idle_min=5), [minutes(2), minutes(1)])
        with pytest.raises(UnsortedTimes):
            run_trace(make_policy(idle_min=5), [minutes(1), minutes(1)])

    def test_deterministic_for_fixed_inputs(self):
        policy = make_policy(idle_min=3, jitter_ms=40)
        times = [minutes(m) for m in range(0, 60, 2)]
        assert run_trace(policy, times, seed=5) == run_trace(policy, times, seed=5)

    def test_first_invocation_is_cold(self):
        records = run_trace(make_policy(idle_min=5), [minutes(9)])
        assert records[0].start_kind is StartKind.COLD


def _random_policy(rng: random.Random):
    idle = rng.randint(1, 30)
    kind = rng.choice(("static", "empirical", "pattern"))
    if kind == "static":
        rule = StaticCap(minutes(rng.randint(1, 120)))
    elif kind == "empirical":
        rule = EmpiricalCap(
            tuple(minutes(rng.randint(1, 200)) for _ in range(rng.randint(1, 6)))
        )
    else:
        low = rng.randint(0, 5)
        high = rng.randint(low, 10)
        rule = PatternCap(
            rules=(PatternRule(minutes(low), minutes(high), minutes(rng.randint(1, 300))),),
            default_cap=minutes(rng.randint(1, 60)),
        )
    return make_policy(idle_min=idle, recycle_rule=rule)


def _random_times(rng: random.Random) -> list[Duration]:
    count = rng.randint(0, 40)
    ticks = sorted(rng.sample(range(0, 3_000), count))
    # Random sub-minute offsets exercise off-grid arrivals.
    return [Duration(t * 6_000 + rng.randint(0, 5_999)) for t in ticks]


class TestOracleEquivalence:
    def test_thousand_randomized_traces(self):
        rng = random.Random(0xFAA5)
        for _ in range(1000):
            policy = _random_policy(rng)
            times = _random_times(rng)
            seed = rng.randint(0, 2**16)
            records = run_trace(policy, times, seed=seed)
            assert trace_kinds(records) == oracle_classify(policy, times, seed=seed)


class TestSimulatorProperties:
    @given(
        idle_min=st.integers(1, 20),
        prefix_gaps=st.lists(st.integers(1, 12), max_size=6),
        gap_small=st.integers(1, 40),
        gap_delta=st.integers(1, 20),
    )
    @settings(max_examples=200)
    def test_idle_monotonicity(self, idle_min, prefix_gaps, gap_small, gap_delta):
        # If a request after the larger gap is warm, the smaller gap must be too.
        policy = make_policy(idle_min=idle_min)
        times = [minutes(0)]
        for g in prefix_gaps:
            times.append(times[-1] + minutes(g))

        def kind_after(gap_min: int) -> str:
            trace = times + [times[-1] + minutes(gap_min)]
            return trace_kinds(run_trace(policy, trace))[-1]

        if kind_after(gap_small + gap_delta) == "warm":
            assert kind_after(gap_small) == "warm"

    @given(
        cap_min=st.integers(1, 60),
        idle_min=st.integers(1, 60),
        step_min=st.integers(1, 10),
        count=st.integers(1, 80),
    )
    @settings(max_examples=200)
    def test_cap_bounds_instance_age(self, cap_min, idle_min, step_min, count):
        policy = make_policy(idle_min=idle_min, recycle_rule=StaticCap(minutes(cap_min)))
        times = [minutes(step_min * k) for k in range(count)]
        records = run_trace(policy, times)
        born: dict[str, Duration] = {}
        for record in records:
            born.setdefault(record.identity, record.scheduled_at)
            if record.start_kind is StartKind.WARM:
                age = record.scheduled_at - born[record.identity]
                assert age <= minutes(cap_min)
