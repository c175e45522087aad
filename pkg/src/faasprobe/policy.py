"""Provider lifecycle policies: idle timeout, recycle-cap rule, latency model.

A :class:`ProviderPolicy` is the full rule set of a simulated platform. The
three recycle-cap rules model the behaviors seen across real platforms:

* ``StaticCap`` -- every instance lives at most a fixed total age, the
  near-constant recycling some platforms apply.
* ``EmpiricalCap`` -- per-instance caps cycle through a measured lifetime
  list, for platforms that occasionally retain an instance much longer.
* ``PatternCap`` -- the cap depends on the most recent inter-arrival gap,
  for platforms that reward "frequent" traffic patterns with long retention.
  Keying on the single most recent gap is a modeling assumption: it is the
  simplest mechanism consistent with the observed behavior.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .lifecycle import Duration, Workload


@dataclass(frozen=True)
class StaticCap:
    cap: Duration

    def __post_init__(self):
        if self.cap.ms <= 0:
            raise ValueError("cap must be positive")


@dataclass(frozen=True)
class EmpiricalCap:
    """Caps drawn by cycling ``lifetimes``, starting at an index derived from the seed."""

    lifetimes: tuple[Duration, ...]

    def __post_init__(self):
        if not self.lifetimes:
            raise ValueError("empirical cap needs at least one lifetime")
        if any(d.ms <= 0 for d in self.lifetimes):
            raise ValueError("every empirical lifetime must be positive")


@dataclass(frozen=True)
class PatternRule:
    """Inclusive inter-arrival range [low, high] mapped to an instance cap."""

    interval_low: Duration
    interval_high: Duration
    cap: Duration

    def __post_init__(self):
        if self.interval_high < self.interval_low:
            raise ValueError("rule range is inverted")
        if self.cap.ms <= 0:
            raise ValueError("cap must be positive")


@dataclass(frozen=True)
class PatternCap:
    rules: tuple[PatternRule, ...]
    default_cap: Duration

    def __post_init__(self):
        if self.default_cap.ms <= 0:
            raise ValueError("default cap must be positive")
        prev_high = None
        for rule in self.rules:
            if prev_high is not None and rule.interval_low <= prev_high:
                raise ValueError("pattern rules must be ordered and non-overlapping")
            prev_high = rule.interval_high


RecycleRule = Union[StaticCap, EmpiricalCap, PatternCap]


@dataclass(frozen=True)
class LatencyModel:
    """Mean response times for one workload, with uniform jitter of the given half-width."""

    cold_mean: Duration
    warm_mean: Duration
    jitter: Duration = Duration(0)

    def __post_init__(self):
        if self.cold_mean.ms <= 0 or self.warm_mean.ms <= 0:
            raise ValueError("latency means must be positive")
        if self.jitter >= self.cold_mean or self.jitter >= self.warm_mean:
            raise ValueError("jitter half-width must be below both latency means")


@dataclass(frozen=True)
class ProviderPolicy:
    """Full lifecycle rule set of a (simulated) platform."""

    name: str
    idle_timeout: Duration
    recycle_rule: RecycleRule
    latency: Mapping[Workload, LatencyModel]

    def __post_init__(self):
        if not self.name:
            raise ValueError("policy name must be non-empty")
        if self.idle_timeout.ms <= 0:
            raise ValueError("idle timeout must be positive")
        missing = [w.value for w in Workload if w not in self.latency]
        if missing:
            raise ValueError(f"latency model missing for workloads: {missing}")

    def latency_for(self, workload: Workload) -> LatencyModel:
        return self.latency[workload]


def _rule_to_dict(rule: RecycleRule) -> dict:
    if isinstance(rule, StaticCap):
        return {"kind": "static_cap", "cap_min": rule.cap.ms / 60_000}
    if isinstance(rule, EmpiricalCap):
        return {
            "kind": "empirical_cap",
            "lifetimes_min": [d.ms / 60_000 for d in rule.lifetimes],
        }
    if isinstance(rule, PatternCap):
        return {
            "kind": "pattern_cap",
            "rules": [
                {
                    "interval_low_min": r.interval_low.ms / 60_000,
                    "interval_high_min": r.interval_high.ms / 60_000,
                    "cap_min": r.cap.ms / 60_000,
                }
                for r in rule.rules
            ],
            "default_cap_min": rule.default_cap.ms / 60_000,
        }
    raise TypeError(f"unknown recycle rule {rule!r}")


def _rule_from_dict(doc: dict) -> RecycleRule:
    kind = doc.get("kind")
    if kind == "static_cap":
        return StaticCap(cap=Duration.from_minutes(doc["cap_min"]))
    if kind == "empirical_cap":
        return EmpiricalCap(
            lifetimes=tuple(Duration.from_minutes(m) for m in doc["lifetimes_min"])
        )
    if kind == "pattern_cap":
        return PatternCap(
            rules=tuple(
                PatternRule(
                    interval_low=Duration.from_minutes(r["interval_low_min"]),
                    interval_high=Duration.from_minutes(r["interval_high_min"]),
                    cap=Duration.from_minutes(r["cap_min"]),
                )
                for r in doc["rules"]
            ),
            default_cap=Duration.from_minutes(doc["default_cap_min"]),
        )
    raise ValueError(f"unknown recycle rule kind {kind!r}")


def policy_to_dict(policy: ProviderPolicy) -> dict:
    """Serialize a policy to the JSON document shape used by config files and presets."""
    return {
        "name": policy.name,
        "idle_timeout_min": policy.idle_timeout.ms / 60_000,
        "recycle_rule": _rule_to_dict(policy.recycle_rule),
        "latency": {
            workload.value: {
                "cold_ms": model.cold_mean.ms,
                "warm_ms": model.warm_mean.ms,
                "jitter_ms": model.jitter.ms,
            }
            for workload, model in sorted(
                policy.latency.items(), key=lambda kv: kv[0].value
            )
        },
    }


def policy_from_dict(doc: dict) -> ProviderPolicy:
    """Build a policy from its JSON document shape (inverse of :func:`policy_to_dict`)."""
    latency = {}
    for key, model_doc in doc["latency"].items():
        workload = Workload(key)
        latency[workload] = LatencyModel(
            cold_mean=Duration(int(model_doc["cold_ms"])),
            warm_mean=Duration(int(model_doc["warm_ms"])),
            jitter=Duration(int(model_doc.get("jitter_ms", 0))),
        )
    return ProviderPolicy(
        name=doc["name"],
        idle_timeout=Duration.from_minutes(doc["idle_timeout_min"]),
        recycle_rule=_rule_from_dict(doc["recycle_rule"]),
        latency=latency,
    )
