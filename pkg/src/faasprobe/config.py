"""Probe configuration files: schema, validation, and default expansion.

A config is a single JSON document selecting the target (simulator preset,
inline policy, or HTTP endpoint) and which campaigns to run. Validation is
strict -- unknown keys are rejected -- and happens before any campaign
starts, so a typo cannot waste a five-hour run. The fully expanded effective
config (all defaults applied, seed resolved) is embedded in every report.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .adapters import DEFAULT_FIB_N, BodyField, Header, IdentitySource, SelfUuid
from .engine import DEFAULT_MIN_GENERATIONS, SearchConfig
from .errors import ConfigError
from .lifecycle import Duration
from .policy import ProviderPolicy, policy_from_dict, policy_to_dict
from .presets import PRESETS

#: Environment variable that overrides the config seed.
SEED_ENV_VAR = "PROBE_SEED"

_POSITIVE_NUMBER = {"type": "number", "exclusiveMinimum": 0}

_LATENCY_MODEL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["cold_ms", "warm_ms"],
    "properties": {
        "cold_ms": {"type": "integer", "exclusiveMinimum": 0},
        "warm_ms": {"type": "integer", "exclusiveMinimum": 0},
        "jitter_ms": {"type": "integer", "minimum": 0},
    },
}

_POLICY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "idle_timeout_min", "recycle_rule", "latency"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "idle_timeout_min": _POSITIVE_NUMBER,
        "recycle_rule": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "cap_min"],
                    "properties": {
                        "kind": {"const": "static_cap"},
                        "cap_min": _POSITIVE_NUMBER,
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "lifetimes_min"],
                    "properties": {
                        "kind": {"const": "empirical_cap"},
                        "lifetimes_min": {
                            "type": "array",
                            "minItems": 1,
                            "items": _POSITIVE_NUMBER,
                        },
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "rules", "default_cap_min"],
                    "properties": {
                        "kind": {"const": "pattern_cap"},
                        "rules": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "additionalProperties": False,
                                "required": [
                                    "interval_low_min",
                                    "interval_high_min",
                                    "cap_min",
                                ],
                                "properties": {
                                    "interval_low_min": {"type": "number", "minimum": 0},
                                    "interval_high_min": {"type": "number", "minimum": 0},
                                    "cap_min": _POSITIVE_NUMBER,
                                },
                            },
                        },
                        "default_cap_min": _POSITIVE_NUMBER,
                    },
                },
            ]
        },
        "latency": {
            "type": "object",
            "additionalProperties": False,
            "required": ["fib", "hello"],
            "properties": {
                "fib": _LATENCY_MODEL_SCHEMA,
                "hello": _LATENCY_MODEL_SCHEMA,
            },
        },
    },
}

_IDENTITY_SOURCE_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {"kind": {"const": "self_uuid"}},
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "json_pointer"],
            "properties": {
                "kind": {"const": "body_field"},
                "json_pointer": {"type": "string"},
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "name"],
            "properties": {
                "kind": {"const": "header"},
                "name": {"type": "string", "minLength": 1},
            },
        },
    ]
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["target", "output"],
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "target": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["simulator", "http"]},
                "preset": {"type": "string"},
                "policy": _POLICY_SCHEMA,
                "url": {"type": "string"},
                "identity_source": _IDENTITY_SOURCE_SCHEMA,
                "fib_n": {"type": "integer", "minimum": 1},
            },
        },
        "search": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "upper_bound_min": _POSITIVE_NUMBER,
                "step_min": _POSITIVE_NUMBER,
                "campaign_hours": _POSITIVE_NUMBER,
                "warm_confirm_threshold": {
                    "type": "number",
                    "exclusiveMinimum": 0,
                    "maximum": 1,
                },
            },
        },
        "keepalive": {
            "type": "object",
            "additionalProperties": False,
            "required": ["interval_min"],
            "properties": {
                "interval_min": {
                    "oneOf": [
                        _POSITIVE_NUMBER,
                        {"type": "array", "minItems": 1, "items": _POSITIVE_NUMBER},
                    ]
                },
                "max_hours": _POSITIVE_NUMBER,
                "min_generations": {"type": "integer", "minimum": 1},
            },
        },
        "latency": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "repetitions": {"type": "integer", "minimum": 3},
                "cooldown_min": _POSITIVE_NUMBER,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "required": ["label"],
            "properties": {
                "dir": {"type": "string"},
                "label": {"type": "string", "minLength": 1},
                "checkpoint_label": {"type": "string", "minLength": 1},
                "started_at": {"type": "string", "minLength": 1},
            },
        },
    },
}

_SEARCH_DEFAULTS = {
    "upper_bound_min": 20,
    "step_min": 1,
    "campaign_hours": 5,
    "warm_confirm_threshold": 0.9,
}
_KEEPALIVE_DEFAULTS = {"max_hours": 30, "min_generations": DEFAULT_MIN_GENERATIONS}
_LATENCY_DEFAULTS = {"repetitions": 10, "cooldown_min": 25}
#: Deterministic stamp for simulator-target reports (wall time would break
#: byte-identical reruns); HTTP targets get the real start time.
SIMULATOR_EPOCH = "1970-01-01T00:00:00Z"


@dataclass(frozen=True)
class TargetSettings:
    kind: str
    policy: ProviderPolicy | None
    url: str | None
    identity_source: IdentitySource | None
    fib_n: int


@dataclass(frozen=True)
class KeepAliveSettings:
    intervals: tuple[Duration, ...]
    max_duration: Duration
    min_generations: int


@dataclass(frozen=True)
class LatencySettings:
    repetitions: int
    cooldown: Duration


@dataclass(frozen=True)
class OutputSettings:
    dir: Path
    label: str
    checkpoint_label: str
    started_at: str | None


@dataclass(frozen=True)
class ProbeConfig:
    """A validated config with every default expanded."""

    target: TargetSettings
    search: SearchConfig | None
    keepalive: KeepAliveSettings | None
    latency: LatencySettings | None
    output: OutputSettings
    seed: int
    effective: dict


def _identity_source_from_dict(doc: dict) -> IdentitySource:
    kind = doc["kind"]
    if kind == "self_uuid":
        return SelfUuid()
    if kind == "body_field":
        return BodyField(json_pointer=doc["json_pointer"])
    return Header(name=doc["name"])


def load_config(path: Path | str) -> ProbeConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw)


def parse_config(raw: dict) -> ProbeConfig:
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        location = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config schema error at {location}: {exc.message}") from exc

    target_doc = raw["target"]
    kind = target_doc["kind"]
    policy: ProviderPolicy | None = None
    if kind == "simulator":
        preset = target_doc.get("preset")
        inline = target_doc.get("policy")
        if (preset is None) == (inline is None):
            raise ConfigError(
                "simulator target needs exactly one of 'preset' or 'policy'"
            )
        if preset is not None:
            if preset not in PRESETS:
                known = ", ".join(sorted(PRESETS))
                raise ConfigError(f"unknown preset {preset!r}; shipped presets: {known}")
            policy = PRESETS[preset]
        else:
            try:
                policy = policy_from_dict(inline)
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"invalid inline policy: {exc}") from exc
        if target_doc.get("url") or target_doc.get("identity_source"):
            raise ConfigError("simulator target does not take url/identity_source")
    else:
        if not target_doc.get("url"):
            raise ConfigError("http target requires 'url'")
        if not target_doc.get("identity_source"):
            raise ConfigError("http target requires 'identity_source'")

    identity_source = (
        _identity_source_from_dict(target_doc["identity_source"])
        if target_doc.get("identity_source")
        else None
    )
    target = TargetSettings(
        kind=kind,
        policy=policy,
        url=target_doc.get("url"),
        identity_source=identity_source,
        fib_n=target_doc.get("fib_n", DEFAULT_FIB_N),
    )

    search = None
    search_effective = None
    if "search" in raw:
        search_effective = {**_SEARCH_DEFAULTS, **raw["search"]}
        try:
            search = SearchConfig(
                upper_bound=Duration.from_minutes(search_effective["upper_bound_min"]),
                step=Duration.from_minutes(search_effective["step_min"]),
                campaign_duration=Duration.from_hours(
                    search_effective["campaign_hours"]
                ),
                warm_confirm_threshold=search_effective["warm_confirm_threshold"],
            )
        except ValueError as exc:
            raise ConfigError(f"config schema error in search section: {exc}") from exc

    keepalive = None
    keepalive_effective = None
    if "keepalive" in raw:
        keepalive_effective = {**_KEEPALIVE_DEFAULTS, **raw["keepalive"]}
        raw_intervals = keepalive_effective["interval_min"]
        if not isinstance(raw_intervals, list):
            raw_intervals = [raw_intervals]
        keepalive_effective["interval_min"] = raw_intervals
        keepalive = KeepAliveSettings(
            intervals=tuple(Duration.from_minutes(m) for m in raw_intervals),
            max_duration=Duration.from_hours(keepalive_effective["max_hours"]),
            min_generations=keepalive_effective["min_generations"],
        )

    latency = None
    latency_effective = None
    if "latency" in raw:
        latency_effective = {**_LATENCY_DEFAULTS, **raw["latency"]}
        latency = LatencySettings(
            repetitions=latency_effective["repetitions"],
            cooldown=Duration.from_minutes(latency_effective["cooldown_min"]),
        )

    if search is None and keepalive is None and latency is None:
        raise ConfigError(
            "config requests no campaigns; add a search, keepalive, or latency section"
        )

    output_doc = raw["output"]
    started_at = output_doc.get("started_at")
    output = OutputSettings(
        dir=Path(output_doc.get("dir", "probe-out")),
        label=output_doc["label"],
        checkpoint_label=output_doc.get("checkpoint_label", output_doc["label"]),
        started_at=started_at,
    )

    seed = raw.get("seed", 0)
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer: {env_seed!r}") from exc

    effective = {
        "seed": seed,
        "target": {
            "kind": kind,
            **({"policy": policy_to_dict(policy)} if policy else {}),
            **({"url": target.url} if target.url else {}),
            **(
                {"identity_source": target_doc["identity_source"]}
                if target_doc.get("identity_source")
                else {}
            ),
            "fib_n": target.fib_n,
        },
        **({"search": search_effective} if search_effective else {}),
        **({"keepalive": keepalive_effective} if keepalive_effective else {}),
        **({"latency": latency_effective} if latency_effective else {}),
        "output": {
            "dir": str(output.dir),
            "label": output.label,
            "checkpoint_label": output.checkpoint_label,
            **({"started_at": started_at} if started_at else {}),
        },
    }

    return ProbeConfig(
        target=target,
        search=search,
        keepalive=keepalive,
        latency=latency,
        output=output,
        seed=seed,
        effective=effective,
    )
