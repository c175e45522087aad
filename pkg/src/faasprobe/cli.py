"""Command-line entry point: run probe campaigns, diff checkpoints, list presets.

Exit codes:
  0  success (for ``diff``: no changes detected)
  1  configuration or transport error
  2  measurement contradiction (inconsistent platform, upper bound too low,
     stale idle-timeout assumption)
  3  ``diff`` detected a change -- reserved so cron jobs can alert on silent
     platform changes
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .adapters import HttpAdapter, InvocationAdapter, SimulatorAdapter
from .clock import Clock, VirtualClock, WallClock
from .config import SIMULATOR_EPOCH, ProbeConfig, load_config
from .engine import find_idle_timeout, measure_keepalive, measure_latency
from .errors import (
    ConfigError,
    IdentityUnavailable,
    InconsistentPlatform,
    InvocationFailed,
    MalformedRecordLine,
    NoRecycleObserved,
    ProbeError,
    SearchExhausted,
    StalePlatformAssumption,
    TargetMismatch,
    UpperBoundTooLow,
)
from .presets import PRESETS
from .report import (
    CampaignReport,
    IdleSection,
    KeepAliveSection,
    append_records,
    compare_checkpoints,
    diff_to_dict,
    latency_section,
    load_report,
    persist_report,
    render_diff,
)
from .simulator import FaasSimulator

_EXIT_OK = 0
_EXIT_CONFIG_OR_TRANSPORT = 1
_EXIT_INCONSISTENT = 2
_EXIT_CHANGES_DETECTED = 3

_MEASUREMENT_ERRORS = (
    InconsistentPlatform,
    UpperBoundTooLow,
    StalePlatformAssumption,
    SearchExhausted,
)


def _fresh_adapter(config: ProbeConfig) -> InvocationAdapter:
    """Build an adapter for one campaign section.

    Simulator targets get a fresh simulator per section so sections are
    independent experiments (and each section's records replay from a clean
    policy state); HTTP targets necessarily share the live platform.
    """
    target = config.target
    if target.kind == "simulator":
        return SimulatorAdapter(FaasSimulator(target.policy, seed=config.seed))
    return HttpAdapter(target.url, target.identity_source, fib_n=target.fib_n)


def _clock_for(config: ProbeConfig) -> Clock:
    # Virtual clock for simulator targets compresses five-hour campaigns into
    # milliseconds; HTTP targets are bound to real time.
    return VirtualClock() if config.target.kind == "simulator" else WallClock()


def _started_at(config: ProbeConfig) -> str:
    if config.output.started_at:
        return config.output.started_at
    if config.target.kind == "simulator":
        return SIMULATOR_EPOCH
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _print_summary(report: CampaignReport) -> None:
    print(f"target_label: {report.target_label}")
    print(f"checkpoint: {report.policy_checkpoint_label}")
    if report.idle_estimate:
        print(f"idle_timeout_min: {report.idle_estimate.idle_timeout_min}")
    for section in report.keepalive:
        if section.finding:
            print(
                f"keepalive_interval_min: {section.polling_interval_min:g} "
                f"finding: {section.finding}"
            )
            continue
        print(f"keepalive_interval_min: {section.polling_interval_min:g}")
        print(f"keepalive_max_min: {section.max_min}")
        print(f"keepalive_p90_min: {section.p90_min}")
    if report.latency:
        for workload, stats in report.latency.items():
            print(f"{workload}_cold_mean_ms: {stats.cold_mean_ms:g}")
            print(f"{workload}_warm_mean_ms: {stats.warm_mean_ms:g}")
    if report.error:
        print(f"error: {report.error['code']}: {report.error['message']}")


def cmd_probe(config_path: str) -> int:
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG_OR_TRANSPORT

    output_dir = config.output.dir
    output_dir.mkdir(parents=True, exist_ok=True)
    records_path = output_dir / f"{config.output.label}.records.jsonl"
    report_path = output_dir / f"{config.output.label}.report.json"
    records_path.write_text("")  # start a fresh observation log per run

    report = CampaignReport(
        target_label=config.output.label,
        started_at=_started_at(config),
        policy_checkpoint_label=config.output.checkpoint_label,
        tool_version=__version__,
        effective_config=config.effective,
        keepalive=(),
    )
    exit_code = _EXIT_OK

    try:
        if config.search:
            adapter = _fresh_adapter(config)
            estimate = find_idle_timeout(adapter, _clock_for(config), config.search)
            report.idle_estimate = IdleSection.from_estimate(estimate)
            append_records(records_path, "idle_search", estimate.records)

        if config.keepalive:
            sections = []
            for interval in config.keepalive.intervals:
                adapter = _fresh_adapter(config)
                section_name = f"keepalive@{interval}"
                try:
                    result = measure_keepalive(
                        adapter,
                        _clock_for(config),
                        polling_interval=interval,
                        max_duration=config.keepalive.max_duration,
                        min_generations=config.keepalive.min_generations,
                    )
                except NoRecycleObserved:
                    sections.append(KeepAliveSection.no_recycle(interval))
                    continue
                sections.append(KeepAliveSection.from_result(result))
                append_records(records_path, section_name, result.records)
            report.keepalive = tuple(sections)

        if config.latency:
            adapter = _fresh_adapter(config)
            result = measure_latency(
                adapter,
                _clock_for(config),
                repetitions=config.latency.repetitions,
                cooldown=config.latency.cooldown,
            )
            report.latency = latency_section(result)
            append_records(records_path, "latency", result.records)

    except _MEASUREMENT_ERRORS as exc:
        report.error = {"code": exc.code, "message": str(exc)}
        exit_code = _EXIT_INCONSISTENT
    except (InvocationFailed, IdentityUnavailable) as exc:
        report.error = {"code": exc.code, "message": str(exc)}
        exit_code = _EXIT_CONFIG_OR_TRANSPORT

    persist_report(report, report_path)
    _print_summary(report)
    print(f"report: {report_path}")
    print(f"records: {records_path}")
    return exit_code


def cmd_diff(report_paths: list[str], json_out: str | None) -> int:
    try:
        reports = [load_report(p) for p in report_paths]
    except (OSError, ValueError, KeyError, MalformedRecordLine) as exc:
        print(f"cannot load reports: {exc}", file=sys.stderr)
        return _EXIT_CONFIG_OR_TRANSPORT

    try:
        diff = compare_checkpoints(reports)
    except TargetMismatch as exc:
        print(f"diff error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG_OR_TRANSPORT

    print(render_diff(diff))
    if json_out:
        Path(json_out).write_text(json.dumps(diff_to_dict(diff), indent=2) + "\n")
    return _EXIT_CHANGES_DETECTED if diff.has_changes() else _EXIT_OK


def cmd_presets() -> int:
    for name in sorted(PRESETS):
        policy = PRESETS[name]
        rule = type(policy.recycle_rule).__name__
        print(f"{name:<18} idle={policy.idle_timeout.minutes}min  rule={rule}")
    return _EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="faasprobe",
        description="Measure FaaS idle timeouts, keep-alive lifetimes, and cold/warm latency.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    probe = sub.add_parser("probe", help="run the campaigns requested by a config file")
    probe.add_argument("config", help="path to a probe config JSON file")

    diff = sub.add_parser("diff", help="compare checkpoint reports of one target")
    diff.add_argument("reports", nargs="+", help="two or more report JSON files")
    diff.add_argument("--json-out", help="also write the diff as JSON to this path")

    sub.add_parser("presets", help="list shipped provider policy presets")

    args = parser.parse_args(argv)
    if args.cmd == "probe":
        return cmd_probe(args.config)
    if args.cmd == "diff":
        return cmd_diff(args.reports, args.json_out)
    return cmd_presets()


if __name__ == "__main__":
    sys.exit(main())
