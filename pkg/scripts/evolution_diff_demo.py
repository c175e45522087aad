#!/usr/bin/env python3
"""Demonstrate checkpoint diffing: probe each platform at four dates, then diff.

Writes the twelve checkpoint reports under ./evolution-demo/ and runs the
``diff`` subcommand per provider. Exit code 3 from a diff means "change
detected" (scriptable alerting); 0 means the platform held steady.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from faasprobe.cli import main as cli_main

CHECKPOINTS = [
    ("01-02/2020", "2020-01-15T00:00:00Z"),
    ("09-10/2020", "2020-09-12T00:00:00Z"),
    ("03-05/2021", "2021-03-27T00:00:00Z"),
    ("07/2021-01/2022", "2021-07-19T00:00:00Z"),
]

# Which preset was in effect at each checkpoint.
PLANS = {
    "aws": ["aws-2020", "aws-2020", "aws-2021", "aws-2021"],
    "ibm": ["ibm-2021"] * 4,
    "azure": ["azure-2020-early", "azure-2020-late", "azure-2021", "azure-2021"],
}


def probe(base: Path, preset: str, label: str, checkpoint: str, started_at: str) -> Path:
    out_dir = base / label / checkpoint.replace("/", "_")
    config_path = out_dir / "config.json"
    out_dir.mkdir(parents=True, exist_ok=True)
    config_path.write_text(
        json.dumps(
            {
                "target": {"kind": "simulator", "preset": preset},
                # The early-2020 azure idle timeout sits at the default upper
                # bound, so search from a bit higher.
                "search": {"upper_bound_min": 25},
                "output": {
                    "dir": str(out_dir),
                    "label": label,
                    "checkpoint_label": checkpoint,
                    "started_at": started_at,
                },
            },
            indent=2,
        )
    )
    code = cli_main(["probe", str(config_path)])
    if code != 0:
        sys.exit(f"probe failed with exit code {code} for {config_path}")
    return out_dir / f"{label}.report.json"


def main() -> None:
    base = Path("evolution-demo")
    for label, presets in PLANS.items():
        reports = [
            probe(base, preset, label, checkpoint, started_at)
            for preset, (checkpoint, started_at) in zip(presets, CHECKPOINTS)
        ]
        print(f"\n=== {label} ===")
        code = cli_main(["diff", *map(str, reports)])
        print(f"diff exit code: {code}")


if __name__ == "__main__":
    main()
