from __future__ import annotations

import argparse

from .handler import DEFAULT_UUID_PATH
from .server import serve


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="probe_target",
        description="Probe target function: local HTTP serve mode.",
    )
    parser.add_argument("--serve", type=int, metavar="PORT", required=True,
                        help="serve the handler contract on this port")
    parser.add_argument("--uuid-path", default=DEFAULT_UUID_PATH,
                        help=f"instance fingerprint file (default {DEFAULT_UUID_PATH})")
    args = parser.parse_args(argv)
    serve(args.serve, uuid_path=args.uuid_path)


if __name__ == "__main__":
    main()
