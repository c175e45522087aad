"""Request handling: workloads plus the file-based instance fingerprint.

Every response carries a UUID that is stable for the lifetime of the function
instance and a ``created`` flag that is true exactly once, on the invocation
that initialized it. A prober can therefore detect instance reuse from the
response alone, with no access to platform logs.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
import uuid as uuidlib

DEFAULT_UUID_PATH = "/tmp/host.txt"

_GREETING = "hello"

_uuid_lock = threading.Lock()


class HandlerError(Exception):
    """Invalid request payload."""


def get_or_create_uuid(path: str = DEFAULT_UUID_PATH) -> tuple[str, bool]:
    """Return this instance's UUID, creating and persisting it on first use.

    Double-checked locking: once the file exists, readers take the fast path
    without acquiring the lock; creation itself is serialized, and the
    post-lock re-check ensures exactly one caller ever observes created=True.
    The file appears atomically (write to a temp name, then rename), so a
    concurrent fast-path read can never see a partial UUID.
    """
    if os.path.exists(path):
        with open(path, encoding="ascii") as handle:
            return handle.read().strip(), False

    with _uuid_lock:
        if os.path.exists(path):
            with open(path, encoding="ascii") as handle:
                return handle.read().strip(), False

        token = str(uuidlib.uuid4())
        directory = os.path.dirname(path) or "."
        fd, temp_path = tempfile.mkstemp(dir=directory, prefix=".host-")
        try:
            with os.fdopen(fd, "w", encoding="ascii") as handle:
                handle.write(token)
            os.replace(temp_path, path)
        except OSError:
            if os.path.exists(temp_path):
                os.unlink(temp_path)
            raise
        return token, True


def fib(n: int) -> int:
    """The CPU-bound probe workload: plain recursive Fibonacci, fib(1) = fib(2) = 1.

    Recursion is the point; this exists to burn a predictable amount of CPU
    per request, not to compute Fibonacci numbers efficiently.
    """
    if n < 1:
        raise HandlerError(f"fib requires n >= 1, got {n}")
    if n <= 2:
        return 1
    return fib(n - 1) + fib(n - 2)


def handle(request: dict, uuid_path: str = DEFAULT_UUID_PATH) -> tuple[int, dict]:
    """Serve one invocation; returns (http_status, response_body).

    ``duration_ms`` times the workload alone, excluding fingerprinting and
    serialization, so it reflects pure compute time.
    """
    workload = request.get("workload")
    if workload not in ("fib", "hello"):
        return 400, {"error": f"unknown workload {workload!r}", "status": 400}

    if workload == "fib":
        n = request.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            return 400, {"error": "fib requires an integer n >= 1", "status": 400}
        started = time.perf_counter()
        result: int | str = fib(n)
        duration_ms = int((time.perf_counter() - started) * 1_000)
    else:
        started = time.perf_counter()
        result = _GREETING
        duration_ms = int((time.perf_counter() - started) * 1_000)

    try:
        uuid, created = get_or_create_uuid(uuid_path)
    except OSError as exc:
        return 500, {"error": f"fingerprint storage failed: {exc}", "status": 500}

    return 200, {
        "uuid": uuid,
        "created": created,
        "workload": workload,
        "result": result,
        "duration_ms": duration_ms,
    }


def lambda_handler(
    event: dict, context: object = None, uuid_path: str = DEFAULT_UUID_PATH
) -> dict:
    """API-Gateway-style entry point for platforms that deliver proxy events."""
    body = event.get("body") if isinstance(event, dict) else None
    if isinstance(body, str):
        try:
            payload = json.loads(body or "{}")
        except ValueError:
            payload = {}
    elif isinstance(body, dict):
        payload = body
    elif isinstance(event, dict) and "workload" in event:
        payload = event  # direct invocation without a proxy wrapper
    else:
        payload = {}

    status, response = handle(payload, uuid_path=uuid_path)
    return {
        "statusCode": status,
        "headers": {"Content-Type": "application/json"},
        "body": json.dumps(response),
    }
