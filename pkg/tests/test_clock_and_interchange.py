"""Clock contracts, plus the simulator/HTTP adapter interchangeability check.

The end-to-end test runs the same (sub-second) idle-timeout search twice:
against an HTTP mock platform on the wall clock and against the simulator on
the virtual clock. Both must land on the same estimate.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from conftest import make_policy
from faasprobe.adapters import HttpAdapter, SelfUuid, SimulatorAdapter
from faasprobe.clock import VirtualClock, WallClock
from faasprobe.engine import SearchConfig, find_idle_timeout
from faasprobe.lifecycle import Duration
from faasprobe.simulator import FaasSimulator

MS = Duration


def test_virtual_clock_never_moves_backwards():
    clock = VirtualClock()
    clock.wait_until(Duration(500))
    clock.wait_until(Duration(100))  # waiting for the past is a no-op
    assert clock.now() == Duration(500)


def test_wall_clock_wait_until_reaches_target():
    clock = WallClock()
    clock.wait_until(Duration(30))
    assert clock.now().ms >= 30


class _MockPlatform:
    """Wall-clock FaaS target with a strict-greater idle timeout and no cap."""

    def __init__(self, idle_ms: int):
        self.idle_s = idle_ms / 1_000
        self.uuid: str | None = None
        self.last_arrival: float | None = None

    def serve(self) -> dict:
        now = time.monotonic()
        created = self.last_arrival is None or (now - self.last_arrival) > self.idle_s
        if created:
            self.uuid = str(uuid.uuid4())
        self.last_arrival = now
        return {"uuid": self.uuid, "created": created, "workload": "fib",
                "result": 0, "duration_ms": 1}


def _serve_platform(platform: _MockPlatform):
    class _Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            self.rfile.read(int(self.headers.get("Content-Length", 0)))
            body = json.dumps(platform.serve()).encode()
            self.send_response(200)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    return server, f"http://127.0.0.1:{server.server_address[1]}/"


_IDLE_MS = 250
_CONFIG = SearchConfig(
    upper_bound=MS(300),
    step=MS(100),
    campaign_duration=MS(600),
    warm_confirm_threshold=0.9,
)


@pytest.fixture(scope="module")
def wall_estimate():
    server, url = _serve_platform(_MockPlatform(_IDLE_MS))
    try:
        yield find_idle_timeout(HttpAdapter(url, SelfUuid()), WallClock(), _CONFIG)
    finally:
        server.shutdown()
        server.server_close()


def test_adapters_are_interchangeable_for_the_same_behavior(wall_estimate):
    sim_adapter = SimulatorAdapter(
        FaasSimulator(make_policy(idle_min=_IDLE_MS / 60_000))
    )
    sim_estimate = find_idle_timeout(sim_adapter, VirtualClock(), _CONFIG)

    assert wall_estimate.x == sim_estimate.x == MS(200)
    assert wall_estimate.confirm_at_x_plus_1.warm == 0
    # Same result shape either way.
    assert type(wall_estimate) is type(sim_estimate)
    assert wall_estimate.confirm_at_x.invocations == sim_estimate.confirm_at_x.invocations


def test_wall_clock_scheduling_is_absolute_with_bounded_skew(wall_estimate):
    # Scheduled times sit exactly on the campaign grid; skew stays bounded
    # per record instead of accumulating across the run.
    skews = [(r.sent_at - r.scheduled_at).ms for r in wall_estimate.records]
    assert all(r.sent_at >= r.scheduled_at for r in wall_estimate.records)
    assert max(skews) < 150
    first_half = skews[: len(skews) // 2]
    second_half = skews[len(skews) // 2 :]
    assert max(second_half) < max(first_half) + 100
