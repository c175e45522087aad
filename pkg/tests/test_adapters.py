from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from conftest import make_policy
from faasprobe.adapters import (
    BodyField,
    Header,
    HttpAdapter,
    SelfUuid,
    SimulatorAdapter,
    extract_identity,
    resolve_json_pointer,
)
from faasprobe.errors import IdentityUnavailable, InvocationFailed
from faasprobe.lifecycle import Duration, Workload
from faasprobe.simulator import FaasSimulator


class MockServer:
    """Minimal in-process HTTP target; ``respond(payload) -> (status, headers, body)``."""

    def __init__(self, respond):
        outer = self

        class _Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"{}")
                outer.requests.append(payload)
                status, headers, body = respond(payload)
                self.send_response(status)
                for name, value in headers.items():
                    self.send_header(name, value)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self.requests: list[dict] = []
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self.url = f"http://127.0.0.1:{self._server.server_address[1]}/"
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def serve():
    servers = []

    def _serve(respond) -> MockServer:
        server = MockServer(respond)
        servers.append(server)
        return server

    yield _serve
    for server in servers:
        server.close()


def json_response(doc, status=200, headers=None):
    return status, headers or {}, json.dumps(doc).encode()


class TestResolveJsonPointer:
    def test_nested_object(self):
        doc = {"ctx": {"logStreamName": "2022/01/08/[$LATEST]x9"}}
        assert resolve_json_pointer(doc, "/ctx/logStreamName") == "2022/01/08/[$LATEST]x9"

    def test_array_index_and_escapes(self):
        doc = {"a/b": [{"~x": "v"}]}
        assert resolve_json_pointer(doc, "/a~1b/0/~0x") == "v"

    def test_whole_document(self):
        assert resolve_json_pointer({"k": 1}, "") == {"k": 1}

    def test_missing_key_raises(self):
        with pytest.raises(KeyError):
            resolve_json_pointer({"a": 1}, "/b")


class TestExtractIdentity:
    def test_header_source(self):
        identity, created = extract_identity(b"{}", {"X-Instance-Id": "h-3"}, Header("x-instance-id"))
        assert (identity, created) == ("h-3", None)

    def test_self_uuid_source(self):
        body = json.dumps({"uuid": "u-1", "created": True}).encode()
        assert extract_identity(body, {}, SelfUuid()) == ("u-1", True)

    def test_body_field_source(self):
        body = json.dumps({"ctx": {"logStreamName": "2022/01/08/[$LATEST]x9"}}).encode()
        identity, created = extract_identity(body, {}, BodyField("/ctx/logStreamName"))
        assert identity == "2022/01/08/[$LATEST]x9"
        assert created is None

    def test_body_field_missing_key(self):
        with pytest.raises(IdentityUnavailable) as excinfo:
            extract_identity(b'{"ctx": {}}', {}, BodyField("/ctx/logStreamName"))
        assert excinfo.value.raw_body == b'{"ctx": {}}'

    def test_missing_header(self):
        with pytest.raises(IdentityUnavailable):
            extract_identity(b"{}", {"Other": "v"}, Header("X-Instance-Id"))

    def test_non_json_body(self):
        with pytest.raises(IdentityUnavailable):
            extract_identity(b"<html>", {}, SelfUuid())

    def test_self_uuid_without_uuid_field(self):
        with pytest.raises(IdentityUnavailable):
            extract_identity(b'{"created": true}', {}, SelfUuid())


class TestSimulatorAdapter:
    def test_first_call_is_created(self):
        adapter = SimulatorAdapter(FaasSimulator(make_policy(idle_min=5)))
        response = adapter.invoke(Workload.FIBONACCI, at=Duration(0))
        assert response.identity == "sim-1"
        assert response.created_this_call is True
        assert response.status == 200

    def test_reuse_reports_not_created(self):
        adapter = SimulatorAdapter(FaasSimulator(make_policy(idle_min=5)))
        adapter.invoke(Workload.FIBONACCI, at=Duration(0))
        response = adapter.invoke(Workload.FIBONACCI, at=Duration(1_000))
        assert response.identity == "sim-1"
        assert response.created_this_call is False


class TestHttpAdapter:
    def test_self_uuid_contract(self, serve):
        server = serve(lambda p: json_response(
            {"uuid": "abc", "created": False, "workload": p["workload"],
             "result": 63245986, "duration_ms": 3100}
        ))
        adapter = HttpAdapter(server.url, SelfUuid())
        response = adapter.invoke(Workload.FIBONACCI, at=Duration(0))
        assert response.identity == "abc"
        assert response.created_this_call is False
        assert server.requests == [{"workload": "fib", "n": 38}]

    def test_hello_omits_n(self, serve):
        server = serve(lambda p: json_response({"uuid": "u", "created": True}))
        HttpAdapter(server.url, SelfUuid()).invoke(Workload.HELLO_WORLD, at=Duration(0))
        assert server.requests == [{"workload": "hello"}]

    def test_body_field_extraction(self, serve):
        server = serve(lambda p: json_response(
            {"ctx": {"logStreamName": "2022/01/08/[$LATEST]x9"}}
        ))
        adapter = HttpAdapter(server.url, BodyField("/ctx/logStreamName"))
        response = adapter.invoke(Workload.FIBONACCI, at=Duration(0))
        assert response.identity == "2022/01/08/[$LATEST]x9"

    def test_header_extraction(self, serve):
        server = serve(lambda p: json_response({}, headers={"X-Instance-Id": "h-3"}))
        adapter = HttpAdapter(server.url, Header("X-Instance-Id"))
        assert adapter.invoke(Workload.FIBONACCI, at=Duration(0)).identity == "h-3"

    def test_server_errors_are_retried_and_recorded(self, serve):
        failures = {"remaining": 2}

        def respond(payload):
            if failures["remaining"] > 0:
                failures["remaining"] -= 1
                return 500, {}, b"boom"
            return json_response({"uuid": "ok", "created": True})

        adapter = HttpAdapter(serve(respond).url, SelfUuid(), max_retries=2)
        response = adapter.invoke(Workload.FIBONACCI, at=Duration(0))
        assert response.identity == "ok"
        assert response.retries == 2

    def test_retries_exhausted(self, serve):
        adapter = HttpAdapter(serve(lambda p: (503, {}, b"")).url, SelfUuid(), max_retries=1)
        with pytest.raises(InvocationFailed) as excinfo:
            adapter.invoke(Workload.FIBONACCI, at=Duration(0))
        assert excinfo.value.retryable is True

    def test_client_error_is_not_retried(self, serve):
        server = serve(lambda p: (400, {}, b"bad request"))
        adapter = HttpAdapter(server.url, SelfUuid(), max_retries=2)
        with pytest.raises(InvocationFailed) as excinfo:
            adapter.invoke(Workload.FIBONACCI, at=Duration(0))
        assert excinfo.value.retryable is False
        assert len(server.requests) == 1

    def test_identity_failure_attaches_body(self, serve):
        adapter = HttpAdapter(serve(lambda p: json_response({"nope": 1})).url, SelfUuid())
        with pytest.raises(IdentityUnavailable) as excinfo:
            adapter.invoke(Workload.FIBONACCI, at=Duration(0))
        assert b"nope" in excinfo.value.raw_body
