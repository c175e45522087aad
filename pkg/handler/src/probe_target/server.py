"""Local HTTP serve mode: the same contract as the deployed function.

Threaded on purpose -- platforms may reuse one process for parallel requests,
and the fingerprint path must stay correct under that concurrency.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .handler import DEFAULT_UUID_PATH, handle


class _ProbeTargetServer(ThreadingHTTPServer):
    # The default listen backlog (5) drops connections under the bursts of
    # parallel requests a platform may deliver to one instance.
    request_queue_size = 128


def make_server(port: int = 0, uuid_path: str = DEFAULT_UUID_PATH) -> ThreadingHTTPServer:
    """Build (without starting) a server; port 0 picks a free port."""

    class _Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            raw = self.rfile.read(length)
            try:
                payload = json.loads(raw or b"{}")
            except ValueError:
                payload = None
            if not isinstance(payload, dict):
                status, body = 400, {"error": "request body must be a JSON object",
                                     "status": 400}
            else:
                status, body = handle(payload, uuid_path=uuid_path)
            encoded = json.dumps(body).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(encoded)))
            self.end_headers()
            self.wfile.write(encoded)

        def log_message(self, *args):
            pass

    return _ProbeTargetServer(("127.0.0.1", port), _Handler)


def serve(port: int, uuid_path: str = DEFAULT_UUID_PATH) -> None:
    """Serve until interrupted."""
    server = make_server(port, uuid_path)
    host, bound_port = server.server_address[:2]
    print(
        f"probe target listening on http://{host}:{bound_port}/ (uuid file: {uuid_path})",
        flush=True,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
