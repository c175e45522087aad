"""Uniform invocation interface over probe targets.

Campaigns talk to a target through a single ``invoke(workload, at)`` call,
whether the target is the in-process simulator or an HTTPS endpoint. Instance
identity is extracted per a configurable :data:`IdentitySource`: a JSON body
field, a response header, or the self-reported UUID contract of the probe
target handler. Platform log-store queries are deliberately not supported;
the identity must be surfaced in the response itself.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Mapping, Protocol, Union

import requests

from .errors import IdentityUnavailable, InvocationFailed
from .lifecycle import Duration, InstanceIdentity, StartKind, Workload
from .simulator import FaasSimulator

#: Default request timeout, comfortably above the usual platform-side
#: execution timeout so a platform abort surfaces as a failed response rather
#: than a client timeout race.
DEFAULT_TIMEOUT_S = 20.0

#: Default recursive-Fibonacci workload depth sent to HTTP targets.
DEFAULT_FIB_N = 38


@dataclass(frozen=True)
class InvocationResponse:
    """One raw target response, before campaign bookkeeping."""

    identity: InstanceIdentity
    created_this_call: bool | None
    latency: Duration
    raw_body: bytes
    status: int
    retries: int = 0


@dataclass(frozen=True)
class BodyField:
    """Identity lives at an RFC 6901 JSON pointer into the response body."""

    json_pointer: str


@dataclass(frozen=True)
class Header:
    """Identity lives in a response header (name compared case-insensitively)."""

    name: str


@dataclass(frozen=True)
class SelfUuid:
    """Identity follows the probe target handler's self-reported UUID contract.

    The body is JSON with a stable ``uuid`` and a ``created`` flag that is
    true exactly once per instance lifetime.
    """


IdentitySource = Union[BodyField, Header, SelfUuid]


class InvocationAdapter(Protocol):
    def invoke(
        self, workload: Workload, at: Duration, n: int | None = None
    ) -> InvocationResponse: ...


def resolve_json_pointer(document: object, pointer: str) -> object:
    """Resolve an RFC 6901 JSON pointer; raises KeyError/IndexError on a miss."""
    if pointer == "":
        return document
    if not pointer.startswith("/"):
        raise ValueError(f"JSON pointer must start with '/': {pointer!r}")
    node = document
    for token in pointer.split("/")[1:]:
        token = token.replace("~1", "/").replace("~0", "~")
        if isinstance(node, dict):
            node = node[token]
        elif isinstance(node, list):
            node = node[int(token)]
        else:
            raise KeyError(token)
    return node


def extract_identity(
    response_bytes: bytes, headers: Mapping[str, str], source: IdentitySource
) -> tuple[InstanceIdentity, bool | None]:
    """Extract the instance identity (and, for SelfUuid, the creation flag).

    Pure and total over its declared error set: any shape mismatch raises
    :class:`IdentityUnavailable` with the raw body attached.
    """
    if isinstance(source, Header):
        for name, value in headers.items():
            if name.lower() == source.name.lower():
                if not value:
                    break
                return value, None
        raise IdentityUnavailable(
            f"response header {source.name!r} absent or empty", raw_body=response_bytes
        )

    try:
        document = json.loads(response_bytes)
    except ValueError as exc:
        raise IdentityUnavailable(
            f"response body is not JSON: {exc}", raw_body=response_bytes
        ) from exc

    if isinstance(source, BodyField):
        try:
            value = resolve_json_pointer(document, source.json_pointer)
        except (KeyError, IndexError, ValueError, TypeError) as exc:
            raise IdentityUnavailable(
                f"JSON pointer {source.json_pointer!r} not found in body",
                raw_body=response_bytes,
            ) from exc
        if not isinstance(value, str) or not value:
            raise IdentityUnavailable(
                f"JSON pointer {source.json_pointer!r} is not a non-empty string",
                raw_body=response_bytes,
            )
        return value, None

    if isinstance(source, SelfUuid):
        if not isinstance(document, dict) or not isinstance(document.get("uuid"), str):
            raise IdentityUnavailable(
                "self-uuid body lacks a string 'uuid' field", raw_body=response_bytes
            )
        uuid = document["uuid"]
        if not uuid:
            raise IdentityUnavailable("self-uuid 'uuid' is empty", raw_body=response_bytes)
        created = document.get("created")
        return uuid, created if isinstance(created, bool) else None

    raise TypeError(f"unknown identity source {source!r}")


class SimulatorAdapter:
    """Drives an in-process :class:`FaasSimulator`; ``at`` is the simulated time."""

    def __init__(self, simulator: FaasSimulator):
        self.simulator = simulator

    def invoke(
        self, workload: Workload, at: Duration, n: int | None = None
    ) -> InvocationResponse:
        record = self.simulator.invoke(at, workload)
        body = {
            "uuid": record.identity,
            "created": record.start_kind is StartKind.COLD,
            "workload": workload.value,
            "result": None,
            "duration_ms": record.latency.ms,
        }
        return InvocationResponse(
            identity=record.identity,
            created_this_call=record.start_kind is StartKind.COLD,
            latency=record.latency,
            raw_body=json.dumps(body).encode(),
            status=200,
        )


class HttpAdapter:
    """POSTs the probe workload to an HTTPS endpoint and extracts the identity.

    Wire format: ``{"workload": "fib"|"hello", "n": <int>}`` (``n`` only for
    fib). Retryable failures (connection errors, 5xx) are retried at most
    ``max_retries`` times immediately; the count is recorded on the response
    and scheduling is unaffected because campaigns schedule by absolute time.
    """

    def __init__(
        self,
        url: str,
        identity_source: IdentitySource,
        *,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        max_retries: int = 2,
        fib_n: int = DEFAULT_FIB_N,
        session: requests.Session | None = None,
    ):
        self.url = url
        self.identity_source = identity_source
        self.timeout_s = timeout_s
        self.max_retries = max_retries
        self.fib_n = fib_n
        self._session = session or requests.Session()

    def invoke(
        self, workload: Workload, at: Duration, n: int | None = None
    ) -> InvocationResponse:
        payload: dict = {"workload": workload.value}
        if workload is Workload.FIBONACCI:
            payload["n"] = n if n is not None else self.fib_n

        last_error: InvocationFailed | None = None
        for attempt in range(self.max_retries + 1):
            started = time.perf_counter()
            try:
                response = self._session.post(
                    self.url, json=payload, timeout=self.timeout_s
                )
            except requests.RequestException as exc:
                last_error = InvocationFailed(f"transport failure: {exc}", retryable=True)
                continue
            latency = Duration(int((time.perf_counter() - started) * 1_000))

            if response.status_code >= 500:
                last_error = InvocationFailed(
                    f"server error {response.status_code}",
                    retryable=True,
                    status=response.status_code,
                )
                continue
            if response.status_code >= 400:
                raise InvocationFailed(
                    f"request rejected with status {response.status_code}",
                    retryable=False,
                    status=response.status_code,
                )

            identity, created = extract_identity(
                response.content, response.headers, self.identity_source
            )
            return InvocationResponse(
                identity=identity,
                created_this_call=created,
                latency=latency,
                raw_body=response.content,
                status=response.status_code,
                retries=attempt,
            )

        assert last_error is not None
        raise last_error
