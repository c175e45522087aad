"""Probe target function: the workload a lifecycle prober deploys and invokes.

Stdlib only, so the module deploys unmodified as an HTTP-triggered cloud
function on any Python FaaS runtime. A local serve mode
(``python -m probe_target --serve PORT``) exposes the same contract for
desk testing and doubles as the prober's mock target.
"""

from .handler import HandlerError, fib, get_or_create_uuid, handle, lambda_handler
from .server import serve

__version__ = "0.1.0"

__all__ = [
    "HandlerError",
    "fib",
    "get_or_create_uuid",
    "handle",
    "lambda_handler",
    "serve",
    "__version__",
]
