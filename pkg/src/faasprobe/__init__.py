"""Black-box measurement of FaaS instance lifecycles, plus a deterministic simulator.

The package has three layers:

* ``lifecycle`` / ``policy`` -- shared value types (durations, invocation
  records, provider policies) and the small statistics the reports need.
* ``simulator`` / ``clock`` / ``adapters`` -- a virtual-clock lifecycle
  simulator and the uniform invocation interface over simulator and HTTP
  targets.
* ``engine`` / ``report`` / ``cli`` -- the measurement campaigns (idle-timeout
  search, keep-alive lifetimes, cold/warm latency), persisted reports, and
  checkpoint diffing.
"""

__version__ = "0.1.0"
