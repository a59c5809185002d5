"""Reference external evaluator for the compression-search line protocol.

Speaks newline-delimited JSON on stdin/stdout: a one-line handshake,
then one response per request. The mirror backend reproduces the
engine's simulated evaluator bit for bit from the wire format alone; it
shares no code with the engine on purpose, so the two implementations
check each other.
"""

from .mirror import MirrorBackend, StubBackend, fnv1a64, simulate_scheme, splitmix64, unit_float
from .server import PROTOCOL_HELLO, serve
from .strategies import UnknownStrategyError, parse_strategy_id

__version__ = "0.1.0"

__all__ = [
    "MirrorBackend",
    "PROTOCOL_HELLO",
    "StubBackend",
    "UnknownStrategyError",
    "fnv1a64",
    "parse_strategy_id",
    "serve",
    "simulate_scheme",
    "splitmix64",
    "unit_float",
]
