"""Deterministic metric simulation, bit-compatible with the engine.

The contract, applied once per strategy in the scheme:

    gamma    = numeric value of the HP2 token ("x0.20" -> 0.20)
    ft       = fine-tune epochs: HP1 (HP9 for C4) "*n" token, n * pretrain_epochs
    id_hash  = FNV-1a-64(canonical id)
    u        = unit_float(splitmix64(seed ^ id_hash))
    u'       = unit_float(splitmix64(seed ^ id_hash ^ 0x9E3779B97F4A7C15))
    params'  = params * (1 - gamma)
    flops'   = flops * (1 - gamma * clamp(0.8 + 0.4 u', 0, 1))
    damage   = gamma * (0.08 + 0.12 u)
    recovery = min(0.04 ft / (1 + consumed_finetune), 0.9 damage)
    accuracy' = clamp(accuracy * (1 - damage + recovery), 0, 1)

All arithmetic is float64 and plain 64-bit integer; draws depend only on
the strategy id and the seed, never on the position in the scheme.
"""

from __future__ import annotations

from .strategies import parse_strategy_id

MASK64 = 0xFFFFFFFFFFFFFFFF
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
SPLITMIX_GAMMA = 0x9E3779B97F4A7C15

TASK_FIELDS = (
    "category_count",
    "image_size",
    "channel_count",
    "data_amount",
    "param_count",
    "flops",
    "accuracy",
)


def fnv1a64(data: bytes | str) -> int:
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def splitmix64(x: int) -> int:
    z = (x + SPLITMIX_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def unit_float(x: int) -> float:
    return (x >> 11) / 9007199254740992.0  # 2**53


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def _base_metrics(task: dict) -> tuple[float, float, float]:
    if not isinstance(task, dict):
        raise ValueError("task must be an object")
    missing = [name for name in TASK_FIELDS if name not in task]
    if missing:
        raise ValueError(f"task is missing fields: {', '.join(missing)}")
    try:
        params = float(task["param_count"])
        flops = float(task["flops"])
        accuracy = float(task["accuracy"])
    except (TypeError, ValueError):
        raise ValueError("task fields must be numbers") from None
    if not params > 0 or not flops > 0:
        raise ValueError("param_count and flops must be positive")
    if not 0.0 <= accuracy <= 1.0:
        raise ValueError(f"accuracy must be in [0, 1], got {accuracy}")
    return params, flops, accuracy


def simulate_scheme(
    scheme: list[str], task: dict, pretrain_epochs: int, seed: int
) -> dict[str, float]:
    """Metrics of the model after applying ``scheme`` to the task's base."""
    params, flops, accuracy = _base_metrics(task)
    consumed = 0.0
    for canonical_id in scheme:
        gamma, ft_factor = parse_strategy_id(canonical_id)
        ft = ft_factor * pretrain_epochs
        id_hash = fnv1a64(canonical_id)
        u = unit_float(splitmix64((seed ^ id_hash) & MASK64))
        u2 = unit_float(splitmix64((seed ^ id_hash ^ SPLITMIX_GAMMA) & MASK64))
        damage = gamma * (0.08 + 0.12 * u)
        recovery = min(0.04 * ft / (1.0 + consumed), 0.9 * damage)
        params = params * (1.0 - gamma)
        flops = flops * (1.0 - gamma * _clamp(0.8 + 0.4 * u2, 0.0, 1.0))
        accuracy = _clamp(accuracy * (1.0 - damage + recovery), 0.0, 1.0)
        consumed = consumed + ft
    return {"params": params, "flops": flops, "accuracy": accuracy}


class MirrorBackend:
    """Reproduces the engine's simulated evaluator from the wire format."""

    name = "reference-mirror"

    def __init__(self, seed: int) -> None:
        self.seed = seed

    def evaluate(self, scheme: list[str], task: dict, pretrain_epochs: int) -> dict[str, float]:
        return simulate_scheme(scheme, task, pretrain_epochs, self.seed)


class StubBackend:
    """Echoes the base metrics; anything to evaluate is an error."""

    name = "reference-stub"

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def evaluate(self, scheme: list[str], task: dict, pretrain_epochs: int) -> dict[str, float]:
        if scheme:
            raise ValueError("stub backend only answers the empty scheme")
        params, flops, accuracy = _base_metrics(task)
        return {"params": params, "flops": flops, "accuracy": accuracy}
