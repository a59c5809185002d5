"""Scheme evaluation: metric algebra and the simulated environment.

A scheme is judged by what it does to the original model M:

    pr = (P(M) - P(S[M])) / P(M)      parameter reduction
    fr = (F(M) - F(S[M])) / F(M)      FLOPs reduction
    ar = (A(S[M]) - A(M)) / A(M)      accuracy change (> -1)

Real evaluators fine-tune networks on GPUs; the simulated environment
below is a deterministic stand-in that produces the same *shape* of
trade-off (more compression, more accuracy damage, diminishing
fine-tune returns) from nothing but the strategy id, a seed, and the
running model state. Every constant in it is part of the frozen
contract: external mirrors must reproduce the trajectories bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from .catalog import Catalog, Scheme, Strategy
from .rng import MASK64, SPLITMIX_GAMMA, fnv1a64, splitmix64, unit_float


@dataclass(frozen=True)
class ModelState:
    """Metrics of a (possibly compressed) model, plus fine-tune history."""

    params: float
    flops: float
    accuracy: float
    consumed_finetune: float = 0.0

    def __post_init__(self) -> None:
        if not self.params > 0:
            raise ValueError(f"params must be positive, got {self.params}")
        if not self.flops > 0:
            raise ValueError(f"flops must be positive, got {self.flops}")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must be in [0, 1], got {self.accuracy}")
        if self.consumed_finetune < 0:
            raise ValueError("consumed_finetune must be non-negative")


@dataclass(frozen=True)
class TaskFeatures:
    """The seven scalars a task exposes to predictors and evaluators."""

    category_count: float
    image_size: float
    channel_count: float
    data_amount: float
    param_count: float
    flops: float
    accuracy: float

    FIELDS = (
        "category_count",
        "image_size",
        "channel_count",
        "data_amount",
        "param_count",
        "flops",
        "accuracy",
    )

    def base_state(self) -> ModelState:
        return ModelState(self.param_count, self.flops, self.accuracy)

    def to_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in self.FIELDS}

    @classmethod
    def from_dict(cls, data: dict) -> "TaskFeatures":
        return cls(**{name: float(data[name]) for name in cls.FIELDS})


@dataclass(frozen=True)
class MetricsDelta:
    pr: float
    fr: float
    ar: float


@dataclass(frozen=True)
class EvaluatorConfig:
    """Settings of the simulated environment.

    ``pretrain_epochs`` resolves "*n" hyperparameter tokens: the token
    means n times the original model's pre-training epoch count.
    """

    seed: int
    base_state: ModelState
    pretrain_epochs: int = 1

    def __post_init__(self) -> None:
        if self.pretrain_epochs < 1:
            raise ValueError("pretrain_epochs must be >= 1")


def compute_metrics(before: ModelState, after: ModelState) -> MetricsDelta:
    """PR/FR/AR of ``after`` relative to ``before``."""
    return MetricsDelta(
        pr=(before.params - after.params) / before.params,
        fr=(before.flops - after.flops) / before.flops,
        ar=(after.accuracy - before.accuracy) / before.accuracy,
    )


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def _finetune_amount(strategy: Strategy, cfg: EvaluatorConfig) -> float:
    token = strategy.value("HP1")
    if token is None:
        token = strategy.value("HP9")  # C4 exposes HP9 instead of HP1
    if token is None:
        return 0.0
    return float(token[1:]) * cfg.pretrain_epochs


def simulate_step(state: ModelState, strategy: Strategy, cfg: EvaluatorConfig) -> ModelState:
    """Apply one strategy to ``state``. Pure; float64 throughout.

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

    The hash pipeline depends only on the strategy id and the seed, so a
    strategy's draws are position-independent; ordering still matters
    through the multiplicative damage and the accumulated fine-tuning.
    """
    gamma = float(strategy.value("HP2")[1:])
    ft = _finetune_amount(strategy, cfg)
    id_hash = fnv1a64(strategy.canonical_id)
    u = unit_float(splitmix64((cfg.seed ^ id_hash) & MASK64))
    u2 = unit_float(splitmix64((cfg.seed ^ id_hash ^ SPLITMIX_GAMMA) & MASK64))
    damage = gamma * (0.08 + 0.12 * u)
    recovery = min(0.04 * ft / (1.0 + state.consumed_finetune), 0.9 * damage)
    return ModelState(
        params=state.params * (1.0 - gamma),
        flops=state.flops * (1.0 - gamma * _clamp(0.8 + 0.4 * u2, 0.0, 1.0)),
        accuracy=_clamp(state.accuracy * (1.0 - damage + recovery), 0.0, 1.0),
        consumed_finetune=state.consumed_finetune + ft,
    )


class Evaluator(Protocol):
    """Anything that can price a scheme: simulated, external, or pooled."""

    base_state: ModelState

    def evaluate(self, scheme: Scheme) -> ModelState: ...

    def evaluate_many(self, schemes: Sequence[Scheme]) -> list[ModelState]: ...


class SimulatedEvaluator:
    """In-process deterministic evaluator over a catalog."""

    name = "simulated"

    def __init__(self, catalog: Catalog, cfg: EvaluatorConfig) -> None:
        self.catalog = catalog
        self.cfg = cfg
        self.base_state = cfg.base_state

    def step(self, state: ModelState, canonical_id: str) -> ModelState:
        return simulate_step(state, self.catalog.strategy(canonical_id), self.cfg)

    def evaluate(self, scheme: Scheme) -> ModelState:
        state = self.base_state
        for canonical_id in scheme.steps:
            state = self.step(state, canonical_id)
        return state

    def evaluate_many(self, schemes: Sequence[Scheme]) -> list[ModelState]:
        return [self.evaluate(s) for s in schemes]

    def close(self) -> None:  # uniform lifecycle with external evaluators
        pass


def evaluate_scheme(scheme: Scheme, evaluator: Evaluator) -> tuple[ModelState, MetricsDelta]:
    """Final state of the scheme plus metrics relative to the base model."""
    state = evaluator.evaluate(scheme)
    return state, compute_metrics(evaluator.base_state, state)
