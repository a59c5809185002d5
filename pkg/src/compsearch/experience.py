"""Experience records: observed (strategy, task) -> (ar, pr) outcomes.

Records come either from past compression runs (JSONL files) or, for
desk-scale work, from the simulated environment via
:func:`synthesize_records`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .catalog import Catalog, Scheme
from .evaluation import EvaluatorConfig, SimulatedEvaluator, TaskFeatures, compute_metrics


@dataclass(frozen=True)
class ExperienceRecord:
    strategy: str  # canonical id
    task: TaskFeatures
    ar: float
    pr: float

    def __post_init__(self) -> None:
        if not self.ar > -1.0:
            raise ValueError(f"ar must be > -1, got {self.ar}")
        if not 0.0 <= self.pr <= 1.0:
            raise ValueError(f"pr must be in [0, 1], got {self.pr}")

    def to_dict(self) -> dict:
        return {"strategy": self.strategy, "task": self.task.to_dict(), "ar": self.ar, "pr": self.pr}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperienceRecord":
        return cls(
            strategy=str(data["strategy"]),
            task=TaskFeatures.from_dict(data["task"]),
            ar=float(data["ar"]),
            pr=float(data["pr"]),
        )


def save_records(records: Iterable[ExperienceRecord], out: IO[str]) -> int:
    n = 0
    for record in records:
        out.write(json.dumps(record.to_dict(), separators=(",", ":")) + "\n")
        n += 1
    return n


def load_records(path: str | Path, catalog: Catalog | None = None) -> list[ExperienceRecord]:
    """Read a JSONL experience file, optionally validating strategy ids."""
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = ExperienceRecord.from_dict(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad experience record: {exc}") from exc
            if catalog is not None and record.strategy not in catalog:
                raise KeyError(f"{path}:{lineno}: unknown strategy id {record.strategy!r}")
            records.append(record)
    return records


def synthesize_records(
    catalog: Catalog,
    n: int,
    rng: np.random.Generator,
    seed: int,
    pretrain_epochs: int = 1,
) -> list[ExperienceRecord]:
    """Single-step outcomes of random strategies on randomized tasks.

    Tasks are drawn over a broad, plausible range of classification
    workloads; each record applies one random strategy to the task's
    base model in the simulated environment (seeded by ``seed``).
    """
    records = []
    for _ in range(n):
        strategy = catalog.strategies[int(rng.integers(len(catalog.strategies)))]
        task = TaskFeatures(
            category_count=float(rng.choice([10, 20, 100, 1000])),
            image_size=float(rng.choice([32, 64, 128, 224])),
            channel_count=float(rng.choice([1, 3])),
            data_amount=float(np.round(10 ** rng.uniform(4.0, 6.5))),
            param_count=float(np.round(10 ** rng.uniform(5.0, 8.0))),
            flops=float(np.round(10 ** rng.uniform(7.0, 10.5))),
            accuracy=float(rng.uniform(0.5, 0.95)),
        )
        cfg = EvaluatorConfig(seed=seed, base_state=task.base_state(), pretrain_epochs=pretrain_epochs)
        evaluator = SimulatedEvaluator(catalog, cfg)
        after = evaluator.evaluate(Scheme((strategy.canonical_id,)))
        delta = compute_metrics(cfg.base_state, after)
        records.append(ExperienceRecord(strategy.canonical_id, task, delta.ar, delta.pr))
    return records
