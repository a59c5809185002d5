"""Run configuration: a flat key-value file (TOML or JSON) plus overrides.

Every knob of a search run lives in one flat namespace so that a config
file, command-line flags, and library calls all speak the same names.
The config hash identifies a run *setup*: it covers every field except
the seed and the output directory, so replicate runs of one experiment
share a hash.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .catalog import ConfigurationError
from .evaluation import TaskFeatures
from .protocol import DEFAULT_TIMEOUT, EVALUATOR_COMMAND_ENV
from .search import SearchSettings


@dataclass
class RunConfig:
    seed: int = 7
    gamma: float = 0.3  # target parameter-reduction rate
    max_len: int = 5  # longest scheme considered
    train_epochs: int = 50  # embedding / experience training epochs
    search_epochs: int = 200  # search rounds
    sample_size: int = 8  # schemes sampled per round
    pareto_cap: int = 16  # predicted-front evaluations per round
    decay: float = 0.7  # prefix aggregation decay
    lr: float = 0.001
    fmo_steps_per_round: int = 8
    eval_budget: int | None = None
    embedding_dim: int = 32
    transr_batch: int = 1024
    exp_batch: int = 128

    evaluator: str = "simulated"  # "simulated" or "external"
    evaluator_command: str | None = None  # external only; env var fallback
    evaluator_timeout: float = DEFAULT_TIMEOUT
    evaluator_workers: int = 1

    catalog_filter: str | None = None  # path to a whitelist JSON
    experience_path: str | None = None  # path to an experience JSONL
    synthetic_experience: int = 0  # records to synthesize when no file

    task_category_count: float = 10.0
    task_image_size: float = 32.0
    task_channel_count: float = 3.0
    task_data_amount: float = 50000.0
    task_param_count: float = 1.0e6
    task_flops: float = 3.0e8
    task_accuracy: float = 0.9
    pretrain_epochs: int = 1

    no_kg: bool = False
    no_exp: bool = False
    no_progressive_replay: bool = False

    oracle_limit: int = 100000  # refuse exhaustive runs above this
    out_dir: str = "run"

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigurationError(f"gamma must be in [0, 1), got {self.gamma}")
        if self.max_len < 0:
            raise ConfigurationError("max_len must be non-negative")
        if self.train_epochs < 0 or self.search_epochs < 0:
            raise ConfigurationError("epoch counts must be non-negative")
        if self.sample_size < 1 or self.pareto_cap < 1:
            raise ConfigurationError("sample_size and pareto_cap must be positive")
        if not 0.0 < self.decay <= 1.0:
            raise ConfigurationError("decay must be in (0, 1]")
        if self.lr <= 0:
            raise ConfigurationError("lr must be positive")
        if self.eval_budget is not None and self.eval_budget < 1:
            raise ConfigurationError("eval_budget must be positive when set")
        if self.embedding_dim < 1:
            raise ConfigurationError("embedding_dim must be positive")
        if self.evaluator not in ("simulated", "external"):
            raise ConfigurationError(
                f"evaluator must be 'simulated' or 'external', got {self.evaluator!r}"
            )
        if self.evaluator_timeout <= 0:
            raise ConfigurationError("evaluator_timeout must be positive")
        if self.evaluator_workers < 1:
            raise ConfigurationError("evaluator_workers must be positive")
        if self.synthetic_experience < 0:
            raise ConfigurationError("synthetic_experience must be non-negative")
        if self.pretrain_epochs < 1:
            raise ConfigurationError("pretrain_epochs must be >= 1")
        for name in TaskFeatures.FIELDS[:-1]:
            if getattr(self, f"task_{name}") <= 0:
                raise ConfigurationError(f"task_{name} must be positive")
        if not 0.0 <= self.task_accuracy <= 1.0:
            raise ConfigurationError("task_accuracy must be in [0, 1]")
        if self.oracle_limit < 1:
            raise ConfigurationError("oracle_limit must be positive")

    def task(self) -> TaskFeatures:
        return TaskFeatures(**{name: getattr(self, f"task_{name}") for name in TaskFeatures.FIELDS})

    def search_settings(self) -> SearchSettings:
        return SearchSettings(
            gamma=self.gamma,
            max_len=self.max_len,
            rounds=self.search_epochs,
            sample_size=self.sample_size,
            cap=self.pareto_cap,
            decay=self.decay,
            lr=self.lr,
            fmo_steps_per_round=self.fmo_steps_per_round,
            eval_budget=self.eval_budget,
            no_progressive_replay=self.no_progressive_replay,
            seed=self.seed,
        )

    def resolve_evaluator_command(self) -> str:
        command = self.evaluator_command or os.environ.get(EVALUATOR_COMMAND_ENV)
        if not command:
            raise ConfigurationError(
                "external evaluator selected but no command given "
                f"(set evaluator_command or ${EVALUATOR_COMMAND_ENV})"
            )
        return command


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_HASH_EXCLUDED = ("seed", "out_dir")


def _coerce(name: str, value):
    """Nudge file/flag values into the field's declared type."""
    field = _FIELDS[name]
    if value is None:
        return None
    if field.type in ("int", "int | None"):
        if isinstance(value, bool) or int(value) != value:
            raise ConfigurationError(f"config key {name!r} must be an integer, got {value!r}")
        return int(value)
    if field.type == "float":
        if isinstance(value, bool):
            raise ConfigurationError(f"config key {name!r} must be a number, got {value!r}")
        return float(value)
    if field.type == "bool":
        if not isinstance(value, bool):
            raise ConfigurationError(f"config key {name!r} must be a boolean, got {value!r}")
        return value
    if field.type in ("str", "str | None"):
        if not isinstance(value, str):
            raise ConfigurationError(f"config key {name!r} must be a string, got {value!r}")
        return value
    raise AssertionError(f"unhandled config field type: {field.type}")


def read_config_file(path: str | Path) -> dict:
    """Parse a flat TOML or JSON config file into a key-value dict."""
    path = Path(path)
    data = path.read_bytes()
    if path.suffix == ".json":
        loaded = json.loads(data)
    elif path.suffix == ".toml":
        loaded = tomllib.loads(data.decode())
    else:
        try:
            loaded = json.loads(data)
        except json.JSONDecodeError:
            try:
                loaded = tomllib.loads(data.decode())
            except tomllib.TOMLDecodeError:
                raise ConfigurationError(f"{path}: neither valid JSON nor valid TOML")
    if not isinstance(loaded, dict):
        raise ConfigurationError(f"{path}: config must be a flat table of keys")
    for key, value in loaded.items():
        if isinstance(value, dict):
            raise ConfigurationError(f"{path}: config must be flat, key {key!r} is a table")
    return loaded


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the file, then overrides; unknown keys are errors."""
    merged: dict = {}
    for source, values in (("config file", read_config_file(path) if path else {}),
                           ("override", overrides or {})):
        for key, value in values.items():
            if key not in _FIELDS:
                raise ConfigurationError(f"unknown {source} key: {key!r}")
            merged[key] = _coerce(key, value)
    return RunConfig(**merged)


def config_hash(config: RunConfig) -> str:
    """16 hex chars identifying the setup; seed and out_dir excluded."""
    payload = {
        name: getattr(config, name)
        for name in sorted(_FIELDS)
        if name not in _HASH_EXCLUDED
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
