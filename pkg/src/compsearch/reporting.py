"""Run orchestration and on-disk artifacts.

A search run directory contains:

    config.json   resolved configuration plus its hash
    trace.jsonl   one object per evaluation, in evaluation order
    pareto.csv    the final constrained front (semicolon-separated)
    summary.json  headline numbers for the run

An oracle run adds ``oracle_front.csv`` / ``oracle_hv.json`` (and keeps
its own ``oracle_config.json``), so both can share a directory. All CSV
artifacts are semicolon-separated; floats are written with ``repr`` so
they round-trip exactly.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .catalog import Catalog, ConfigurationError, Scheme, build_catalog, space_size
from .config import RunConfig, config_hash
from .embeddings import learn_embeddings
from .evaluation import EvaluatorConfig, SimulatedEvaluator
from .experience import load_records, synthesize_records
from .knowledge_graph import build_kg
from .pareto import hypervolume, pareto_front_indices
from .protocol import EvaluatorPool, ExternalEvaluator
from .rng import derive_seed, substream
from .search import ParetoPoint, exhaustive_evaluate, front_points, run_search

logger = logging.getLogger(__name__)

PARETO_HEADER = "scheme;accuracy;params;flops;pr;fr;ar"


# ---------------------------------------------------------------- artifacts


def write_trace(path: str | Path, rows: Iterable[dict]) -> int:
    count = 0
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
            count += 1
    return count


def read_trace(path: str | Path) -> list[dict]:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def write_pareto_csv(path: str | Path, points: Sequence[ParetoPoint]) -> None:
    with open(path, "w") as fh:
        fh.write(PARETO_HEADER + "\n")
        for p in points:
            fields = (
                str(p.scheme),
                repr(p.accuracy),
                repr(p.params),
                repr(p.flops),
                repr(p.pr),
                repr(p.fr),
                repr(p.ar),
            )
            fh.write(";".join(fields) + "\n")


def parse_scheme_text(text: str) -> Scheme:
    """Inverse of ``str(scheme)``: "START" or "id->id->...". Structural
    only; catalog membership is the caller's concern."""
    if text == "START":
        return Scheme()
    if not text:
        raise ValueError("empty scheme text")
    return Scheme(tuple(text.split("->")))


def read_pareto_csv(path: str | Path) -> list[ParetoPoint]:
    points = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != PARETO_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            scheme_text, *numbers = line.split(";")
            if len(numbers) != 6:
                raise ValueError(f"{path}: malformed row {line!r}")
            acc, params, flops, pr, fr, ar = (float(x) for x in numbers)
            points.append(ParetoPoint(parse_scheme_text(scheme_text), acc, params, flops, pr, fr, ar))
    return points


def write_json(path: str | Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def config_payload(config: RunConfig) -> dict:
    payload = dataclasses.asdict(config)
    payload["config_hash"] = config_hash(config)
    return payload


# ------------------------------------------------------------------- setup


def build_evaluator(config: RunConfig, catalog: Catalog):
    task = config.task()
    if config.evaluator == "simulated":
        cfg = EvaluatorConfig(
            seed=derive_seed(config.seed, "evaluator"),
            base_state=task.base_state(),
            pretrain_epochs=config.pretrain_epochs,
        )
        return SimulatedEvaluator(catalog, cfg)
    command = config.resolve_evaluator_command()
    make = lambda: ExternalEvaluator(
        command, task, config.pretrain_epochs, timeout=config.evaluator_timeout
    )
    if config.evaluator_workers > 1:
        return EvaluatorPool([make() for _ in range(config.evaluator_workers)])
    return make()


def gather_experience(config: RunConfig, catalog: Catalog) -> list:
    if config.no_exp:
        return []
    if config.experience_path:
        records = load_records(config.experience_path, catalog)
        logger.info("loaded %d experience records from %s", len(records), config.experience_path)
        return records
    if config.synthetic_experience > 0:
        records = synthesize_records(
            catalog,
            config.synthetic_experience,
            substream(config.seed, "experience"),
            seed=derive_seed(config.seed, "evaluator"),
            pretrain_epochs=config.pretrain_epochs,
        )
        logger.info("synthesized %d experience records", len(records))
        return records
    return []


def prepare_embeddings(config: RunConfig, catalog: Catalog):
    kg = build_kg(catalog)
    records = gather_experience(config, catalog)
    return learn_embeddings(
        catalog,
        kg,
        records,
        dim=config.embedding_dim,
        train_epochs=config.train_epochs,
        seed=config.seed,
        lr=config.lr,
        transr_batch=config.transr_batch,
        exp_batch=config.exp_batch,
        no_kg=config.no_kg,
        no_exp=config.no_exp,
    )


# ---------------------------------------------------------------- commands


def cmd_search(config: RunConfig) -> dict:
    """Full pipeline: embeddings, search, artifacts. Returns the summary."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    catalog = build_catalog(config.catalog_filter)
    if config.max_len < 1:
        raise ConfigurationError("search needs max_len >= 1")
    logger.info("catalog: %d strategies", len(catalog))
    table = prepare_embeddings(config, catalog)
    evaluator = build_evaluator(config, catalog)
    try:
        result = run_search(catalog, table, evaluator, config.search_settings())
    finally:
        close = getattr(evaluator, "close", None)
        if close is not None:
            close()
    wall_time = time.monotonic() - started
    logger.info(
        "search done: %d evaluations, %d rounds, front size %d, hypervolume %.6f",
        result.evaluation_count,
        result.rounds_run,
        len(result.front),
        result.hypervolume,
    )

    write_json(out / "config.json", config_payload(config))
    trace_lines = write_trace(out / "trace.jsonl", result.trace)
    write_pareto_csv(out / "pareto.csv", result.front)
    best = max(result.front, key=lambda p: p.accuracy, default=None)
    summary = {
        "hypervolume": result.hypervolume,
        "best_accuracy_scheme": None if best is None else str(best.scheme),
        "evaluation_count": trace_lines,
        "wall_time": wall_time,
        "front_size": len(result.front),
        "rounds_run": result.rounds_run,
        "budget_exhausted": result.budget_exhausted,
        "space_exhausted": result.space_exhausted,
        "kg_training": not config.no_kg,
        "exp_training": not config.no_exp,
        "config_hash": config_hash(config),
        "seed": config.seed,
    }
    write_json(out / "summary.json", summary)
    return summary


def cmd_oracle(config: RunConfig) -> dict:
    """Exhaustively evaluate the scheme space and write the true front.

    Refuses to start when the space exceeds ``oracle_limit``, citing the
    computed size.
    """
    catalog = build_catalog(config.catalog_filter)
    size = space_size(len(catalog), config.max_len)
    if size > config.oracle_limit:
        raise ConfigurationError(
            f"scheme space holds {size} schemes "
            f"(catalog {len(catalog)}, max_len {config.max_len}), "
            f"above the oracle limit of {config.oracle_limit}; refusing"
        )
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    evaluator = build_evaluator(config, catalog)
    try:
        entries = exhaustive_evaluate(catalog, evaluator, config.max_len)
    finally:
        close = getattr(evaluator, "close", None)
        if close is not None:
            close()
    points = front_points(entries, evaluator.base_state, config.gamma)
    hv = hypervolume(
        np.array([p.accuracy for p in points]),
        np.array([p.params for p in points]),
        evaluator.base_state.params,
    )
    wall_time = time.monotonic() - started
    logger.info(
        "oracle done: %d schemes, front size %d, hypervolume %.6f", size, len(points), hv
    )
    write_json(out / "oracle_config.json", config_payload(config))
    write_pareto_csv(out / "oracle_front.csv", points)
    payload = {
        "hypervolume": hv,
        "scheme_count": size,
        "front_size": len(points),
        "wall_time": wall_time,
        "gamma": config.gamma,
        "max_len": config.max_len,
    }
    write_json(out / "oracle_hv.json", payload)
    return payload


def hv_curve(
    trace_rows: Sequence[dict], gamma: float, max_checkpoints: int = 1000
) -> list[tuple[int, float]]:
    """Hypervolume of the feasible front after each evaluation.

    The base model is the trace's first row (the START evaluation).
    Long traces are sampled down to ``max_checkpoints`` checkpoints;
    the final evaluation is always included.
    """
    if not trace_rows:
        return []
    if trace_rows[0]["scheme"] != "START":
        raise ValueError("trace does not start with the START evaluation")
    base_params = float(trace_rows[0]["params"])
    acc = np.array([row["accuracy"] for row in trace_rows], dtype=np.float64)
    par = np.array([row["params"] for row in trace_rows], dtype=np.float64)
    pr = np.array([row["pr"] for row in trace_rows], dtype=np.float64)
    n = len(trace_rows)
    if n <= max_checkpoints:
        checkpoints = np.arange(1, n + 1)
    else:
        checkpoints = np.unique(np.linspace(1, n, max_checkpoints).astype(int))
    curve = []
    for cp in checkpoints:
        mask = pr[:cp] >= gamma
        if not mask.any():
            curve.append((int(cp), 0.0))
            continue
        a, c = acc[:cp][mask], par[:cp][mask]
        keep = pareto_front_indices(a, c)
        curve.append((int(cp), hypervolume(a[keep], c[keep], base_params)))
    return curve


def cmd_report(
    run_dirs: Sequence[str | Path],
    out_dir: str | Path,
    oracle_dir: str | Path | None = None,
) -> dict:
    """Cross-run report: per-run metrics plus hypervolume-vs-evaluations
    curves. With an oracle directory, every hypervolume also gets a
    ratio against the oracle's."""
    if not run_dirs:
        raise ConfigurationError("report needs at least one run directory")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    oracle_hv = None
    if oracle_dir is not None:
        oracle_path = Path(oracle_dir) / "oracle_hv.json"
        if not oracle_path.is_file():
            raise ConfigurationError(
                f"{oracle_path} not found; --oracle needs a finished oracle directory"
            )
        oracle_payload = read_json(oracle_path)
        oracle_hv = float(oracle_payload["hypervolume"])
        if oracle_hv <= 0:
            raise ConfigurationError("oracle hypervolume is not positive; no ratio is defined")

    report_header = [
        "run",
        "config_hash",
        "seed",
        "gamma",
        "max_len",
        "evaluation_count",
        "front_size",
        "hypervolume",
        "best_accuracy_scheme",
        "wall_time",
    ]
    curve_header = ["run", "config_hash", "seed", "evaluation", "hypervolume"]
    if oracle_hv is not None:
        report_header.append("hv_ratio")
        curve_header.append("hv_ratio")

    report_rows = []
    curve_rows = []
    for run_dir in run_dirs:
        run_dir = Path(run_dir)
        missing = [
            name
            for name in ("summary.json", "config.json", "trace.jsonl")
            if not (run_dir / name).is_file()
        ]
        if missing:
            raise ConfigurationError(
                f"{run_dir} is missing {', '.join(missing)}; not a finished run directory"
            )
        summary = read_json(run_dir / "summary.json")
        cfg = read_json(run_dir / "config.json")
        trace = read_trace(run_dir / "trace.jsonl")
        if summary["evaluation_count"] != len(trace):
            raise ConfigurationError(
                f"{run_dir}: summary reports {summary['evaluation_count']} evaluations "
                f"but the trace holds {len(trace)}"
            )
        row = [
            run_dir.name,
            cfg["config_hash"],
            str(summary["seed"]),
            repr(float(cfg["gamma"])),
            str(cfg["max_len"]),
            str(summary["evaluation_count"]),
            str(summary["front_size"]),
            repr(float(summary["hypervolume"])),
            summary["best_accuracy_scheme"] or "",
            repr(float(summary["wall_time"])),
        ]
        if oracle_hv is not None:
            row.append(repr(float(summary["hypervolume"]) / oracle_hv))
        report_rows.append(row)
        for evaluation, hv in hv_curve(trace, float(cfg["gamma"])):
            curve_row = [
                run_dir.name,
                cfg["config_hash"],
                str(summary["seed"]),
                str(evaluation),
                repr(hv),
            ]
            if oracle_hv is not None:
                curve_row.append(repr(hv / oracle_hv))
            curve_rows.append(curve_row)

    with open(out / "report.csv", "w") as fh:
        fh.write(";".join(report_header) + "\n")
        for row in report_rows:
            fh.write(";".join(row) + "\n")
    with open(out / "curves.csv", "w") as fh:
        fh.write(";".join(curve_header) + "\n")
        for row in curve_rows:
            fh.write(";".join(row) + "\n")
    logger.info("report written for %d runs to %s", len(report_rows), out)
    return {
        "runs": len(report_rows),
        "report_csv": str(out / "report.csv"),
        "curves_csv": str(out / "curves.csv"),
        "oracle_hypervolume": oracle_hv,
    }
