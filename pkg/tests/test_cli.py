"""End-to-end tests for the command line and the run artifacts."""

import json

import pytest

from compsearch import (
    Scheme,
    build_catalog,
    build_kg,
    cmd_oracle,
    cmd_report,
    cmd_search,
    load_config,
)
from compsearch.catalog import ConfigurationError
from compsearch.cli import build_parser, main
from compsearch.reporting import (
    PARETO_HEADER,
    hv_curve,
    parse_scheme_text,
    read_json,
    read_pareto_csv,
    read_trace,
    write_pareto_csv,
    write_trace,
)

MICRO_FILTER = {
    "methods": ["C3", "C4"],
    "hp_values": {
        "HP1": ["*0.1"],
        "HP2": ["x0.04", "x0.20", "x0.40"],
        "HP6": ["0.7"],
        "HP9": ["*0.1"],
        "HP10": ["1"],
    },
}


@pytest.fixture()
def micro_filter(tmp_path):
    path = tmp_path / "filter.json"
    path.write_text(json.dumps(MICRO_FILTER))
    return str(path)


def quick_overrides(micro_filter, out_dir, **extra):
    values = {
        "catalog_filter": micro_filter,
        "out_dir": str(out_dir),
        "gamma": 0.1,
        "max_len": 2,
        "train_epochs": 2,
        "search_epochs": 12,
        "sample_size": 4,
        "pareto_cap": 6,
        "embedding_dim": 8,
        "seed": 5,
    }
    values.update(extra)
    return values


def run_quick_search(micro_filter, out_dir, **extra):
    config = load_config(None, quick_overrides(micro_filter, out_dir, **extra))
    return cmd_search(config)


# ----------------------------------------------------------------- search


def test_search_writes_artifacts(micro_filter, tmp_path):
    out = tmp_path / "run"
    summary = run_quick_search(micro_filter, out)
    for name in ("config.json", "trace.jsonl", "pareto.csv", "summary.json"):
        assert (out / name).exists(), name
    assert read_json(out / "summary.json") == summary
    trace = read_trace(out / "trace.jsonl")
    assert summary["evaluation_count"] == len(trace)
    assert trace[0]["scheme"] == "START"
    front = read_pareto_csv(out / "pareto.csv")
    assert summary["front_size"] == len(front)
    assert summary["kg_training"] is True
    assert summary["exp_training"] is True
    best = max(front, key=lambda p: p.accuracy)
    assert summary["best_accuracy_scheme"] == str(best.scheme)
    cfg_payload = read_json(out / "config.json")
    assert cfg_payload["config_hash"] == summary["config_hash"]
    assert cfg_payload["seed"] == 5


def test_search_rerun_is_byte_identical(micro_filter, tmp_path):
    first = run_quick_search(micro_filter, tmp_path / "a")
    second = run_quick_search(micro_filter, tmp_path / "b")
    assert (tmp_path / "a" / "trace.jsonl").read_bytes() == (
        tmp_path / "b" / "trace.jsonl"
    ).read_bytes()
    assert (tmp_path / "a" / "pareto.csv").read_bytes() == (
        tmp_path / "b" / "pareto.csv"
    ).read_bytes()
    first.pop("wall_time")
    second.pop("wall_time")
    assert first == second


def test_search_ablation_flags_reach_summary(micro_filter, tmp_path):
    summary = run_quick_search(
        micro_filter, tmp_path / "run", no_kg=True, no_exp=True, seed=9
    )
    assert summary["kg_training"] is False
    assert summary["exp_training"] is False


def test_search_rejects_zero_max_len(micro_filter, tmp_path):
    config = load_config(None, quick_overrides(micro_filter, tmp_path / "r", max_len=0))
    with pytest.raises(ConfigurationError, match="max_len"):
        cmd_search(config)


# ----------------------------------------------------------------- oracle


def test_oracle_covers_micro_space(micro_filter, tmp_path):
    out = tmp_path / "oracle"
    config = load_config(None, quick_overrides(micro_filter, out))
    payload = cmd_oracle(config)
    # 6 strategies, depth 2: 1 + 6 + 36
    assert payload["scheme_count"] == 43
    assert payload["hypervolume"] > 0
    front = read_pareto_csv(out / "oracle_front.csv")
    assert len(front) == payload["front_size"]
    assert read_json(out / "oracle_hv.json") == payload


def test_oracle_refuses_large_space(micro_filter, tmp_path):
    config = load_config(
        None, quick_overrides(micro_filter, tmp_path / "o", oracle_limit=10)
    )
    with pytest.raises(ConfigurationError, match=r"43 schemes.*refusing"):
        cmd_oracle(config)


def test_oracle_depth_zero_is_start_only(micro_filter, tmp_path):
    out = tmp_path / "o0"
    config = load_config(
        None, quick_overrides(micro_filter, out, max_len=0, gamma=0.0)
    )
    payload = cmd_oracle(config)
    assert payload["scheme_count"] == 1
    assert payload["front_size"] == 1
    assert payload["hypervolume"] == 0.0
    (point,) = read_pareto_csv(out / "oracle_front.csv")
    assert point.scheme == Scheme()


# ----------------------------------------------------------------- report


def test_report_two_seeds_with_oracle(micro_filter, tmp_path):
    run_quick_search(micro_filter, tmp_path / "s1", seed=1)
    run_quick_search(micro_filter, tmp_path / "s2", seed=2)
    oracle_cfg = load_config(None, quick_overrides(micro_filter, tmp_path / "oracle"))
    cmd_oracle(oracle_cfg)

    result = cmd_report(
        [tmp_path / "s1", tmp_path / "s2"], tmp_path / "rep", oracle_dir=tmp_path / "oracle"
    )
    assert result["runs"] == 2
    assert result["oracle_hypervolume"] > 0

    lines = (tmp_path / "rep" / "report.csv").read_text().splitlines()
    header = lines[0].split(";")
    assert header[-1] == "hv_ratio"
    rows = [dict(zip(header, line.split(";"))) for line in lines[1:]]
    assert len(rows) == 2
    # same setup, different seeds: one hash, two seeds
    assert rows[0]["config_hash"] == rows[1]["config_hash"]
    assert {r["seed"] for r in rows} == {"1", "2"}
    for r in rows:
        assert 0.0 <= float(r["hv_ratio"]) <= 1.0

    curve_lines = (tmp_path / "rep" / "curves.csv").read_text().splitlines()
    curve_header = curve_lines[0].split(";")
    final = dict(zip(curve_header, curve_lines[-1].split(";")))
    # the curve's last checkpoint agrees with the run summary
    match = [r for r in rows if r["seed"] == final["seed"]][0]
    assert final["evaluation"] == match["evaluation_count"]
    assert float(final["hypervolume"]) == pytest.approx(float(match["hypervolume"]))


def test_report_without_oracle_has_no_ratio(micro_filter, tmp_path):
    run_quick_search(micro_filter, tmp_path / "s1")
    cmd_report([tmp_path / "s1"], tmp_path / "rep")
    header = (tmp_path / "rep" / "report.csv").read_text().splitlines()[0]
    assert "hv_ratio" not in header


def test_report_rejects_trace_summary_mismatch(micro_filter, tmp_path):
    run_quick_search(micro_filter, tmp_path / "s1")
    summary_path = tmp_path / "s1" / "summary.json"
    summary = read_json(summary_path)
    summary["evaluation_count"] += 1
    summary_path.write_text(json.dumps(summary))
    with pytest.raises(ConfigurationError, match="but the trace holds"):
        cmd_report([tmp_path / "s1"], tmp_path / "rep")


def test_report_needs_runs():
    with pytest.raises(ConfigurationError, match="at least one run"):
        cmd_report([], "out")


# --------------------------------------------------------------- hv curve


def test_hv_curve_hand_values():
    trace = [
        {"scheme": "START", "accuracy": 0.5, "params": 100.0, "pr": 0.0},
        {"scheme": "a", "accuracy": 0.4, "params": 50.0, "pr": 0.25},
        {"scheme": "a->b", "accuracy": 0.3, "params": 25.0, "pr": 0.5},
    ]
    curve = hv_curve(trace, gamma=0.2)
    assert curve[0] == (1, 0.0)  # START is infeasible at gamma 0.2
    assert curve[1] == (2, pytest.approx(0.4 * 0.5))
    assert curve[2] == (3, pytest.approx(0.4 * 0.5 + 0.3 * 0.25))


def test_hv_curve_requires_start():
    with pytest.raises(ValueError, match="START"):
        hv_curve([{"scheme": "a", "accuracy": 0.4, "params": 50.0, "pr": 0.25}], 0.0)
    assert hv_curve([], 0.0) == []


def test_hv_curve_checkpoint_cap():
    trace = [{"scheme": "START", "accuracy": 0.5, "params": 100.0, "pr": 0.0}]
    for i in range(49):
        trace.append(
            {"scheme": f"s{i}", "accuracy": 0.4, "params": 50.0 - i, "pr": 0.5}
        )
    curve = hv_curve(trace, gamma=0.0, max_checkpoints=10)
    assert len(curve) <= 10
    assert curve[-1][0] == 50
    evals = [cp for cp, _ in curve]
    assert evals == sorted(set(evals))


# ------------------------------------------------------------- round trips


def test_trace_round_trip(tmp_path):
    rows = [{"scheme": "START", "accuracy": 0.9, "params": 1e6}, {"scheme": "x", "k": 1}]
    path = tmp_path / "t.jsonl"
    assert write_trace(path, rows) == 2
    assert read_trace(path) == rows


def test_pareto_round_trip(tmp_path, full_catalog, make_evaluator):
    from compsearch import exhaustive_evaluate, front_points

    catalog = build_catalog(MICRO_FILTER)
    evaluator = make_evaluator(catalog)
    entries = exhaustive_evaluate(catalog, evaluator, 2)
    points = front_points(entries, evaluator.base_state, 0.1)
    path = tmp_path / "front.csv"
    write_pareto_csv(path, points)
    assert read_pareto_csv(path) == points  # repr round-trips floats exactly


def test_pareto_csv_rejects_other_headers(tmp_path):
    path = tmp_path / "front.csv"
    path.write_text("scheme,accuracy\n")
    with pytest.raises(ValueError, match="header"):
        read_pareto_csv(path)
    assert PARETO_HEADER.count(";") == 6


def test_parse_scheme_text():
    assert parse_scheme_text("START") == Scheme()
    assert parse_scheme_text("a->b") == Scheme(("a", "b"))
    assert str(parse_scheme_text("a->b")) == "a->b"


# ------------------------------------------------------------ CLI surface


def test_cli_search_and_report(micro_filter, tmp_path, capsys):
    argv = ["search", "--catalog-filter", micro_filter, "--out-dir", str(tmp_path / "r1"),
            "--gamma", "0.1", "--max-len", "2", "--train-epochs", "2",
            "--search-epochs", "12", "--sample-size", "4", "--pareto-cap", "6",
            "--embedding-dim", "8", "--seed", "5"]
    assert main(argv) == 0
    assert (tmp_path / "r1" / "summary.json").exists()
    assert main(["report", str(tmp_path / "r1"), "--out", str(tmp_path / "rep")]) == 0
    assert (tmp_path / "rep" / "curves.csv").exists()


def test_cli_config_file_plus_flag_override(micro_filter, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        "\n".join(
            [
                f'catalog_filter = "{micro_filter}"',
                "gamma = 0.1",
                "max_len = 2",
                "train_epochs = 2",
                "search_epochs = 12",
                "sample_size = 4",
                "pareto_cap = 6",
                "embedding_dim = 8",
            ]
        )
        + "\n"
    )
    out = tmp_path / "r"
    assert main(["search", "--config", str(cfg), "--out-dir", str(out), "--seed", "21"]) == 0
    assert read_json(out / "summary.json")["seed"] == 21


def test_cli_rejects_bad_gamma(capsys):
    assert main(["search", "--gamma", "1.5"]) == 2
    assert "gamma" in capsys.readouterr().err


def test_cli_oracle_refusal_exit_code(micro_filter, tmp_path, capsys):
    argv = ["oracle", "--catalog-filter", micro_filter, "--max-len", "2",
            "--oracle-limit", "10", "--out-dir", str(tmp_path / "o")]
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert "43 schemes" in err and "refusing" in err


def test_cli_catalog_dump(micro_filter, tmp_path):
    out = tmp_path / "catalog.jsonl"
    assert main(["catalog", "dump", "--catalog-filter", micro_filter, "-o", str(out)]) == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(rows) == 6
    assert {r["method"] for r in rows} == {"C3", "C4"}
    catalog = build_catalog(MICRO_FILTER)
    assert [r["id"] for r in rows] == [s.canonical_id for s in catalog.strategies]


def test_cli_kg_export(micro_filter, tmp_path):
    out = tmp_path / "kg.tsv"
    assert main(["kg", "export", "--catalog-filter", micro_filter, "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    kg = build_kg(build_catalog(MICRO_FILTER))
    assert len(lines) == len(kg.triples) == 40
    assert all(len(line.split("\t")) == 3 for line in lines)


def test_cli_full_catalog_dump_stdout(capsys):
    assert main(["catalog", "dump"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4525


def test_verbose_flag_accepted_after_subcommand(micro_filter, tmp_path, capsys):
    out = tmp_path / "catalog.jsonl"
    assert main(["catalog", "dump", "--catalog-filter", micro_filter, "-o", str(out), "-v"]) == 0
    assert out.exists()


@pytest.mark.parametrize(
    "argv, count",
    [
        (["-v", "search"], 1),
        (["search", "-vv"], 2),
        (["-v", "search", "-v"], 2),
        (["report", "r", "--out", "o", "-v"], 1),
    ],
)
def test_verbose_counts_accumulate_across_positions(argv, count):
    ns = build_parser().parse_args(argv)
    assert ns.verbose + getattr(ns, "verbose_sub", 0) == count


def test_report_missing_run_dir_is_a_clean_error(tmp_path, capsys):
    assert main(["report", str(tmp_path / "no_such_run"), "--out", str(tmp_path / "rep")]) == 2
    err = capsys.readouterr().err
    assert "no_such_run" in err and "summary.json" in err
    assert "Traceback" not in err


def test_report_missing_oracle_payload_is_a_clean_error(micro_filter, tmp_path, capsys):
    summary = run_quick_search(micro_filter, tmp_path / "r")
    assert summary["front_size"] >= 1
    argv = ["report", str(tmp_path / "r"), "--out", str(tmp_path / "rep"),
            "--oracle", str(tmp_path / "empty")]
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert "oracle_hv.json" in err
    assert "Traceback" not in err
