"""Conformance against the engine: same metrics, same protocol edges.

These tests spawn refeval as a real subprocess and drive it with the
engine's own client, so they cover the full path the search engine
uses: handshake, request framing, error relay, timeouts, pooling, and
above all metric agreement with the in-process evaluator at the same
seed.
"""

import json
import math
import random

import pytest

from compsearch import (
    EvaluatorConfig,
    EvaluatorPool,
    EvaluatorTimeout,
    ExternalEvaluator,
    ProtocolError,
    Scheme,
    SimulatedEvaluator,
    TaskFeatures,
    build_catalog,
)
from conftest import HELLO, TASK, record_acceptance, refeval_argv

SEED = 20250817
CONFORMANCE_SCHEMES = 100

task_features = TaskFeatures.from_dict(TASK)


@pytest.fixture(scope="module")
def catalog():
    return build_catalog()


def make_external(*args, pretrain_epochs=1, timeout=60.0):
    return ExternalEvaluator(
        refeval_argv(*args), task_features, pretrain_epochs=pretrain_epochs, timeout=timeout
    )


def random_schemes(catalog, count, rng):
    ids = [s.canonical_id for s in catalog.strategies]
    schemes = []
    for _ in range(count):
        schemes.append(Scheme(tuple(rng.choice(ids) for _ in range(rng.randint(0, 5)))))
    return schemes


def rel_diff(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def test_mirror_matches_in_process_evaluator(catalog):
    rng = random.Random(SEED)
    schemes = random_schemes(catalog, CONFORMANCE_SCHEMES, rng)
    assert any(s.length == 0 for s in schemes)
    assert any(s.length == 5 for s in schemes)

    simulated = SimulatedEvaluator(
        catalog, EvaluatorConfig(seed=SEED, base_state=task_features.base_state(), pretrain_epochs=2)
    )
    external = make_external("--backend", "mirror", "--seed", str(SEED), pretrain_epochs=2)
    try:
        worst = 0.0
        exact = 0
        for scheme in schemes:
            want = simulated.evaluate(scheme)
            got = external.evaluate(scheme)
            for a, b in (
                (got.params, want.params),
                (got.flops, want.flops),
                (got.accuracy, want.accuracy),
            ):
                worst = max(worst, rel_diff(a, b))
            exact += (got.params, got.flops, got.accuracy) == (
                want.params,
                want.flops,
                want.accuracy,
            )
    finally:
        external.close()

    assert record_acceptance(
        "mirror-conformance",
        worst <= 1e-9,
        f"{CONFORMANCE_SCHEMES} schemes, worst rel diff {worst:.3e} (<=1e-9), "
        f"{exact} bit-exact",
    )
    assert worst <= 1e-9


def test_handshake_announces_reference_mirror():
    external = make_external("--backend", "mirror")
    try:
        assert external.name == "reference-mirror"
    finally:
        external.close()


def test_empty_scheme_echoes_base_metrics():
    external = make_external("--backend", "mirror", "--seed", "4")
    try:
        state = external.evaluate(Scheme(()))
        assert (state.params, state.flops, state.accuracy) == (1.0e6, 3.0e8, 0.9)
    finally:
        external.close()


def test_unknown_strategy_id_is_relayed_as_error():
    external = make_external("--backend", "mirror")
    try:
        with pytest.raises(ProtocolError, match="unknown strategy id"):
            external.evaluate(Scheme(("C3|HP1=*0.3",)))
    finally:
        external.close()


def test_slow_evaluator_trips_the_engine_timeout():
    external = make_external("--backend", "mirror", "--respond-delay", "2", timeout=0.4)
    try:
        with pytest.raises(EvaluatorTimeout, match="no response within"):
            external.evaluate(Scheme(()))
    finally:
        external.close()


def test_stub_backend_round_trip():
    external = make_external("--backend", "stub")
    try:
        assert external.name == "reference-stub"
        state = external.evaluate(Scheme(()))
        assert state.params == 1.0e6
        with pytest.raises(ProtocolError, match="reported an error"):
            external.evaluate(Scheme(("C3|HP1=*0.3|HP2=x0.20|HP6=0.9",)))
    finally:
        external.close()


def test_pool_of_mirrors_agrees_with_single(catalog):
    rng = random.Random(SEED + 1)
    schemes = random_schemes(catalog, 12, rng)
    simulated = SimulatedEvaluator(
        catalog, EvaluatorConfig(seed=11, base_state=task_features.base_state())
    )
    pool = EvaluatorPool(
        [make_external("--backend", "mirror", "--seed", "11") for _ in range(2)]
    )
    try:
        got = pool.evaluate_many(schemes)
    finally:
        pool.close()
    want = simulated.evaluate_many(schemes)
    assert [
        (g.params, g.flops, g.accuracy) for g in got
    ] == [(w.params, w.flops, w.accuracy) for w in want]


def test_stderr_logging_never_touches_stdout(session):
    proc = session("--backend", "mirror", "--seed", "1", "-vv")
    req = json.dumps({"id": 0, "scheme": [], "task": TASK, "pretrain_epochs": 1})
    out, err = proc.communicate(HELLO + "\n" + req + "\n" + "junk\n", timeout=30)
    assert proc.returncode == 0
    for line in out.splitlines():
        assert isinstance(json.loads(line), dict)
    assert "ready as reference-mirror" in err
    assert "session over" in err


def test_wrong_greeting_exits_nonzero(session):
    proc = session("--backend", "mirror")
    out, err = proc.communicate('{"hello": "other/2"}\n', timeout=30)
    assert proc.returncode == 2
    assert out == ""
    assert "unsupported protocol greeting" in err


def test_whole_search_trace_identical_to_simulated(catalog):
    # the strongest wire check: a full search run must not be able to
    # tell the mirror subprocess from the in-process evaluator
    from compsearch import SearchSettings, build_kg, learn_embeddings, run_search

    tiny = build_catalog({"methods": ["C3", "C4"]})
    table = learn_embeddings(tiny, build_kg(tiny), [], dim=16, train_epochs=2, seed=3)
    settings = SearchSettings(gamma=0.3, max_len=2, eval_budget=60, seed=3)
    simulated = SimulatedEvaluator(
        tiny, EvaluatorConfig(seed=555, base_state=task_features.base_state())
    )
    external = make_external("--backend", "mirror", "--seed", "555")
    try:
        a = run_search(tiny, table, simulated, settings)
        b = run_search(tiny, table, external, settings)
    finally:
        external.close()
    assert a.trace == b.trace
    assert [(p.scheme, p.accuracy, p.params) for p in a.front] == [
        (p.scheme, p.accuracy, p.params) for p in b.front
    ]


def test_float_fidelity_through_decimal_text(catalog):
    # repr round-trips float64 exactly, so wire transit loses nothing
    scheme = Scheme(("C5|HP1=*0.2|HP2=x0.36|HP11=P2|HP12=k34|HP13=*0.4|HP14=3",))
    simulated = SimulatedEvaluator(
        catalog, EvaluatorConfig(seed=123456789, base_state=task_features.base_state())
    )
    external = make_external("--backend", "mirror", "--seed", "123456789")
    try:
        got = external.evaluate(scheme)
    finally:
        external.close()
    want = simulated.evaluate(scheme)
    assert math.isclose(got.accuracy, want.accuracy, rel_tol=0.0, abs_tol=0.0)
    assert got.params == want.params and got.flops == want.flops
