"""Metric algebra and the simulated evaluator.

The golden trajectory below was frozen from an independent scratch
implementation of the documented contract (own FNV-1a / splitmix64 /
formula code); the library must reproduce it bit for bit.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compsearch import (
    START,
    EvaluatorConfig,
    ModelState,
    Scheme,
    SimulatedEvaluator,
    TaskFeatures,
    compute_metrics,
    evaluate_scheme,
)

CID = "C3|HP1=*0.3|HP2=x0.20|HP6=0.9"

# (params, flops, accuracy, consumed_finetune) after each repeat of CID,
# seed 42, base (1e6, 3e8, 0.9), pretrain_epochs 1
GOLDEN_TRAJECTORY = [
    (800000.0, 240000000.0, 0.8759666361499046, 0.3),
    (640000.0, 192000000.0, 0.8501492991803311, 0.6),
    (512000.0, 153600000.0, 0.8236214635183479, 0.8999999999999999),
]

# C4 then C3, seed 7, pretrain_epochs 4 (exercises the HP9 route and
# the pretrain multiplier)
GOLDEN_MIXED = [
    ("C4|HP2=x0.40|HP9=*0.5|HP10=3", 600000.0, 191534085.95087722, 0.8970909777883169, 2.0),
    (CID, 480000.0, 153227268.76070178, 0.889519026719336, 3.2),
]


def test_metric_algebra_parameter_reduction():
    # 0.90M -> 0.54M parameters is a 40% reduction
    before = ModelState(params=0.90e6, flops=1.0e8, accuracy=0.9381)
    after = ModelState(params=0.54e6, flops=0.6e8, accuracy=0.9070)
    delta = compute_metrics(before, after)
    assert delta.pr == pytest.approx(0.400, abs=0.005)


def test_metric_algebra_accuracy_change():
    before = ModelState(params=1e6, flops=1e8, accuracy=0.9104)
    after = ModelState(params=1e6, flops=1e8, accuracy=0.9069)
    delta = compute_metrics(before, after)
    assert delta.ar == pytest.approx(-0.0038, abs=0.0005)
    assert delta.pr == 0.0
    assert delta.fr == 0.0


def test_golden_trajectory_is_bit_exact(full_catalog, make_evaluator):
    ev = make_evaluator(full_catalog, seed=42)
    state = ev.base_state
    for expected in GOLDEN_TRAJECTORY:
        state = ev.step(state, CID)
        assert (state.params, state.flops, state.accuracy, state.consumed_finetune) == expected


def test_golden_mixed_trajectory(full_catalog, make_evaluator):
    ev = make_evaluator(full_catalog, seed=7, pretrain_epochs=4)
    state = ev.base_state
    for cid, params, flops, acc, consumed in GOLDEN_MIXED:
        state = ev.step(state, cid)
        assert (state.params, state.flops, state.accuracy, state.consumed_finetune) == (
            params,
            flops,
            acc,
            consumed,
        )


def test_evaluate_folds_steps(full_catalog, make_evaluator):
    ev = make_evaluator(full_catalog, seed=42)
    scheme = Scheme((CID, CID, CID))
    state = ev.evaluate(scheme)
    assert (state.params, state.flops, state.accuracy, state.consumed_finetune) == GOLDEN_TRAJECTORY[2]


def test_empty_scheme_is_identity(full_catalog, make_evaluator):
    ev = make_evaluator(full_catalog)
    assert ev.evaluate(START) == ev.base_state
    state, delta = evaluate_scheme(START, ev)
    assert delta.pr == delta.fr == delta.ar == 0.0


def test_params_compose_multiplicatively(full_catalog, make_evaluator):
    ev = make_evaluator(full_catalog)
    state = ev.evaluate(Scheme((CID, CID)))  # two gamma=0.2 steps
    delta = compute_metrics(ev.base_state, state)
    assert delta.pr == pytest.approx(1 - 0.8 * 0.8, abs=1e-12)


def test_draws_are_position_independent(full_catalog, make_evaluator):
    # the same strategy keeps its random draws wherever it sits, so
    # params and flops factors repeat exactly
    ev = make_evaluator(full_catalog, seed=9)
    other = "C4|HP2=x0.12|HP9=*0.2|HP10=5"
    first = ev.step(ev.base_state, CID)
    after_other = ev.step(ev.base_state, other)
    second = ev.step(after_other, CID)
    assert second.flops / after_other.flops == pytest.approx(first.flops / ev.base_state.flops, rel=1e-12)


def test_seed_changes_trajectory(full_catalog, make_evaluator):
    a = make_evaluator(full_catalog, seed=1).evaluate(Scheme((CID,)))
    b = make_evaluator(full_catalog, seed=2).evaluate(Scheme((CID,)))
    assert a.params == b.params  # params depend only on gamma
    assert a.accuracy != b.accuracy


def test_pretrain_epochs_scale_recovery(full_catalog, task):
    base = task.base_state()
    lean = SimulatedEvaluator(full_catalog, EvaluatorConfig(42, base, pretrain_epochs=1))
    rich = SimulatedEvaluator(full_catalog, EvaluatorConfig(42, base, pretrain_epochs=10))
    assert rich.evaluate(Scheme((CID,))).accuracy >= lean.evaluate(Scheme((CID,))).accuracy


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32),
    picks=st.lists(st.integers(min_value=0, max_value=4524), min_size=1, max_size=6),
)
def test_states_stay_valid_under_random_schemes(full_catalog, seed, picks):
    from conftest import DEFAULT_TASK

    ev = SimulatedEvaluator(full_catalog, EvaluatorConfig(seed, DEFAULT_TASK.base_state()))
    state = DEFAULT_TASK.base_state()
    for i in picks:
        nxt = ev.step(state, full_catalog.strategies[i].canonical_id)
        assert 0.0 <= nxt.accuracy <= 1.0
        assert 0.0 < nxt.params < state.params  # gamma > 0 always shrinks
        assert 0.0 < nxt.flops <= state.flops
        assert nxt.consumed_finetune >= state.consumed_finetune
        state = nxt


def test_model_state_validation():
    with pytest.raises(ValueError):
        ModelState(params=0.0, flops=1.0, accuracy=0.5)
    with pytest.raises(ValueError):
        ModelState(params=1.0, flops=-1.0, accuracy=0.5)
    with pytest.raises(ValueError):
        ModelState(params=1.0, flops=1.0, accuracy=1.5)
    with pytest.raises(ValueError):
        ModelState(params=1.0, flops=1.0, accuracy=0.5, consumed_finetune=-0.1)


def test_task_features_round_trip(task):
    again = TaskFeatures.from_dict(task.to_dict())
    assert again == task
    base = task.base_state()
    assert (base.params, base.flops, base.accuracy) == (1.0e6, 3.0e8, 0.9)


def test_ar_stays_above_minus_one(full_catalog, make_evaluator):
    # accuracy is clamped at zero, never negative, so ar > -1 by algebra
    ev = make_evaluator(full_catalog, seed=0)
    state = ev.base_state
    for _ in range(50):
        state = ev.step(state, CID)
    delta = compute_metrics(ev.base_state, state)
    assert delta.ar > -1.0
