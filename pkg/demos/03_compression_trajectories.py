"""Folding compression strategies through the simulated evaluator.

Each step shrinks parameters by its pruning-rate setting, damages
accuracy, and recovers part of the damage with fine-tuning whose value
fades as the model accumulates epochs. The simulator is a deterministic
hash of (seed, strategy id), so trajectories reproduce bit for bit.
"""

from compsearch import (
    EvaluatorConfig,
    Scheme,
    SimulatedEvaluator,
    TaskFeatures,
    build_catalog,
    compute_metrics,
)

task = TaskFeatures(
    category_count=10,
    image_size=32,
    channel_count=3,
    data_amount=50000,
    param_count=1.0e6,
    flops=3.0e8,
    accuracy=0.9,
)
catalog = build_catalog()
evaluator = SimulatedEvaluator(
    catalog, EvaluatorConfig(seed=42, base_state=task.base_state(), pretrain_epochs=1)
)

scheme = Scheme(
    (
        "C3|HP1=*0.3|HP2=x0.20|HP6=0.9",
        "C4|HP2=x0.40|HP9=*0.5|HP10=3",
        "C3|HP1=*0.3|HP2=x0.20|HP6=0.9",  # the same strategy can repeat
    )
)

print(f"base model: {task.param_count:.0f} params, accuracy {task.accuracy}")
print(f"scheme: {scheme}\n")

state = evaluator.base_state
for depth in range(1, scheme.length + 1):
    prefix = Scheme(scheme.steps[:depth])
    state = evaluator.evaluate(prefix)
    delta = compute_metrics(evaluator.base_state, state)
    print(
        f"after step {depth}: params {state.params:12.1f}  "
        f"acc {state.accuracy:.4f}  PR {delta.pr:6.1%}  FR {delta.fr:6.1%}  AR {delta.ar:+.2%}"
    )

gamma = 0.3
final = compute_metrics(evaluator.base_state, state)
verdict = "meets" if final.pr >= gamma else "misses"
print(f"\ntarget pruning rate {gamma:.0%}: scheme {verdict} it (PR {final.pr:.1%})")

# determinism: the same scheme under the same seed is identical
again = evaluator.evaluate(scheme)
assert (again.params, again.flops, again.accuracy) == (
    state.params,
    state.flops,
    state.accuracy,
)
print("re-evaluation is bit-identical")

# a different seed changes accuracy, never the deterministic part
other = SimulatedEvaluator(
    catalog, EvaluatorConfig(seed=7, base_state=task.base_state(), pretrain_epochs=1)
).evaluate(scheme)
print(f"seed 7 instead: params {other.params:.1f} (same), acc {other.accuracy:.4f} (differs)")
assert other.params == state.params
assert other.accuracy != state.accuracy
