"""Two-objective Pareto machinery: maximize accuracy, minimize cost.

"Cost" here is the parameter count (or its predicted stand-in). Fronts
keep ties: two identical points do not dominate each other, so both
survive extraction. All functions are pure and operate on parallel
arrays, returning original indices in ascending order.
"""

from __future__ import annotations

import numpy as np


def dominates(acc_a: float, cost_a: float, acc_b: float, cost_b: float) -> bool:
    """True when A is at least as good on both axes and better on one."""
    return acc_a >= acc_b and cost_a <= cost_b and (acc_a > acc_b or cost_a < cost_b)


def pareto_front_indices(acc: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """Indices of the non-dominated points, by one sorted sweep.

    Sorted by accuracy descending (cost ascending within ties), a point
    survives iff its cost is the minimum of its accuracy group and that
    minimum strictly undercuts every strictly-higher-accuracy group.
    """
    acc = np.asarray(acc, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    n = len(acc)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    order = np.lexsort((cost, -acc))
    a = acc[order]
    c = cost[order]
    new_group = np.empty(n, dtype=bool)
    new_group[0] = True
    new_group[1:] = a[1:] != a[:-1]
    group_id = np.cumsum(new_group) - 1
    group_min = c[new_group]  # first element of each group has its min cost
    prev_best = np.concatenate(([np.inf], np.minimum.accumulate(group_min)[:-1]))
    kept_group = group_min < prev_best
    keep = kept_group[group_id] & (c == group_min[group_id])
    return np.sort(order[keep])


def crowding_distance(acc: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """Per-point crowding distance over the two objectives.

    Boundary points of each objective get infinity; interior points sum
    the normalized gaps between their neighbors. Degenerate (constant)
    objectives contribute nothing.
    """
    acc = np.asarray(acc, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    n = len(acc)
    distance = np.zeros(n)
    if n <= 2:
        distance[:] = np.inf
        return distance
    for obj in (acc, cost):
        order = np.argsort(obj, kind="stable")
        distance[order[0]] = np.inf
        distance[order[-1]] = np.inf
        span = obj[order[-1]] - obj[order[0]]
        if span == 0.0:
            continue
        inner = order[1:-1]
        distance[inner] += (obj[order[2:]] - obj[order[:-2]]) / span
    return distance


def select_by_crowding(acc: np.ndarray, cost: np.ndarray, cap: int) -> np.ndarray:
    """At most ``cap`` indices, keeping the most spread-out points.

    Boundary points carry infinite distance so they are always kept;
    ties break toward lower index for determinism.
    """
    n = len(acc)
    if n <= cap:
        return np.arange(n, dtype=np.int64)
    distance = crowding_distance(np.asarray(acc), np.asarray(cost))
    order = np.lexsort((np.arange(n), -distance))
    return np.sort(order[:cap])


def hypervolume(acc: np.ndarray, params: np.ndarray, base_params: float) -> float:
    """Area dominated by the front, normalized to the unit square.

    Objectives are mapped to x = accuracy and y = 1 - params/P(M), both
    measured from the reference point (accuracy 0, params P(M)); every
    point must weakly dominate the reference. A single point at
    (accuracy 1, params 0) scores 1.0; an empty front scores 0.0.
    Dominated or duplicate points are harmless.
    """
    acc = np.asarray(acc, dtype=np.float64)
    params = np.asarray(params, dtype=np.float64)
    if len(acc) == 0:
        return 0.0
    if base_params <= 0:
        raise ValueError("base_params must be positive")
    y = 1.0 - params / base_params
    if (acc < 0.0).any() or (y < -1e-12).any():
        raise ValueError("hypervolume points must dominate the reference point")
    y = np.clip(y, 0.0, None)
    order = np.argsort(-acc, kind="stable")
    ys = y[order]
    prev = np.concatenate(([0.0], np.maximum.accumulate(ys)[:-1]))
    gain = np.clip(ys - prev, 0.0, None)
    return float(np.sum(acc[order] * gain))
