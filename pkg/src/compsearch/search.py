"""Progressive multi-objective scheme search.

The search grows schemes one strategy at a time. Every evaluated scheme
keeps an OPT set of strategies it has not yet been extended with; each
round samples a few evaluated schemes (current Pareto-front members
first), predicts the step outcome of every remaining extension with a
small network, evaluates only the predicted-Pareto-optimal extensions,
and trains the predictor on what actually happened. The returned front
contains the non-dominated evaluated schemes whose parameter reduction
meets the target rate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .catalog import Catalog, Scheme, START
from .embeddings import EmbeddingTable
from .evaluation import Evaluator, MetricsDelta, ModelState, compute_metrics
from .nets import Adam, TwoHeadNet, mse_grad, mse_loss
from .pareto import hypervolume, pareto_front_indices, select_by_crowding
from .rng import substream

logger = logging.getLogger(__name__)


def state_features(state: ModelState, base: ModelState, depth: int, max_len: int) -> np.ndarray:
    """4 features: params and flops relative to the base, accuracy, depth."""
    return np.array(
        [
            state.params / base.params,
            state.flops / base.flops,
            state.accuracy,
            depth / max(1, max_len),
        ]
    )


class PredictorFmo:
    """Step-outcome predictor: (scheme prefix, candidate, state) -> (ar, pr).

    The prefix is summarized as a decay-weighted average of its strategy
    embeddings (most recent step weighted 1, older steps decaying by
    ``decay`` per step; the empty prefix gives a zero vector). The
    candidate embedding and four state features are concatenated on.
    """

    def __init__(self, dim: int, decay: float, rng: np.random.Generator) -> None:
        self.dim = dim
        self.decay = decay
        self.net = TwoHeadNet(2 * dim + 4, rng)

    def aggregate_prefix(self, step_vectors: Sequence[np.ndarray]) -> np.ndarray:
        if len(step_vectors) == 0:
            return np.zeros(self.dim)
        weights = self.decay ** np.arange(len(step_vectors) - 1, -1, -1, dtype=np.float64)
        stacked = np.stack(step_vectors)
        return weights @ stacked / weights.sum()

    def features(
        self, prefix_vec: np.ndarray, candidate_vec: np.ndarray, state_vec: np.ndarray
    ) -> np.ndarray:
        return np.concatenate([prefix_vec, candidate_vec, state_vec])

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Rows of features -> rows of (predicted ar_step, predicted pr_step)."""
        return self.net.forward(np.atleast_2d(x))[0]


def predicted_objectives(
    prefix_accuracy: float, prefix_params: float, ar_step: float, pr_step: float
) -> tuple[float, float]:
    """Objectives a candidate extension is predicted to reach."""
    return prefix_accuracy * (1.0 + ar_step), prefix_params * (1.0 - pr_step)


def fmo_train(
    fmo: PredictorFmo,
    optimizer: Adam,
    new_x: np.ndarray,
    new_y: np.ndarray,
    replay_x: np.ndarray | None,
    replay_y: np.ndarray | None,
    rng: np.random.Generator,
) -> float:
    """One training step on the new outcomes plus an equal-size replay
    sample (uniform, with replacement). Returns the post-step loss on
    that combined batch. Pass ``replay_x=None`` for pure step-loss
    training on the new outcomes alone."""
    if replay_x is not None and len(replay_x) > 0:
        idx = rng.integers(len(replay_x), size=len(new_x))
        x = np.vstack([new_x, replay_x[idx]])
        y = np.vstack([new_y, replay_y[idx]])
    else:
        x = new_x
        y = new_y
    pred, cache = fmo.net.forward(x)
    grads, _ = fmo.net.backward(cache, mse_grad(pred, y))
    optimizer.step(fmo.net.params, grads)
    return mse_loss(fmo.net.forward(x)[0], y)


@dataclass
class SearchSettings:
    gamma: float = 0.3
    max_len: int = 5
    rounds: int = 200
    sample_size: int = 8  # schemes sampled per round
    cap: int = 16  # predicted-front evaluation cap per round
    decay: float = 0.7
    lr: float = 0.001
    fmo_steps_per_round: int = 8
    eval_budget: int | None = None
    no_progressive_replay: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if self.max_len < 0:
            raise ValueError("max_len must be non-negative")
        if self.rounds < 0:
            raise ValueError("rounds must be non-negative")
        if self.sample_size < 1 or self.cap < 1:
            raise ValueError("sample_size and cap must be positive")
        if not 0.0 < self.decay <= 1.0:
            raise ValueError("decay must be in (0, 1]")


@dataclass
class HistoryEntry:
    scheme: Scheme
    state: ModelState
    metrics: MetricsDelta
    round: int
    seq: int  # insertion order
    prefix_num: np.ndarray  # decay-weighted embedding sum of the steps
    prefix_den: float
    options: set[int]  # catalog indices not yet expanded from here
    predicted_ar_step: float | None = None
    predicted_pr_step: float | None = None

    def prefix_vector(self, dim: int) -> np.ndarray:
        if self.prefix_den == 0.0:
            return np.zeros(dim)
        return self.prefix_num / self.prefix_den


@dataclass(frozen=True)
class ParetoPoint:
    scheme: Scheme
    accuracy: float
    params: float
    flops: float
    pr: float
    fr: float
    ar: float


@dataclass
class SearchResult:
    front: list[ParetoPoint]
    history: list[HistoryEntry]
    trace: list[dict]
    evaluation_count: int
    rounds_run: int
    budget_exhausted: bool
    space_exhausted: bool
    hypervolume: float


def _trace_row(entry: HistoryEntry) -> dict:
    return {
        "round": entry.round,
        "scheme": str(entry.scheme),
        "accuracy": entry.state.accuracy,
        "params": entry.state.params,
        "flops": entry.state.flops,
        "pr": entry.metrics.pr,
        "fr": entry.metrics.fr,
        "ar": entry.metrics.ar,
        "predicted_ar_step": entry.predicted_ar_step,
        "predicted_pr_step": entry.predicted_pr_step,
    }


def front_points(
    entries: Sequence[tuple[Scheme, ModelState]], base: ModelState, gamma: float
) -> list[ParetoPoint]:
    """Constrained Pareto front: pr >= gamma, accuracy up, params down.

    Points are returned sorted by accuracy descending (params, then
    scheme text, as tie-breakers) for a deterministic artifact order.
    """
    feasible = []
    for scheme, state in entries:
        delta = compute_metrics(base, state)
        if delta.pr >= gamma:
            feasible.append(
                ParetoPoint(
                    scheme,
                    state.accuracy,
                    state.params,
                    state.flops,
                    delta.pr,
                    delta.fr,
                    delta.ar,
                )
            )
    if not feasible:
        return []
    acc = np.array([p.accuracy for p in feasible])
    cost = np.array([p.params for p in feasible])
    keep = pareto_front_indices(acc, cost)
    points = [feasible[i] for i in keep]
    points.sort(key=lambda p: (-p.accuracy, p.params, str(p.scheme)))
    return points


def run_search(
    catalog: Catalog,
    embeddings: EmbeddingTable,
    evaluator: Evaluator,
    settings: SearchSettings,
) -> SearchResult:
    """Run the progressive search; deterministic for a fixed seed.

    Every scheme is evaluated exactly once (the evaluation budget counts
    the base model's). OPT bookkeeping: expanding scheme seq by strategy
    s removes s from OPT(seq) and gives the child the full catalog as
    its OPT (empty at maximum length).
    """
    n_strat = len(catalog)
    if embeddings.ids != [s.canonical_id for s in catalog.strategies]:
        raise ValueError("embedding table does not match the catalog")
    if n_strat == 0:
        raise ValueError("catalog is empty")
    emb = embeddings.matrix
    dim = embeddings.dim
    base = evaluator.base_state
    rng = substream(settings.seed, "search")
    fmo = PredictorFmo(dim, settings.decay, substream(settings.seed, "fmo"))
    optimizer = Adam(lr=settings.lr)

    history: dict[Scheme, HistoryEntry] = {}
    order: list[HistoryEntry] = []
    # eligible = schemes with a non-empty OPT set; list + position map
    # for O(1) removal and uniform indexing
    eligible: list[HistoryEntry] = []
    eligible_pos: dict[Scheme, int] = {}
    replay_x: list[np.ndarray] = []
    replay_y: list[np.ndarray] = []
    budget = settings.eval_budget if settings.eval_budget is not None else float("inf")
    budget_exhausted = False

    def eligible_add(entry: HistoryEntry) -> None:
        if entry.options:
            eligible_pos[entry.scheme] = len(eligible)
            eligible.append(entry)

    def eligible_remove(entry: HistoryEntry) -> None:
        pos = eligible_pos.pop(entry.scheme)
        last = eligible.pop()
        if last.scheme != entry.scheme:
            eligible[pos] = last
            eligible_pos[last.scheme] = pos

    def add_history(
        scheme: Scheme,
        state: ModelState,
        parent: HistoryEntry | None,
        round_no: int,
        pred: tuple[float, float] | None,
    ) -> HistoryEntry:
        assert scheme not in history, f"scheme evaluated twice: {scheme}"
        if parent is None:
            num, den = np.zeros(dim), 0.0
        else:
            num = settings.decay * parent.prefix_num + emb[catalog.index[scheme.steps[-1]]]
            den = settings.decay * parent.prefix_den + 1.0
        entry = HistoryEntry(
            scheme=scheme,
            state=state,
            metrics=compute_metrics(base, state),
            round=round_no,
            seq=len(order),
            prefix_num=num,
            prefix_den=den,
            options=set(range(n_strat)) if scheme.length < settings.max_len else set(),
            predicted_ar_step=None if pred is None else pred[0],
            predicted_pr_step=None if pred is None else pred[1],
        )
        history[scheme] = entry
        order.append(entry)
        eligible_add(entry)
        return entry

    add_history(START, evaluator.evaluate(START), None, 0, None)
    evaluation_count = 1

    rounds_run = 0
    for round_no in range(1, settings.rounds + 1):
        if evaluation_count >= budget:
            budget_exhausted = True
            break
        if not eligible:
            break
        rounds_run = round_no

        # -- sample schemes: front members first (most recent first),
        #    then uniformly among the remaining eligible schemes
        acc_all = np.array([e.state.accuracy for e in order])
        par_all = np.array([e.state.params for e in order])
        front_set = {order[i].scheme for i in pareto_front_indices(acc_all, par_all)}
        front_eligible = sorted(
            (e for e in eligible if e.scheme in front_set),
            key=lambda e: -e.seq,
        )
        sampled = front_eligible[: settings.sample_size]
        fill = settings.sample_size - len(sampled)
        n_rest = len(eligible) - len(front_eligible)
        if fill > 0 and n_rest > 0:
            taken = {e.scheme for e in sampled}
            picked: list[HistoryEntry] = []
            attempts = 0
            # rejection sampling; falls back to a scan if unlucky
            while len(picked) < min(fill, n_rest) and attempts < 20 * settings.sample_size:
                attempts += 1
                cand = eligible[int(rng.integers(len(eligible)))]
                if cand.scheme in front_set or cand.scheme in taken:
                    continue
                taken.add(cand.scheme)
                picked.append(cand)
            if len(picked) < min(fill, n_rest):
                rest = [e for e in eligible if e.scheme not in front_set and e.scheme not in taken]
                extra = rng.choice(len(rest), size=min(fill, n_rest) - len(picked), replace=False)
                picked.extend(rest[i] for i in np.sort(extra))
            sampled.extend(picked)
        if not sampled:
            break

        # -- predict step outcomes for every remaining extension
        rows_parent: list[HistoryEntry] = []
        rows_sidx: list[int] = []
        feats = []
        for entry in sampled:
            prefix = entry.prefix_vector(dim)
            svec = state_features(entry.state, base, entry.scheme.length, settings.max_len)
            for sidx in sorted(entry.options):
                rows_parent.append(entry)
                rows_sidx.append(sidx)
                feats.append(np.concatenate([prefix, emb[sidx], svec]))
        x_all = np.stack(feats)
        preds = fmo.predict(x_all)
        parent_acc = np.array([e.state.accuracy for e in rows_parent])
        parent_par = np.array([e.state.params for e in rows_parent])
        pred_acc = parent_acc * (1.0 + preds[:, 0])
        pred_par = parent_par * (1.0 - preds[:, 1])

        # -- keep the predicted Pareto front, capped by crowding distance
        chosen = pareto_front_indices(pred_acc, pred_par)
        if len(chosen) > settings.cap:
            kept = select_by_crowding(pred_acc[chosen], pred_par[chosen], settings.cap)
            chosen = chosen[kept]

        # -- evaluate (in canonical candidate order), respecting budget
        room = budget - evaluation_count
        if len(chosen) > room:
            chosen = chosen[: int(room)]
            budget_exhausted = True
        children = [rows_parent[i].scheme.extend(catalog.strategies[rows_sidx[i]].canonical_id) for i in chosen]
        states = evaluator.evaluate_many(children)
        new_x_rows = []
        new_y_rows = []
        for row, child, state in zip(chosen, children, states):
            parent = rows_parent[row]
            sidx = rows_sidx[row]
            evaluation_count += 1
            ar_step = (state.accuracy - parent.state.accuracy) / parent.state.accuracy
            pr_step = (parent.state.params - state.params) / parent.state.params
            add_history(child, state, parent, round_no, (float(preds[row, 0]), float(preds[row, 1])))
            parent.options.remove(sidx)
            if not parent.options:
                eligible_remove(parent)
            new_x_rows.append(x_all[row])
            new_y_rows.append(np.array([ar_step, pr_step]))

        # -- train the predictor on this round's outcomes plus replay
        if new_x_rows:
            new_x = np.stack(new_x_rows)
            new_y = np.stack(new_y_rows)
            use_replay = not settings.no_progressive_replay and replay_x
            rx = np.stack(replay_x) if use_replay else None
            ry = np.stack(replay_y) if use_replay else None
            loss = float("nan")
            for _ in range(settings.fmo_steps_per_round):
                loss = fmo_train(fmo, optimizer, new_x, new_y, rx, ry, rng)
            logger.debug(
                "round %d: %d evaluated, predictor loss %.6f", round_no, len(chosen), loss
            )
            replay_x.extend(new_x_rows)
            replay_y.extend(new_y_rows)

    points = front_points([(e.scheme, e.state) for e in order], base, settings.gamma)
    hv = hypervolume(
        np.array([p.accuracy for p in points]),
        np.array([p.params for p in points]),
        base.params,
    )
    return SearchResult(
        front=points,
        history=order,
        trace=[_trace_row(e) for e in order],
        evaluation_count=evaluation_count,
        rounds_run=rounds_run,
        budget_exhausted=budget_exhausted,
        space_exhausted=not eligible,
        hypervolume=hv,
    )


def exhaustive_evaluate(
    catalog: Catalog, evaluator: Evaluator, max_len: int
) -> list[tuple[Scheme, ModelState]]:
    """Every scheme up to ``max_len``, level by level, states cached.

    Meant for oracle comparisons on small spaces; the caller is
    responsible for refusing combinatorially large ones.
    """
    results: list[tuple[Scheme, ModelState]] = [(START, evaluator.evaluate(START))]
    step = getattr(evaluator, "step", None)
    level = results
    for _ in range(max_len):
        nxt = []
        for scheme, state in level:
            for strategy in catalog.strategies:
                child = scheme.extend(strategy.canonical_id)
                if step is not None:
                    child_state = step(state, strategy.canonical_id)
                else:
                    child_state = evaluator.evaluate(child)
                nxt.append((child, child_state))
        results.extend(nxt)
        level = nxt
    return results


def synthesize_step_outcomes(
    catalog: Catalog,
    embeddings: EmbeddingTable,
    evaluator: Evaluator,
    n: int,
    rng: np.random.Generator,
    max_len: int = 5,
    decay: float = 0.7,
) -> tuple[np.ndarray, np.ndarray]:
    """Random (features, step outcome) pairs for predictor fitting.

    Draws a random prefix (length 0..max_len-1), folds it through the
    evaluator, then measures the one-step outcome of a random candidate.
    Returns (X, Y) arrays shaped like the search's training rows.
    """
    fmo_like = PredictorFmo(embeddings.dim, decay, substream(0, "feature-builder"))
    xs, ys = [], []
    step = getattr(evaluator, "step", None)
    for _ in range(n):
        depth = int(rng.integers(max_len))
        prefix_ids = [
            catalog.strategies[int(rng.integers(len(catalog)))].canonical_id for _ in range(depth)
        ]
        scheme = Scheme(tuple(prefix_ids))
        state = evaluator.evaluate(scheme)
        sidx = int(rng.integers(len(catalog)))
        cand = catalog.strategies[sidx]
        child_state = (
            step(state, cand.canonical_id)
            if step is not None
            else evaluator.evaluate(scheme.extend(cand.canonical_id))
        )
        prefix_vec = fmo_like.aggregate_prefix(
            [embeddings.vector(cid) for cid in prefix_ids]
        )
        svec = state_features(state, evaluator.base_state, depth, max_len)
        xs.append(np.concatenate([prefix_vec, embeddings.matrix[sidx], svec]))
        ys.append(
            np.array(
                [
                    (child_state.accuracy - state.accuracy) / state.accuracy,
                    (state.params - child_state.params) / state.params,
                ]
            )
        )
    return np.stack(xs), np.stack(ys)
