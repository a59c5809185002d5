"""Strategy embeddings: TransR over the knowledge graph, refined by
regression on experimental experience.

Training alternates, epoch for epoch, between two objectives that share
the entity-embedding table:

  * a margin hinge over graph triples, scored by
    ``|| W_r e_h + e_r - W_r e_t ||^2`` with a relation-specific
    projection W_r (one negative per positive, drawn by corruption);
  * mean squared error of a small network mapping (strategy embedding,
    task features) to the observed (ar, pr) of past compression runs;
    this phase updates both the network and the strategy embeddings, so
    experience reshapes the same vectors the graph structure produced.

Everything is float64 numpy with hand-written gradients; a fixed seed
reproduces the final table bit for bit.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .catalog import Catalog
from .evaluation import TaskFeatures
from .experience import ExperienceRecord
from .knowledge_graph import (
    RELATION_SIGNATURE,
    RELATIONS,
    Entity,
    KnowledgeGraph,
    SaturatedRelationError,
    Triple,
    corrupt_batch,
)
from .nets import Adam, TwoHeadNet, mse_grad, mse_loss
from .rng import substream

logger = logging.getLogger(__name__)

TripleArrays = tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass
class EmbeddingStore:
    """Entity vectors, relation vectors, and per-relation projections."""

    dim: int
    entity_vecs: np.ndarray  # (n_entities, dim)
    relation_vecs: np.ndarray  # (n_relations, dim)
    projections: np.ndarray  # (n_relations, dim, dim)

    @classmethod
    def init_random(cls, kg: KnowledgeGraph, dim: int, rng: np.random.Generator) -> "EmbeddingStore":
        """Vectors uniform in [-0.1, 0.1]; projections start at identity."""
        n = len(kg.entities)
        r = len(RELATIONS)
        return cls(
            dim=dim,
            entity_vecs=rng.uniform(-0.1, 0.1, size=(n, dim)),
            relation_vecs=rng.uniform(-0.1, 0.1, size=(r, dim)),
            projections=np.broadcast_to(np.eye(dim), (r, dim, dim)).copy(),
        )

    def copy(self) -> "EmbeddingStore":
        return EmbeddingStore(
            self.dim, self.entity_vecs.copy(), self.relation_vecs.copy(), self.projections.copy()
        )

    def project_entities_to_unit_ball(self) -> None:
        norms = np.linalg.norm(self.entity_vecs, axis=1)
        over = norms > 1.0
        if over.any():
            self.entity_vecs[over] /= norms[over, None]

    def trainables(self) -> dict[str, np.ndarray]:
        return {
            "entities": self.entity_vecs,
            "relations": self.relation_vecs,
            "projections": self.projections,
        }


def transr_score(store: EmbeddingStore, kg: KnowledgeGraph, triple: Triple) -> float:
    """Implausibility of one triple; lower means more plausible."""
    h = store.entity_vecs[kg.entity_index[triple.head]]
    t = store.entity_vecs[kg.entity_index[triple.tail]]
    r = RELATIONS.index(triple.relation)
    w = store.projections[r]
    u = w @ h + store.relation_vecs[r] - w @ t
    return float(u @ u)


def transr_epoch(
    store: EmbeddingStore,
    kg: KnowledgeGraph,
    triples: TripleArrays,
    rng: np.random.Generator,
    optimizer: Adam,
    *,
    margin: float = 1.0,
    batch_size: int = 1024,
) -> float:
    """One shuffled pass of margin-hinge training; returns mean hinge loss.

    Per positive triple one corruption is drawn; the hinge
    max(0, margin + score(pos) - score(neg)) is minimized by Adam steps
    per mini-batch, and entity vectors are re-projected to the unit ball
    at the end of the pass.
    """
    heads, rels, tails = triples
    n = len(heads)
    if n == 0:
        return 0.0
    perm = rng.permutation(n)
    loss_sum = 0.0
    for start in range(0, n, batch_size):
        batch = perm[start : start + batch_size]
        bh, br, bt = heads[batch], rels[batch], tails[batch]
        nh, nt = corrupt_batch(kg, bh, br, bt, rng)
        m = len(batch)
        coef = 2.0 / m  # d(mean hinge)/d(score) for active rows, times d(score)/dU = 2U
        d_ent = np.zeros_like(store.entity_vecs)
        d_rel = np.zeros_like(store.relation_vecs)
        d_proj = np.zeros_like(store.projections)
        for r in range(len(RELATIONS)):
            rows = np.nonzero(br == r)[0]
            if len(rows) == 0:
                continue
            w = store.projections[r]
            e_r = store.relation_vecs[r]
            ph, pt = bh[rows], bt[rows]
            qh, qt = nh[rows], nt[rows]
            hp = store.entity_vecs[ph]
            tp = store.entity_vecs[pt]
            hn = store.entity_vecs[qh]
            tn = store.entity_vecs[qt]
            u_pos = hp @ w.T + e_r - tp @ w.T
            u_neg = hn @ w.T + e_r - tn @ w.T
            s_pos = np.sum(u_pos * u_pos, axis=1)
            s_neg = np.sum(u_neg * u_neg, axis=1)
            violation = margin + s_pos - s_neg
            active = violation > 0.0
            loss_sum += float(violation[active].sum())
            if not active.any():
                continue
            up = u_pos[active] * coef
            un = u_neg[active] * coef
            np.add.at(d_ent, ph[active], up @ w)
            np.add.at(d_ent, pt[active], -(up @ w))
            np.add.at(d_ent, qh[active], -(un @ w))
            np.add.at(d_ent, qt[active], un @ w)
            d_rel[r] += up.sum(axis=0) - un.sum(axis=0)
            d_proj[r] += up.T @ (hp[active] - tp[active]) - un.T @ (hn[active] - tn[active])
        optimizer.step(
            store.trainables(),
            {"entities": d_ent, "relations": d_rel, "projections": d_proj},
        )
    store.project_entities_to_unit_ball()
    return loss_sum / n


def mean_hinge_loss(
    store: EmbeddingStore,
    triples: TripleArrays,
    negatives: TripleArrays,
    margin: float = 1.0,
) -> float:
    """Hinge loss of given positive/negative pairs without training."""
    heads, rels, tails = triples
    nheads, _, ntails = negatives
    total = 0.0
    for r in range(len(RELATIONS)):
        rows = np.nonzero(rels == r)[0]
        if len(rows) == 0:
            continue
        w = store.projections[r]
        e_r = store.relation_vecs[r]
        u_pos = store.entity_vecs[heads[rows]] @ w.T + e_r - store.entity_vecs[tails[rows]] @ w.T
        u_neg = store.entity_vecs[nheads[rows]] @ w.T + e_r - store.entity_vecs[ntails[rows]] @ w.T
        violation = margin + np.sum(u_pos**2, axis=1) - np.sum(u_neg**2, axis=1)
        total += float(violation.clip(min=0.0).sum())
    return total / len(heads)


# -- experience regression ------------------------------------------


def task_vector(task: TaskFeatures) -> np.ndarray:
    """7 features: log10(1+x) for the count-like fields, accuracy raw."""
    return np.array(
        [
            np.log10(1.0 + task.category_count),
            np.log10(1.0 + task.image_size),
            np.log10(1.0 + task.channel_count),
            np.log10(1.0 + task.data_amount),
            np.log10(1.0 + task.param_count),
            np.log10(1.0 + task.flops),
            task.accuracy,
        ]
    )


class ExperienceRegressor:
    """(strategy embedding, 7 task features) -> (predicted ar, predicted pr)."""

    def __init__(self, dim: int, rng: np.random.Generator) -> None:
        self.dim = dim
        self.net = TwoHeadNet(dim + 7, rng)

    def predict(self, strategy_vecs: np.ndarray, task_vecs: np.ndarray) -> np.ndarray:
        x = np.hstack([np.atleast_2d(strategy_vecs), np.atleast_2d(task_vecs)])
        return self.net.forward(x)[0]


def _record_arrays(
    catalog: Catalog, records: Sequence[ExperienceRecord]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sidx = np.array([catalog.index[r.strategy] for r in records], dtype=np.int64)
    tasks = np.stack([task_vector(r.task) for r in records])
    targets = np.array([[r.ar, r.pr] for r in records])
    return sidx, tasks, targets


def nnexp_train_epoch(
    regressor: ExperienceRegressor,
    store: EmbeddingStore,
    catalog: Catalog,
    records: Sequence[ExperienceRecord],
    rng: np.random.Generator,
    opt_theta: Adam,
    opt_embed: Adam,
    *,
    batch_size: int = 128,
) -> float:
    """One shuffled epoch of experience regression.

    Updates the network parameters and the strategy embeddings the
    records touch (both by Adam). Returns the post-epoch mean squared
    error over all records.
    """
    if not records:
        return 0.0
    sidx, tasks, targets = _record_arrays(catalog, records)
    n = len(records)
    perm = rng.permutation(n)
    dim = store.dim
    for start in range(0, n, batch_size):
        batch = perm[start : start + batch_size]
        x = np.hstack([store.entity_vecs[sidx[batch]], tasks[batch]])
        pred, cache = regressor.net.forward(x)
        grads, dx = regressor.net.backward(cache, mse_grad(pred, targets[batch]))
        opt_theta.step(regressor.net.params, grads)
        d_embed = np.zeros_like(store.entity_vecs)
        np.add.at(d_embed, sidx[batch], dx[:, :dim])
        opt_embed.step({"entities": store.entity_vecs}, {"entities": d_embed})
    final = regressor.predict(store.entity_vecs[sidx], tasks)
    return mse_loss(final, targets)


# -- the alternating outer loop --------------------------------------


@dataclass
class EmbeddingTable:
    """Final per-strategy vectors, aligned with catalog order."""

    ids: list[str]
    matrix: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        self.index = {cid: i for i, cid in enumerate(self.ids)}

    def vector(self, canonical_id: str) -> np.ndarray:
        return self.matrix[self.index[canonical_id]]

    def save(self, path: str | Path) -> None:
        payload = {
            "version": 1,
            "dim": self.dim,
            "embeddings": {cid: self.matrix[i].tolist() for i, cid in enumerate(self.ids)},
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingTable":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("version") != 1:
            raise ValueError(f"unsupported embedding file version: {payload.get('version')!r}")
        ids = list(payload["embeddings"])
        matrix = np.array([payload["embeddings"][cid] for cid in ids], dtype=np.float64)
        return cls(ids=ids, matrix=matrix, dim=int(payload["dim"]))


def fit_embedding_model(
    catalog: Catalog,
    kg: KnowledgeGraph,
    records: Sequence[ExperienceRecord],
    *,
    dim: int = 32,
    train_epochs: int = 50,
    seed: int = 0,
    lr: float = 0.001,
    margin: float = 1.0,
    transr_batch: int = 1024,
    exp_batch: int = 128,
    no_kg: bool = False,
    no_exp: bool = False,
    triples: TripleArrays | None = None,
) -> tuple[EmbeddingStore, ExperienceRegressor]:
    """Run the alternating training loop; returns the fitted model parts.

    ``triples`` overrides the training triples (e.g. to hold a split
    out for link-prediction evaluation); defaults to the whole graph.
    With ``train_epochs=0`` the randomly initialized model is returned
    untouched.
    """
    kg_rng = substream(seed, "kg")
    nnexp_rng = substream(seed, "nnexp")
    store = EmbeddingStore.init_random(kg, dim, kg_rng)
    regressor = ExperienceRegressor(dim, nnexp_rng)
    if triples is None:
        triples = kg.triple_arrays()
    if not records:
        logger.warning("no experience records; embeddings come from the knowledge graph alone")
    opt_transr = Adam(lr=lr)
    opt_theta = Adam(lr=lr)
    opt_embed = Adam(lr=lr)
    for epoch in range(train_epochs):
        if not no_kg:
            hinge = transr_epoch(
                store, kg, triples, kg_rng, opt_transr, margin=margin, batch_size=transr_batch
            )
        else:
            hinge = float("nan")
        if records and not no_exp:
            exp_mse = nnexp_train_epoch(
                regressor, store, catalog, records, nnexp_rng, opt_theta, opt_embed,
                batch_size=exp_batch,
            )
        else:
            exp_mse = float("nan")
        logger.debug("embedding epoch %d: hinge=%.6f exp_mse=%.6f", epoch + 1, hinge, exp_mse)
    return store, regressor


def learn_embeddings(
    catalog: Catalog,
    kg: KnowledgeGraph,
    records: Sequence[ExperienceRecord],
    **kwargs,
) -> EmbeddingTable:
    """Alternating TransR/experience training; returns the strategy table."""
    store, _ = fit_embedding_model(catalog, kg, records, **kwargs)
    n = len(catalog.strategies)
    ids = [s.canonical_id for s in catalog.strategies]
    return EmbeddingTable(ids=ids, matrix=store.entity_vecs[:n].copy(), dim=store.dim)


# -- link-prediction evaluation ---------------------------------------


def holdout_split(
    kg: KnowledgeGraph, relation: str, n_holdout: int, rng: np.random.Generator
) -> tuple[TripleArrays, list[Triple]]:
    """Remove ``n_holdout`` random triples of one relation from training."""
    heads, rels, tails = kg.triple_arrays()
    r = RELATIONS.index(relation)
    candidates = np.nonzero(rels == r)[0]
    if len(candidates) < n_holdout:
        raise ValueError(f"{relation} has only {len(candidates)} triples, need {n_holdout}")
    chosen = rng.choice(candidates, size=n_holdout, replace=False)
    held_mask = np.zeros(len(heads), dtype=bool)
    held_mask[chosen] = True
    train = (heads[~held_mask], rels[~held_mask], tails[~held_mask])
    heldout = [kg.triples[i] for i in sorted(chosen.tolist())]
    return train, heldout


def filtered_tail_rank(
    store: EmbeddingStore,
    kg: KnowledgeGraph,
    triple: Triple,
    rng: np.random.Generator,
    n_corruptions: int = 99,
) -> int:
    """Rank of the true tail against sampled false tails (1 = best).

    Corruption tails are drawn uniformly, with replacement, from the
    same-kind entities that do *not* form a true triple with the head
    (the filtered protocol, so other correct answers never compete).
    """
    r = RELATIONS.index(triple.relation)
    tail_kind = RELATION_SIGNATURE[triple.relation][1]
    pool = kg.kind_pools()[tail_kind]
    truth = kg.indexed_set()
    h_idx = kg.entity_index[triple.head]
    valid = np.array(
        [e for e in pool.tolist() if (h_idx, r, e) not in truth], dtype=np.int64
    )
    if len(valid) == 0:
        raise SaturatedRelationError(f"no valid tail corruption exists for {triple}")
    cands = valid[rng.integers(len(valid), size=n_corruptions)]

    w = store.projections[r]
    base = w @ store.entity_vecs[h_idx] + store.relation_vecs[r]
    true_diff = base - w @ store.entity_vecs[kg.entity_index[triple.tail]]
    true_score = float(true_diff @ true_diff)
    cand_diff = base[None, :] - store.entity_vecs[cands] @ w.T
    cand_scores = np.sum(cand_diff * cand_diff, axis=1)
    return 1 + int(np.sum(cand_scores < true_score))


def mean_filtered_rank(
    store: EmbeddingStore,
    kg: KnowledgeGraph,
    heldout: Sequence[Triple],
    rng: np.random.Generator,
    n_corruptions: int = 99,
) -> float:
    ranks = [filtered_tail_rank(store, kg, t, rng, n_corruptions) for t in heldout]
    return float(np.mean(ranks))


def strategy_entity_indices(catalog: Catalog, kg: KnowledgeGraph) -> np.ndarray:
    """Entity index of each catalog strategy (catalog order)."""
    return np.array(
        [kg.entity_index[Entity("E1", s.canonical_id)] for s in catalog.strategies],
        dtype=np.int64,
    )
