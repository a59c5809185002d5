"""Knowledge graph over the strategy catalog.

Five entity kinds and five forward relations:

    E1 strategy      R1: strategy -> its method          (E1 -> E2)
    E2 method        R2: strategy -> each HP setting     (E1 -> E4)
    E3 hyperparameter R3: method -> each of its HPs      (E2 -> E3)
    E4 HP setting    R4: method -> each technique        (E2 -> E5)
    E5 technique     R5: HP -> each of its settings      (E3 -> E4)

HP settings are scoped per hyperparameter ("HP2=x0.20"), so equal
tokens of different hyperparameters stay distinct entities. Only the
forward direction is materialized; embedding training learns inverse
structure implicitly through corruption sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, NamedTuple

import numpy as np

from .catalog import Catalog

KINDS = ("E1", "E2", "E3", "E4", "E5")
RELATIONS = ("R1", "R2", "R3", "R4", "R5")

# relation -> (head kind, tail kind)
RELATION_SIGNATURE: dict[str, tuple[str, str]] = {
    "R1": ("E1", "E2"),
    "R2": ("E1", "E4"),
    "R3": ("E2", "E3"),
    "R4": ("E2", "E5"),
    "R5": ("E3", "E4"),
}


class Entity(NamedTuple):
    kind: str
    key: str


class Triple(NamedTuple):
    head: Entity
    relation: str
    tail: Entity


class SaturatedRelationError(RuntimeError):
    """No valid corruption exists (or none was found within the bound)."""


@dataclass
class KnowledgeGraph:
    entities: list[Entity]
    entity_index: dict[Entity, int]
    by_kind: dict[str, list[int]]  # kind -> entity indices, catalog order
    triples: list[Triple]
    triple_set: set[Triple]

    def count_by_relation(self) -> dict[str, int]:
        counts = {r: 0 for r in RELATIONS}
        for t in self.triples:
            counts[t.relation] += 1
        return counts

    def triples_of(self, relation: str) -> list[Triple]:
        return [t for t in self.triples if t.relation == relation]

    # integer views used by the embedding trainer
    def triple_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        heads = np.array([self.entity_index[t.head] for t in self.triples], dtype=np.int64)
        rels = np.array([RELATIONS.index(t.relation) for t in self.triples], dtype=np.int64)
        tails = np.array([self.entity_index[t.tail] for t in self.triples], dtype=np.int64)
        return heads, rels, tails

    def indexed_set(self) -> set[tuple[int, int, int]]:
        """Triples as (head index, relation index, tail index), memoized."""
        cached = getattr(self, "_indexed_set", None)
        if cached is None:
            heads, rels, tails = self.triple_arrays()
            cached = set(zip(heads.tolist(), rels.tolist(), tails.tolist()))
            self._indexed_set = cached
        return cached

    def kind_pools(self) -> dict[str, np.ndarray]:
        """Entity indices per kind as arrays, memoized."""
        cached = getattr(self, "_kind_pools", None)
        if cached is None:
            cached = {k: np.array(v, dtype=np.int64) for k, v in self.by_kind.items()}
            self._kind_pools = cached
        return cached


def build_kg(catalog: Catalog) -> KnowledgeGraph:
    """Deterministic graph construction from a catalog."""
    entities: list[Entity] = []
    entity_index: dict[Entity, int] = {}
    by_kind: dict[str, list[int]] = {k: [] for k in KINDS}

    def add(kind: str, key: str) -> Entity:
        ent = Entity(kind, key)
        if ent not in entity_index:
            entity_index[ent] = len(entities)
            entities.append(ent)
            by_kind[kind].append(entity_index[ent])
        return ent

    # the graph's vocabulary is what the present methods reach; a
    # filtered catalog keeps unused hyperparameter defs out of the graph
    used_hps = {hp for m in catalog.methods.values() for hp in m.hyperparameters}
    hp_defs = [hp for hp in catalog.hyperparameters.values() if hp.id in used_hps]

    for strategy in catalog.strategies:
        add("E1", strategy.canonical_id)
    for method in catalog.methods.values():
        add("E2", method.id)
    for hp in hp_defs:
        add("E3", hp.id)
    # settings scoped per HP, in HP-table order then value order
    for hp in hp_defs:
        for token in hp.values:
            add("E4", f"{hp.id}={token}")
    seen_te: set[str] = set()
    for method in catalog.methods.values():
        for te in method.techniques:
            if te not in seen_te:
                seen_te.add(te)
                add("E5", te)

    triples: list[Triple] = []
    for strategy in catalog.strategies:
        head = Entity("E1", strategy.canonical_id)
        triples.append(Triple(head, "R1", Entity("E2", strategy.method)))
        for hp, token in strategy.assignment:
            triples.append(Triple(head, "R2", Entity("E4", f"{hp}={token}")))
    for method in catalog.methods.values():
        head = Entity("E2", method.id)
        for hp in method.hyperparameters:
            triples.append(Triple(head, "R3", Entity("E3", hp)))
        for te in method.techniques:
            triples.append(Triple(head, "R4", Entity("E5", te)))
    for hp in hp_defs:
        head = Entity("E3", hp.id)
        for token in hp.values:
            triples.append(Triple(head, "R5", Entity("E4", f"{hp.id}={token}")))

    return KnowledgeGraph(entities, entity_index, by_kind, triples, set(triples))


def corrupt_triple(
    kg: KnowledgeGraph, triple: Triple, rng: np.random.Generator, max_resamples: int = 100
) -> Triple:
    """Draw a negative triple by replacing the head or the tail.

    Every attempt flips a fresh fair coin for the side and draws a
    uniform same-kind replacement; anything present in the graph is
    rejected. The per-attempt coin matters: some triples have no valid
    corruption on one side (every method shares HP2, so a head swap of
    an R3 HP2 edge always lands on a true triple) and must escape
    through the other. After ``max_resamples`` failed attempts the
    relation is declared saturated.
    """
    for _ in range(max_resamples):
        corrupt_head = bool(rng.integers(2))
        kind = triple.head.kind if corrupt_head else triple.tail.kind
        pool = kg.by_kind[kind]
        replacement = kg.entities[pool[int(rng.integers(len(pool)))]]
        if corrupt_head:
            candidate = Triple(replacement, triple.relation, triple.tail)
        else:
            candidate = Triple(triple.head, triple.relation, replacement)
        if candidate not in kg.triple_set:
            return candidate
    raise SaturatedRelationError(
        f"no valid corruption found for {triple} within {max_resamples} attempts"
    )


def corrupt_batch(
    kg: KnowledgeGraph,
    heads: np.ndarray,
    rels: np.ndarray,
    tails: np.ndarray,
    rng: np.random.Generator,
    max_resamples: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized negative sampling with corrupt_triple's semantics.

    For each positive (index) triple: fair coin on head vs tail, uniform
    same-kind replacement, rejection of anything present in the graph.
    Returns corrupted (heads, tails); the relation stays fixed.
    """
    m = len(heads)
    pools = kg.kind_pools()
    truth = kg.indexed_set()
    head_pools = [pools[RELATION_SIGNATURE[r][0]] for r in RELATIONS]
    tail_pools = [pools[RELATION_SIGNATURE[r][1]] for r in RELATIONS]

    corrupt_head = rng.integers(2, size=m).astype(bool)
    pool_sizes = np.empty(m, dtype=np.int64)
    for r in range(len(RELATIONS)):
        mask = rels == r
        pool_sizes[mask & corrupt_head] = len(head_pools[r])
        pool_sizes[mask & ~corrupt_head] = len(tail_pools[r])
    draws = rng.integers(0, pool_sizes)

    new_heads = heads.copy()
    new_tails = tails.copy()
    for r in range(len(RELATIONS)):
        mask = rels == r
        hmask = mask & corrupt_head
        tmask = mask & ~corrupt_head
        new_heads[hmask] = head_pools[r][draws[hmask]]
        new_tails[tmask] = tail_pools[r][draws[tmask]]

    # reject corruptions that landed on true triples; every retry flips
    # a fresh coin so a one-sided dead end cannot stall the draw
    for i in range(m):
        if (int(new_heads[i]), int(rels[i]), int(new_tails[i])) not in truth:
            continue
        for _ in range(max_resamples):
            flip_head = bool(rng.integers(2))
            pool = head_pools[rels[i]] if flip_head else tail_pools[rels[i]]
            replacement = int(pool[int(rng.integers(len(pool)))])
            if flip_head:
                candidate = (replacement, int(rels[i]), int(tails[i]))
            else:
                candidate = (int(heads[i]), int(rels[i]), replacement)
            if candidate not in truth:
                new_heads[i], new_tails[i] = candidate[0], candidate[2]
                break
        else:
            raise SaturatedRelationError(
                f"no valid corruption for a {RELATIONS[int(rels[i])]} triple "
                f"within {max_resamples} attempts"
            )
    return new_heads, new_tails


def export_tsv(kg: KnowledgeGraph, out: IO[str]) -> int:
    """Write (head key, relation, tail key) rows; returns the row count."""
    n = 0
    for head, relation, tail in kg.triples:
        out.write(f"{head.key}\t{relation}\t{tail.key}\n")
        n += 1
    return n
