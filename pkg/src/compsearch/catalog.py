"""Strategy catalog: compression methods, hyperparameter grids, schemes.

A *strategy* is one compression method together with a full assignment
of its hyperparameters; a *scheme* is an ordered sequence of strategies
applied left to right. The catalog enumerates every strategy of the
built-in method table (4,525 of them unfiltered) in a fixed order and
gives each a canonical string id, so that every other component can
refer to strategies by id alone.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class ConfigurationError(ValueError):
    """Raised for invalid catalog filters or run configuration values."""


# Hyperparameter grids. Tokens are stored verbatim as strings: numeric
# lookalikes ("6", "0.7") are names of grid points, not quantities, and
# keeping them as text makes canonical ids stable. "*n" means n times
# the original model's pre-training epoch count, resolved only where a
# quantity is needed; "xr" is a parameter-reduction ratio r.
_HP_TABLE: tuple[tuple[str, str, tuple[str, ...]], ...] = (
    ("HP1", "fine tune epochs", ("*0.1", "*0.2", "*0.3", "*0.4", "*0.5")),
    ("HP2", "decrease ratio of parameter", ("x0.04", "x0.12", "x0.20", "x0.36", "x0.40")),
    ("HP3", "segment number", ("6", "8", "10")),
    ("HP4", "temperature factor", ("1", "3", "6", "10")),
    ("HP5", "alpha factor", ("0.05", "0.3", "0.5", "0.99")),
    ("HP6", "channel's maximum pruning ratio", ("0.7", "0.9")),
    ("HP7", "evolution epochs", ("*0.4", "*0.5", "*0.6", "*0.7")),
    ("HP8", "filter's evaluation criteria", ("l1_weight", "l2_weight", "l2_bn", "l2_bn_param")),
    ("HP9", "back-propagation epochs", ("*0.1", "*0.2", "*0.3", "*0.4", "*0.5")),
    ("HP10", "update frequency", ("1", "3", "5")),
    ("HP11", "global evaluation criteria", ("P1", "P2", "P3")),
    ("HP12", "global evaluation criteria", ("l1norm", "k34", "skew_kur")),
    ("HP13", "optimization epochs", ("*0.3", "*0.4", "*0.5")),
    ("HP14", "MSE loss's factor", ("1", "3", "5")),
    ("HP15", "auxiliary MSE loss's factor", ("0.5", "1", "1.5", "3", "5")),
    ("HP16", "auxiliary loss", ("NLL", "CE", "MSE")),
)

# Technique inventory. TE8 does not exist in the method table; ids are
# data, not an enumeration, so the gap is preserved.
_TECHNIQUE_TABLE: tuple[tuple[str, str], ...] = (
    ("TE1", "knowledge distillation with an LMA objective"),
    ("TE2", "filter pruning driven by evolutionary search"),
    ("TE3", "fine tuning"),
    ("TE4", "channel pruning via batch-norm scaling factors"),
    ("TE5", "filter pruning driven by back-propagation"),
    ("TE6", "filter pruning via higher-order statistics"),
    ("TE7", "low-rank kernel approximation via tensor decomposition"),
    ("TE9", "low-rank filter approximation over a filter basis"),
)

# method id, name, techniques used, hyperparameters exposed
_METHOD_TABLE: tuple[tuple[str, str, tuple[str, ...], tuple[str, ...]], ...] = (
    ("C1", "LMA", ("TE1",), ("HP1", "HP2", "HP3", "HP4", "HP5")),
    ("C2", "LeGR", ("TE2", "TE3"), ("HP1", "HP2", "HP6", "HP7", "HP8")),
    ("C3", "NS", ("TE4", "TE3"), ("HP1", "HP2", "HP6")),
    ("C4", "SFP", ("TE5",), ("HP2", "HP9", "HP10")),
    ("C5", "HOS", ("TE6", "TE7", "TE3"), ("HP1", "HP2", "HP11", "HP12", "HP13", "HP14")),
    ("C6", "LFB", ("TE9",), ("HP1", "HP2", "HP15", "HP16")),
)


@dataclass(frozen=True)
class HyperparameterDef:
    id: str
    description: str
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ConfigurationError(f"hyperparameter {self.id} has an empty value list")
        if len(set(self.values)) != len(self.values):
            raise ConfigurationError(f"hyperparameter {self.id} has duplicate value tokens")


@dataclass(frozen=True)
class MethodDef:
    id: str
    name: str
    techniques: tuple[str, ...]
    hyperparameters: tuple[str, ...]


def _hp_index(hp_id: str) -> int:
    return int(hp_id[2:])


@dataclass(frozen=True)
class Strategy:
    """One method plus a full hyperparameter assignment."""

    method: str
    assignment: tuple[tuple[str, str], ...]  # (hp id, token), sorted by hp index
    canonical_id: str = field(compare=False)

    def value(self, hp_id: str) -> str | None:
        for hp, token in self.assignment:
            if hp == hp_id:
                return token
        return None

    @property
    def assignment_map(self) -> dict[str, str]:
        return dict(self.assignment)


def make_canonical_id(method_id: str, assignment: Mapping[str, str]) -> str:
    parts = [method_id]
    for hp in sorted(assignment, key=_hp_index):
        parts.append(f"{hp}={assignment[hp]}")
    return "|".join(parts)


@dataclass(frozen=True)
class Scheme:
    """An ordered sequence of strategy ids. The empty scheme is START."""

    steps: tuple[str, ...] = ()

    @property
    def length(self) -> int:
        return len(self.steps)

    def extend(self, canonical_id: str) -> "Scheme":
        return Scheme(self.steps + (canonical_id,))

    def __str__(self) -> str:
        return "->".join(self.steps) if self.steps else "START"


START = Scheme()


class Catalog:
    """Immutable strategy inventory with deterministic ordering."""

    def __init__(
        self,
        hyperparameters: Sequence[HyperparameterDef],
        methods: Sequence[MethodDef],
    ) -> None:
        self.hyperparameters: dict[str, HyperparameterDef] = {h.id: h for h in hyperparameters}
        self.methods: dict[str, MethodDef] = {m.id: m for m in methods}
        self.strategies: list[Strategy] = []
        self.index: dict[str, int] = {}
        for method in methods:
            grids = [self.hyperparameters[hp].values for hp in method.hyperparameters]
            for combo in itertools.product(*grids):
                assignment = tuple(zip(method.hyperparameters, combo))
                cid = make_canonical_id(method.id, dict(assignment))
                self.index[cid] = len(self.strategies)
                self.strategies.append(Strategy(method.id, assignment, cid))

    def __len__(self) -> int:
        return len(self.strategies)

    def __contains__(self, canonical_id: str) -> bool:
        return canonical_id in self.index

    def strategy(self, canonical_id: str) -> Strategy:
        try:
            return self.strategies[self.index[canonical_id]]
        except KeyError:
            raise KeyError(f"unknown strategy id: {canonical_id!r}") from None

    def count_by_method(self) -> dict[str, int]:
        counts = {m: 0 for m in self.methods}
        for s in self.strategies:
            counts[s.method] += 1
        return counts

    def parse_canonical_id(self, canonical_id: str) -> Strategy:
        """Parse and validate an id against this catalog.

        The id must be byte-identical to the catalog's own rendering
        (sorted hyperparameters, known tokens), not merely equivalent.
        """
        strategy = self._parse_structure(canonical_id)
        if canonical_id not in self.index:
            raise KeyError(f"strategy id not in catalog: {canonical_id!r}")
        return strategy

    def _parse_structure(self, canonical_id: str) -> Strategy:
        parts = canonical_id.split("|")
        method = self.methods.get(parts[0])
        if method is None:
            raise ConfigurationError(f"unknown method id in {canonical_id!r}")
        assignment: dict[str, str] = {}
        for part in parts[1:]:
            hp, sep, token = part.partition("=")
            if not sep:
                raise ConfigurationError(f"malformed assignment {part!r} in {canonical_id!r}")
            hp_def = self.hyperparameters.get(hp)
            if hp_def is None:
                raise ConfigurationError(f"unknown hyperparameter {hp!r} in {canonical_id!r}")
            if token not in hp_def.values:
                raise ConfigurationError(f"unknown value {token!r} for {hp} in {canonical_id!r}")
            if hp in assignment:
                raise ConfigurationError(f"duplicate hyperparameter {hp} in {canonical_id!r}")
            assignment[hp] = token
        if set(assignment) != set(method.hyperparameters):
            raise ConfigurationError(
                f"{canonical_id!r} does not assign exactly {method.id}'s hyperparameters"
            )
        if make_canonical_id(method.id, assignment) != canonical_id:
            raise ConfigurationError(f"non-canonical hyperparameter order in {canonical_id!r}")
        return Strategy(method.id, tuple(sorted(assignment.items(), key=lambda kv: _hp_index(kv[0]))), canonical_id)


def _load_filter(spec: Mapping | str | Path | None) -> Mapping | None:
    if spec is None or isinstance(spec, Mapping):
        return spec
    text = Path(spec).read_text(encoding="utf-8")
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigurationError("catalog filter must be a JSON object")
    return data


def build_catalog(filter_spec: Mapping | str | Path | None = None) -> Catalog:
    """Build the full catalog, optionally restricted by a whitelist filter.

    ``filter_spec`` is a mapping (or path to a JSON file) of the form
    ``{"methods": ["C3", "C4"], "hp_values": {"HP2": ["x0.04", "x0.20"]}}``.
    Both keys are optional whitelists; anything not listed survives
    untouched. Unknown ids, unknown value tokens, and duplicate tokens
    are configuration errors naming the offending entry.
    """
    spec = _load_filter(filter_spec)
    hp_defs = {hp_id: (desc, values) for hp_id, desc, values in _HP_TABLE}
    method_rows = list(_METHOD_TABLE)

    if spec:
        unknown_keys = set(spec) - {"methods", "hp_values"}
        if unknown_keys:
            raise ConfigurationError(f"unknown catalog filter keys: {sorted(unknown_keys)}")
        if "methods" in spec:
            wanted = spec["methods"]
            if len(set(wanted)) != len(wanted):
                raise ConfigurationError(f"duplicate method id in filter: {wanted}")
            known = {row[0] for row in method_rows}
            for mid in wanted:
                if mid not in known:
                    raise ConfigurationError(f"unknown method id in filter: {mid!r}")
            method_rows = [row for row in method_rows if row[0] in set(wanted)]
        if "hp_values" in spec:
            for hp_id, tokens in spec["hp_values"].items():
                if hp_id not in hp_defs:
                    raise ConfigurationError(f"unknown hyperparameter id in filter: {hp_id!r}")
                desc, values = hp_defs[hp_id]
                if len(set(tokens)) != len(tokens):
                    raise ConfigurationError(f"duplicate value token for {hp_id}: {tokens}")
                for tok in tokens:
                    if tok not in values:
                        raise ConfigurationError(f"unknown value {tok!r} for {hp_id} in filter")
                kept = tuple(v for v in values if v in set(tokens))
                if not kept:
                    raise ConfigurationError(f"filter leaves {hp_id} with no values")
                hp_defs[hp_id] = (desc, kept)

    hyperparameters = [HyperparameterDef(hp_id, desc, values) for hp_id, (desc, values) in hp_defs.items()]
    methods = [MethodDef(mid, name, tech, hps) for mid, name, tech, hps in method_rows]
    return Catalog(hyperparameters, methods)


def scheme_children(
    scheme: Scheme, options: Iterable[str], max_len: int
) -> list[tuple[Scheme, str]]:
    """One (child scheme, appended strategy id) pair per remaining option.

    Schemes already at ``max_len`` have no children.
    """
    if scheme.length >= max_len:
        return []
    return [(scheme.extend(cid), cid) for cid in options]


def space_size(n_strategies: int, max_len: int) -> int:
    """Number of schemes of length 0..max_len over n strategies (exact)."""
    if n_strategies < 0 or max_len < 0:
        raise ValueError("space_size arguments must be non-negative")
    return sum(n_strategies**level for level in range(max_len + 1))
