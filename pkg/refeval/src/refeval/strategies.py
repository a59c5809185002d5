"""Canonical strategy-id parsing.

The engine names every strategy by a canonical id such as

    C3|HP1=*0.3|HP2=x0.20|HP6=0.9

(method, then hyperparameters sorted by number). The evaluator never
sees the engine's catalog objects, only these strings, so the method
table is restated here and ids are validated against it. "*n" tokens
are fine-tune budgets in multiples of the original pre-training epochs;
"xr" tokens are parameter-reduction ratios.
"""

from __future__ import annotations

HP_VALUES: dict[str, tuple[str, ...]] = {
    "HP1": ("*0.1", "*0.2", "*0.3", "*0.4", "*0.5"),
    "HP2": ("x0.04", "x0.12", "x0.20", "x0.36", "x0.40"),
    "HP3": ("6", "8", "10"),
    "HP4": ("1", "3", "6", "10"),
    "HP5": ("0.05", "0.3", "0.5", "0.99"),
    "HP6": ("0.7", "0.9"),
    "HP7": ("*0.4", "*0.5", "*0.6", "*0.7"),
    "HP8": ("l1_weight", "l2_weight", "l2_bn", "l2_bn_param"),
    "HP9": ("*0.1", "*0.2", "*0.3", "*0.4", "*0.5"),
    "HP10": ("1", "3", "5"),
    "HP11": ("P1", "P2", "P3"),
    "HP12": ("l1norm", "k34", "skew_kur"),
    "HP13": ("*0.3", "*0.4", "*0.5"),
    "HP14": ("1", "3", "5"),
    "HP15": ("0.5", "1", "1.5", "3", "5"),
    "HP16": ("NLL", "CE", "MSE"),
}

METHOD_HPS: dict[str, tuple[str, ...]] = {
    "C1": ("HP1", "HP2", "HP3", "HP4", "HP5"),
    "C2": ("HP1", "HP2", "HP6", "HP7", "HP8"),
    "C3": ("HP1", "HP2", "HP6"),
    "C4": ("HP2", "HP9", "HP10"),
    "C5": ("HP1", "HP2", "HP11", "HP12", "HP13", "HP14"),
    "C6": ("HP1", "HP2", "HP15", "HP16"),
}


class UnknownStrategyError(ValueError):
    """The id is not the canonical spelling of any known strategy."""


def parse_strategy_id(canonical_id: str) -> tuple[float, float]:
    """Validate ``canonical_id`` and return (gamma, finetune factor).

    gamma is the numeric value of the HP2 token; the fine-tune factor is
    the numeric value of the HP1 token (HP9 for C4), to be multiplied by
    the task's pre-training epoch count.
    """
    parts = canonical_id.split("|")
    method = parts[0]
    expected = METHOD_HPS.get(method)
    if expected is None:
        raise UnknownStrategyError(f"unknown strategy id: {canonical_id!r} (no method {method!r})")
    if len(parts) - 1 != len(expected):
        raise UnknownStrategyError(
            f"unknown strategy id: {canonical_id!r} "
            f"({method} takes {len(expected)} hyperparameters, got {len(parts) - 1})"
        )
    assignment: dict[str, str] = {}
    # canonical ids list hyperparameters in the method table's order
    for part, hp in zip(parts[1:], expected):
        name, sep, token = part.partition("=")
        if not sep or name != hp:
            raise UnknownStrategyError(
                f"unknown strategy id: {canonical_id!r} (expected {hp}=..., got {part!r})"
            )
        if token not in HP_VALUES[hp]:
            raise UnknownStrategyError(
                f"unknown strategy id: {canonical_id!r} ({token!r} is not a {hp} value)"
            )
        assignment[hp] = token
    gamma = float(assignment["HP2"][1:])
    ft_token = assignment.get("HP1") or assignment.get("HP9")
    ft_factor = float(ft_token[1:]) if ft_token else 0.0
    return gamma, ft_factor
