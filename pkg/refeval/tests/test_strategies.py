import math

import pytest

from refeval.strategies import HP_VALUES, METHOD_HPS, UnknownStrategyError, parse_strategy_id


def test_gamma_and_finetune_from_tokens():
    gamma, ft = parse_strategy_id("C3|HP1=*0.3|HP2=x0.20|HP6=0.9")
    assert gamma == 0.20
    assert ft == 0.3


def test_c4_takes_finetune_from_hp9():
    gamma, ft = parse_strategy_id("C4|HP2=x0.40|HP9=*0.5|HP10=3")
    assert gamma == 0.40
    assert ft == 0.5


def test_every_method_yields_finite_values():
    for method, hps in METHOD_HPS.items():
        cid = "|".join([method] + [f"{hp}={HP_VALUES[hp][0]}" for hp in hps])
        gamma, ft = parse_strategy_id(cid)
        assert math.isfinite(gamma) and 0.0 < gamma < 1.0
        assert math.isfinite(ft) and ft > 0.0


@pytest.mark.parametrize(
    "bad",
    [
        "",
        "C9|HP1=*0.1",
        "C3",
        "C3|HP1=*0.3|HP2=x0.20",
        "C3|HP1=*0.3|HP2=x0.20|HP6=0.9|HP7=*0.4",
        "C3|HP2=x0.20|HP1=*0.3|HP6=0.9",
        "C3|HP1=*0.3|HP2=x0.21|HP6=0.9",
        "C3|HP1=*0.3|HP2=x0.20|HP6=0.8",
        "C3|HP1*0.3|HP2=x0.20|HP6=0.9",
        "C4|HP1=*0.3|HP9=*0.5|HP10=3",
    ],
)
def test_rejects_non_canonical_ids(bad):
    with pytest.raises(UnknownStrategyError, match="unknown strategy id"):
        parse_strategy_id(bad)


def test_table_spans_4525_strategies():
    total = 0
    for hps in METHOD_HPS.values():
        count = 1
        for hp in hps:
            count *= len(HP_VALUES[hp])
        total += count
    assert total == 4525
