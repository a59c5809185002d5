import pytest

from compsearch import (
    EvaluatorConfig,
    SimulatedEvaluator,
    TaskFeatures,
    build_catalog,
    build_kg,
)

DEFAULT_TASK = TaskFeatures(
    category_count=10,
    image_size=32,
    channel_count=3,
    data_amount=50000,
    param_count=1.0e6,
    flops=3.0e8,
    accuracy=0.9,
)

# one human-readable verdict line per acceptance criterion, echoed into
# the terminal summary so they survive pytest's output capture
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(name: str, passed: bool, detail: str = "", soft: bool = False) -> bool:
    if soft:
        status = "PASS (soft)" if passed else "REPORTED (soft)"
    else:
        status = "PASS" if passed else "FAIL"
    line = f"ACCEPTANCE {name}: {status}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def full_catalog():
    return build_catalog()


@pytest.fixture(scope="session")
def full_kg(full_catalog):
    return build_kg(full_catalog)


@pytest.fixture(scope="session")
def tiny_catalog():
    # 125 strategies: the two smallest method families
    return build_catalog({"methods": ["C3", "C4"]})


@pytest.fixture(scope="session")
def tiny_kg(tiny_catalog):
    return build_kg(tiny_catalog)


@pytest.fixture
def task():
    return DEFAULT_TASK


@pytest.fixture
def make_evaluator():
    def make(catalog, seed=42, pretrain_epochs=1, task=DEFAULT_TASK):
        cfg = EvaluatorConfig(
            seed=seed, base_state=task.base_state(), pretrain_epochs=pretrain_epochs
        )
        return SimulatedEvaluator(catalog, cfg)

    return make
