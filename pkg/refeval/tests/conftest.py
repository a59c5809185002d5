"""Shared fixtures: wire task payload and subprocess session helpers."""

import json
import subprocess
import sys

import pytest

TASK = {
    "category_count": 10.0,
    "image_size": 32.0,
    "channel_count": 3.0,
    "data_amount": 50000.0,
    "param_count": 1.0e6,
    "flops": 3.0e8,
    "accuracy": 0.9,
}

HELLO = json.dumps({"hello": "automc-eval/1"})

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(name: str, passed: bool, detail: str = "") -> bool:
    line = f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'}"
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


def refeval_argv(*args: str) -> list[str]:
    return [sys.executable, "-m", "refeval", *args]


@pytest.fixture
def session():
    """Raw line-protocol session against a refeval subprocess."""

    procs = []

    def start(*args: str) -> subprocess.Popen:
        proc = subprocess.Popen(
            refeval_argv(*args),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        procs.append(proc)
        return proc

    yield start
    for proc in procs:
        if proc.poll() is None:
            proc.kill()
        proc.wait(timeout=10)
