from __future__ import annotations

import pytest

from groundprobe.evalset import BuildConfig, build_eval_set
from groundprobe.llm.stub import StubGenerator
from groundprobe.synthetic import synthetic_annotations


def build_items(n: int, seed: int = 0, config: BuildConfig = BuildConfig()):
    anns = synthetic_annotations(n, seed)
    items, failures = build_eval_set(anns, StubGenerator(seed), seed, config)
    assert not failures, failures
    return items


@pytest.fixture(scope="session")
def items10():
    return build_items(10, seed=3)


@pytest.fixture(scope="session")
def items50():
    return build_items(50, seed=11)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
