from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from policyrepair import Policy, RequestSpec, normalize_policy
from policyrepair.evaluation import parse_spec

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"
SAMPLE_CORPUS = Path(__file__).parent.parent / "data" / "sample_corpus"


@pytest.fixture(scope="session")
def figure_policy() -> Policy:
    return normalize_policy((FIXTURES / "figure_policy.json").read_text())


@pytest.fixture(scope="session")
def figure_spec() -> RequestSpec:
    return parse_spec((FIXTURES / "figure_requests.json").read_text())


@pytest.fixture(scope="session")
def sample_corpus() -> list[tuple[str, Policy]]:
    return [
        (path.name, normalize_policy(path.read_text()))
        for path in sorted(SAMPLE_CORPUS.glob("*.json"))
    ]
