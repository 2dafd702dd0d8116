from __future__ import annotations

from pathlib import Path

import pytest

CORPUS = Path(__file__).parent / "corpus"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN


def corpus_spec_paths() -> list[Path]:
    return sorted(CORPUS.rglob("*.cdl")) + sorted(CORPUS.rglob("*.pdl"))
