from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import settings

from gradedsess.syntax import parse_program

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

# Property suites run at least 1000 derandomised cases each.
settings.register_profile("pinned", max_examples=1000, derandomize=True, deadline=None)
PINNED = settings.get_profile("pinned")


def corpus_files(prefix: str = "") -> list[Path]:
    return sorted(p for p in CORPUS.glob(f"{prefix}*.gsess"))


def load(name: str):
    return parse_program((CORPUS / name).read_text())


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS
