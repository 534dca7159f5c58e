import sys
from pathlib import Path

import pytest

from substruct.syntax import parse_program

TESTS = Path(__file__).resolve().parent
ROOT = TESTS.parent
CORPUS = ROOT / "corpus"

sys.path.insert(0, str(TESTS))


def load(name: str):
    return parse_program((CORPUS / name).read_text())


@pytest.fixture(scope="session")
def corpus():
    """All positive corpus programs, keyed by file name."""
    return {p.name: parse_program(p.read_text()) for p in sorted(CORPUS.glob("*.ord"))}
