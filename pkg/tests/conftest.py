from pathlib import Path

import pytest

from paradigmfill import parse_document
from paradigmfill.lexicon import load_morph_classes, load_variants

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def appendix_text() -> str:
    return (FIXTURES / "appendix_sample.igt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def figure_text() -> str:
    return (FIXTURES / "figure_examples.igt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def wa_text() -> str:
    return (FIXTURES / "wa_corpus.igt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def wa_corpus(wa_text):
    return parse_document(wa_text)


@pytest.fixture(scope="session")
def morph_lex():
    return load_morph_classes(FIXTURES / "morph_classes.tsv")


@pytest.fixture(scope="session")
def registry():
    return load_variants(FIXTURES / "variants.tsv")
