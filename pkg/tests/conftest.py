import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
CORPUS_DIR = TESTS_DIR / "corpus"

# make sibling helper modules (oracles, diagram_gen, mutation) importable
sys.path.insert(0, str(TESTS_DIR))


def corpus_paths():
    return sorted(CORPUS_DIR.glob("*.puml"))


def load_corpus():
    """Parsed corpus diagrams as (name, Diagram) pairs."""
    from duet.plantuml import parse_plantuml

    diagrams = []
    for path in corpus_paths():
        diagram, _ = parse_plantuml(path.read_text(encoding="utf-8"))
        diagrams.append((path.name, diagram))
    return diagrams


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()
