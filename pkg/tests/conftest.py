import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from osb.corpus import CorpusSpec, default_corpus, generate_corpus


@pytest.fixture(scope="session")
def corpus():
    """The full default corpus used by the acceptance criteria."""
    return default_corpus()


@pytest.fixture(scope="session")
def small_corpus():
    """A reduced corpus for unit-level campaign checks."""
    cells = ((1, 1), (2, 2), (2, 3), (3, 2), (3, 3))
    return generate_corpus(
        [
            CorpusSpec(cells=cells, matrices_per_cell=4, distribution="uniform", seed=77),
            CorpusSpec(cells=cells, matrices_per_cell=2, distribution="integer", seed=77),
            CorpusSpec(cells=cells, matrices_per_cell=2, distribution="sparse", seed=77),
        ],
        seed=77,
    )
