import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bitextmine.langstat import train_langid  # noqa: E402
from bitextmine.model import Lexicon  # noqa: E402
from bitextmine.synthetic import ToyLanguage  # noqa: E402

REPO = Path(__file__).resolve().parent.parent
FIXTURE_DIR = REPO / "fixtures" / "synthetic"


@pytest.fixture(scope="session")
def toy():
    return ToyLanguage.build(seed=7, n_entries=300)


@pytest.fixture(scope="session")
def toy_lexicon(toy):
    return Lexicon((en, ja, 1.0) for en, senses in toy.words for ja in senses)


def generator(toy, seed):
    """Fresh random stream over the shared toy vocabulary, independent of fixture order."""
    return ToyLanguage(np.random.default_rng(seed), toy.words)


@pytest.fixture(scope="session")
def toy_langid(toy):
    gen = generator(toy, 13)
    samples = []
    for _ in range(150):
        en, _, ja = gen.sentence_pair()
        samples += [("en", en), ("ja", ja)]
    return train_langid(samples)


@pytest.fixture(scope="session")
def toy_pairs(toy):
    """400 (en, ja-as-written, ja-normalized) parallel sentences."""
    gen = generator(toy, 11)
    return [gen.sentence_pair() for _ in range(400)]


def as_sentence_pairs(triples, host="www.toy.example"):
    from bitextmine.model import SentencePair

    return [SentencePair(f"http://{host}/en/{k}", f"http://{host}/ja/{k}", en, ja, 1.0, 1.0)
            for k, (en, _, ja) in enumerate(triples)]


@pytest.fixture(scope="session")
def trained_filter(toy_pairs, toy_lexicon, toy_langid):
    """Filter model trained on the first 300 toy pairs; the last 100 are held out."""
    from bitextmine.filtering import train_filter

    return train_filter(as_sentence_pairs(toy_pairs[:300]), 5, toy_lexicon, toy_langid)
