import json
import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relgen.corpus import build_corpus
from relgen.synth import generate
from relgen.tokenizer import build_vocab
from relgen.trie import trie_from_corpus

DATA = Path(__file__).parent / "data"


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    return path


@pytest.fixture
def small_corpus():
    return build_corpus([
        ("person", "holding", "skateboard"),
        ("person", "holding", "pizza"),
        ("dog", "holding", "frisbee"),
        ("train", "driving on", "road"),
    ])


@pytest.fixture
def small_lang(small_corpus):
    vocab = build_vocab(small_corpus)
    return small_corpus, vocab, trie_from_corpus(small_corpus, vocab)


@pytest.fixture(scope="session")
def synth42(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth42")
    generate(out, seed=42)
    return out


WORDS = ["a", "b", "c", "d", "e", "f"]


def random_corpus(rng: random.Random, max_triples=12, multiword=True):
    """Random (head, relation, tail) name triples over a small word pool."""
    objects = ["o" + w for w in WORDS[: rng.randint(2, 6)]]
    if multiword and rng.random() < 0.5:
        objects.append("big " + objects[0])
    relations = ["r" + w for w in WORDS[: rng.randint(1, 4)]]
    if multiword and rng.random() < 0.5:
        relations.append("near " + relations[0])
    lines = []
    for _ in range(rng.randint(1, max_triples)):
        lines.append((rng.choice(objects), rng.choice(relations), rng.choice(objects)))
    return build_corpus(lines)
