import random

import pytest

from conftest import random_corpus
from relgen.corpus import CorpusError, build_corpus
from relgen.tokenizer import UnknownWordError, Vocabulary, build_vocab


def test_three_word_vocab():
    vocab = build_vocab(build_corpus([("person", "holding", "skateboard")]))
    assert vocab.tokens == ("<bos>", "<eos>", "person", "holding", "skateboard")
    assert len(vocab) == 5


def test_multiword_relation_splits():
    vocab = build_vocab(build_corpus([("train", "driving on", "water")]))
    assert "driving" in vocab.tokens and "on" in vocab.tokens
    assert vocab.tokenize("train driving on water") == (2, 3, 4, 5)


def test_empty_corpus():
    with pytest.raises(CorpusError, match="empty corpus"):
        build_vocab(build_corpus([]))


def test_round_trip_lookup():
    vocab = build_vocab(build_corpus([("person", "holding", "skateboard")]))
    seq = vocab.tokenize("person holding skateboard")
    assert seq == (2, 3, 4)
    assert vocab.detokenize(seq) == "person holding skateboard"


def test_empty_text():
    vocab = build_vocab(build_corpus([("person", "holding", "skateboard")]))
    assert vocab.tokenize("") == ()
    assert vocab.detokenize(()) == ""


def test_unknown_word():
    vocab = build_vocab(build_corpus([("person", "holding", "skateboard")]))
    with pytest.raises(UnknownWordError, match="flying"):
        vocab.tokenize("person flying")


def test_framing_tokens_not_words():
    vocab = build_vocab(build_corpus([("person", "holding", "skateboard")]))
    with pytest.raises(UnknownWordError):
        vocab.tokenize("<bos> person")


def test_canonical_spacing():
    vocab = build_vocab(build_corpus([("person", "holding", "skateboard")]))
    assert vocab.detokenize(vocab.tokenize("  person   holding skateboard ")) == "person holding skateboard"


@pytest.mark.parametrize("seed", range(30))
def test_round_trip_and_determinism(seed):
    corpus = random_corpus(random.Random(seed))
    vocab = build_vocab(corpus)
    for text in corpus.texts():
        assert vocab.detokenize(vocab.tokenize(text)) == text
    assert build_vocab(corpus).to_json() == vocab.to_json()
    assert Vocabulary.from_json(vocab.to_json()) == vocab
