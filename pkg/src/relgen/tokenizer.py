"""Closed-vocabulary word tokenizer for triple texts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from relgen.corpus import Corpus, CorpusError

BOS = 0
EOS = 1
BOS_TOKEN = "<bos>"
EOS_TOKEN = "<eos>"


class UnknownWordError(KeyError):
    def __str__(self):
        return f"unknown word {self.args[0]!r}"


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.tokens[:2] != (BOS_TOKEN, EOS_TOKEN):
            raise ValueError("vocabulary must start with <bos>, <eos>")
        if len(self.tokens) < 3:
            raise ValueError("vocabulary needs at least one word")
        index = {t: i for i, t in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ValueError("duplicate token in vocabulary")
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.tokens)

    def tokenize(self, text: str) -> tuple[int, ...]:
        ids = []
        for word in text.lower().split():
            idx = self._index.get(word)
            if idx is None or idx in (BOS, EOS):
                raise UnknownWordError(word)
            ids.append(idx)
        return tuple(ids)

    def detokenize(self, seq: Sequence[int]) -> str:
        words = []
        for idx in seq:
            if idx in (BOS, EOS):
                raise ValueError("framing token inside a token sequence")
            words.append(self.tokens[idx])
        return " ".join(words)

    def to_json(self) -> str:
        return json.dumps(list(self.tokens))

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        return cls(tuple(json.loads(text)))


def vocab_from_texts(texts: Iterable[str]) -> Vocabulary:
    tokens = [BOS_TOKEN, EOS_TOKEN]
    seen = set(tokens)
    for text in texts:
        for word in text.lower().split():
            if word not in seen:
                seen.add(word)
                tokens.append(word)
    if len(tokens) == 2:
        raise CorpusError("empty corpus")
    return Vocabulary(tuple(tokens))


def build_vocab(corpus: Corpus) -> Vocabulary:
    """BOS, EOS, then every word of every triple text in first-seen order."""
    return vocab_from_texts(corpus.texts())


def tokenize(text: str, vocab: Vocabulary) -> tuple[int, ...]:
    return vocab.tokenize(text)


def detokenize(seq: Sequence[int], vocab: Vocabulary) -> str:
    return vocab.detokenize(seq)
