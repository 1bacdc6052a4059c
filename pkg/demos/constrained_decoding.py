"""Restricted vs unrestricted beam search on a five-triple corpus.

A bigram model trained on the corpus happily glues the head of one triple to
the tail of another. Masking every step with the prefix trie keeps the beam
inside the set of known triples, and a weight table over triples makes the
ranking predictable.
"""

from relgen import (
    BigramScorer,
    DecoderConfig,
    ImageContext,
    TripleWeightScorer,
    beam_search,
    build_vocab,
    validate_sequence,
)
from relgen.corpus import build_corpus
from relgen.decoder import UNRESTRICTED
from relgen.trie import trie_from_corpus

corpus = build_corpus([
    ("person", "holding", "umbrella"),
    ("person", "riding", "horse"),
    ("dog", "chasing", "frisbee"),
    ("man", "holding", "baseball bat"),
    ("person", "on", "beach"),  # excluded relation, dropped at load time
])
vocab = build_vocab(corpus)
trie = trie_from_corpus(corpus, vocab)
print(f"{len(corpus.triples)} triples kept, {corpus.dropped} dropped, vocab of {len(vocab)}")

ctx = ImageContext("beach_042")
bigram = BigramScorer([vocab.tokenize(t) for t in corpus.texts()], len(vocab))


def show(title, results):
    print(f"\n{title}")
    for s in results:
        text = vocab.detokenize(s.tokens) or "<empty>"
        tag = "ok " if validate_sequence(trie, s.tokens) else "OFF"
        print(f"  [{tag}] p={s.prob:.4f}  {text}")


show("bigram, unrestricted", beam_search(bigram, ctx, trie, DecoderConfig(beam_width=5, mode=UNRESTRICTED)))
show("bigram, restricted", beam_search(bigram, ctx, trie, DecoderConfig(beam_width=5)))

# P(triple) = w_t / sum(w); beam width >= |language| recovers the exact ranking
weights = {"beach_042": {0: 5.0, 1: 3.0, 2: 1.0, 3: 1.0}}
tws = TripleWeightScorer(trie, len(vocab), weights)
show("triple weights 5:3:1:1, restricted", beam_search(tws, ctx, trie, DecoderConfig(beam_width=4)))
