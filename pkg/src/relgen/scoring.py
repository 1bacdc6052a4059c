"""Next-token scorers.

A scorer maps (context, prefix) to a length-V vector of log-probabilities.
Decoders only ever call ``score_next``; they never look inside a scorer.
Impossible tokens carry ``IMPOSSIBLE`` (-inf), which saturates under
addition.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Protocol, Sequence

import numpy as np

from relgen.tokenizer import BOS, EOS
from relgen.trie import PrefixTrie

IMPOSSIBLE = float("-inf")


@dataclass(frozen=True)
class ImageContext:
    image_id: str
    subject: int = 1
    object: int = 2
    tags: tuple[str, ...] = ()
    # highlighted model input; the deterministic scorers below ignore pixels
    image: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.subject == self.object:
            raise ValueError("subject and object must differ")


class Scorer(Protocol):
    vocab_size: int

    def score_next(self, ctx: ImageContext, prefix: Sequence[int]) -> np.ndarray: ...


def logsumexp(logprobs: np.ndarray) -> float:
    finite = logprobs[np.isfinite(logprobs)]
    if finite.size == 0:
        return IMPOSSIBLE
    top = finite.max()
    return float(top + np.log(np.exp(finite - top).sum()))


def is_normalized(logprobs: np.ndarray, tol: float = 1e-6) -> bool:
    if np.any(logprobs > 0):
        return False
    return abs(float(np.exp(logprobs).sum()) - 1.0) <= tol


class UniformScorer:
    def __init__(self, vocab_size: int):
        self.vocab_size = vocab_size
        self._row = np.full(vocab_size, -math.log(vocab_size))
        self._row.flags.writeable = False

    def score_next(self, ctx, prefix):
        return self._row


def pair_key(image_id: str, subject: int, obj: int) -> str:
    return f"{image_id}|{subject}|{obj}"


class TripleWeightScorer:
    """Analytic scorer whose sequence probabilities are known in closed form.

    With weights ``w`` over triples, the next-token probability of ``x`` after
    ``prefix`` is the weight of triples continuing with ``x`` divided by the
    weight of triples sharing ``prefix``; EOS gets the weight of triples ending
    exactly at ``prefix``. The product along a triple's path telescopes to
    ``w_t / sum(w)``.

    ``weights`` maps a key to {triple_id: weight}. Keys are image ids, or
    ``"image|subject|object"`` for pair-specific weights; lookup tries the
    pair key, then the image id, then falls back to uniform weights.
    """

    def __init__(self, trie: PrefixTrie, vocab_size: int, weights: Mapping[str, Mapping[int, float]] | None = None):
        self.trie = trie
        self.vocab_size = vocab_size
        self.num_triples = len(trie)
        self._paths = {tid: seq for seq, tid in trie.sequences()}
        self._subtree: dict[str, np.ndarray] = {}
        for key, table in (weights or {}).items():
            self._subtree[str(key)] = self._subtree_weights(table)
        self._uniform = self._subtree_weights({tid: 1.0 for tid in self._paths})

    def _subtree_weights(self, table: Mapping[int, float]) -> np.ndarray:
        # node index -> total weight of triples in its subtree, plus per-node terminal weight
        below = np.zeros(len(self.trie.nodes))
        ending = np.zeros(len(self.trie.nodes))
        for tid, w in table.items():
            tid = int(tid)
            if tid not in self._paths:
                raise KeyError(f"unknown triple id {tid}")
            w = float(w)
            if not w > 0 or not math.isfinite(w):
                raise ValueError(f"triple weights must be positive, got {w} for {tid}")
            node = self.trie.root
            below[node.index] += w
            for tok in self._paths[tid]:
                node = node.children[tok]
                below[node.index] += w
            ending[node.index] += w
        return np.stack([below, ending])

    def weights_for(self, ctx: ImageContext) -> np.ndarray:
        table = self._subtree.get(pair_key(ctx.image_id, ctx.subject, ctx.object))
        if table is None:
            table = self._subtree.get(ctx.image_id, self._uniform)
        return table

    def score_next(self, ctx, prefix):
        below, ending = self.weights_for(ctx)
        out = np.full(self.vocab_size, IMPOSSIBLE)
        node = self.trie.find(prefix)
        if node is None or below[node.index] == 0:
            # outside the weighted language: stop immediately
            out[EOS] = 0.0
            return out
        total = below[node.index]
        for tok, child in node.children.items():
            w = below[child.index]
            if w > 0:
                out[tok] = math.log(w / total)
        if ending[node.index] > 0:
            out[EOS] = math.log(ending[node.index] / total)
        return out

    def sequence_logprob(self, ctx: ImageContext, triple_id: int) -> float:
        """Closed form log(w_t / sum(w))."""
        below, ending = self.weights_for(ctx)
        node = self.trie.find(self._paths[triple_id])
        w = ending[node.index]
        return math.log(w / below[0]) if w > 0 else IMPOSSIBLE


def load_weights(path) -> dict[str, dict[int, float]]:
    """Read ``weights.json``: {"key": {"triple_id": weight}}."""
    data = json.loads(Path(path).read_text())
    return {str(k): {int(t): float(w) for t, w in v.items()} for k, v in data.items()}


class BigramScorer:
    """Additively smoothed bigram model over corpus sequences framed BOS ... EOS.

    Ignores the image context entirely, so decoding with it unrestricted
    chains words across triples.
    """

    def __init__(self, sequences: Sequence[Sequence[int]], vocab_size: int, alpha: float = 0.1):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        if not sequences:
            raise ValueError("empty corpus")
        self.vocab_size = vocab_size
        self.alpha = alpha
        counts = np.zeros((vocab_size, vocab_size))
        for seq in sequences:
            framed = [BOS, *seq, EOS]
            for prev, nxt in zip(framed, framed[1:]):
                counts[prev, nxt] += 1
        self.counts = counts
        probs = (counts + alpha) / (counts.sum(axis=1, keepdims=True) + alpha * vocab_size)
        self._table = np.log(probs)
        self._table.flags.writeable = False

    def prob(self, prev: int, nxt: int) -> float:
        return float(np.exp(self._table[prev, nxt]))

    def score_next(self, ctx, prefix):
        prev = prefix[-1] if len(prefix) else BOS
        return self._table[prev]
