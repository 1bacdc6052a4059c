"""Beam search and ancestral sampling under the prefix-tree constraint.

In restricted mode every expansion step keeps only the tokens the trie
allows after the current prefix. Beam scores use the scorer's raw
conditionals for the surviving tokens unless ``renormalize_after_mask`` is
set; sampling always renormalizes, since it needs a proper distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from relgen.scoring import IMPOSSIBLE, ImageContext, logsumexp
from relgen.tokenizer import BOS, EOS
from relgen.trie import PrefixTrie, validate_sequence

RESTRICTED = "restricted"
UNRESTRICTED = "unrestricted"
SAMPLE_CAP = 256
# log-probs closer than this rank as ties (then lexicographic tokens), so
# mathematically equal scores summed in different orders still tie
TIE_DIGITS = 12

__all__ = [
    "DecoderConfig",
    "ScoredSequence",
    "SampleResult",
    "UnreachableLanguageError",
    "beam_search",
    "sample_sequences",
    "validate_sequence",
]


class UnreachableLanguageError(RuntimeError):
    pass


@dataclass(frozen=True)
class DecoderConfig:
    beam_width: int = 3
    max_len: int | None = None
    mode: str = RESTRICTED
    renormalize_after_mask: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.max_len is not None and self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.mode not in (RESTRICTED, UNRESTRICTED):
            raise ValueError(f"unknown decoding mode {self.mode!r}")


@dataclass(frozen=True)
class ScoredSequence:
    tokens: tuple[int, ...]
    logprob: float
    triple_id: int | None = None

    @property
    def prob(self) -> float:
        return math.exp(self.logprob)

    def to_json(self, vocab=None) -> dict:
        out = {"tokens": list(self.tokens), "logprob": self.logprob, "triple_id": self.triple_id}
        if vocab is not None:
            out["text"] = vocab.detokenize(self.tokens)
        return out


def _rank_key(item):
    logprob, tokens = item[0], item[1]
    return (-round(logprob, TIE_DIGITS), tokens)


def _max_len(cfg: DecoderConfig, trie: PrefixTrie | None) -> int:
    if cfg.max_len is not None:
        return cfg.max_len
    if trie is None or trie.max_depth == 0:
        raise ValueError("max_len required when no trie is given")
    return trie.max_depth + 1


def _expansions(scorer, ctx, prefix, trie, cfg, max_len):
    """(token, step logprob) candidates after ``prefix``, ascending token id."""
    scores = scorer.score_next(ctx, prefix)
    if cfg.mode == RESTRICTED:
        allowed = trie.allowed_next(prefix)
        if len(prefix) >= max_len:
            allowed = allowed & {EOS}
        toks = sorted(t for t in allowed if scores[t] != IMPOSSIBLE)
        if cfg.renormalize_after_mask and toks:
            norm = logsumexp(np.asarray([scores[t] for t in toks]))
            return [(t, float(scores[t]) - norm) for t in toks]
        return [(t, float(scores[t])) for t in toks]
    return [
        (t, float(scores[t]))
        for t in range(len(scores))
        if t != BOS and scores[t] != IMPOSSIBLE
    ]


def beam_search(
    scorer,
    ctx: ImageContext,
    trie: PrefixTrie | None,
    cfg: DecoderConfig = DecoderConfig(),
) -> list[ScoredSequence]:
    """Return up to ``beam_width`` finished sequences, best first.

    Ties on log-probability break by ascending token sequence. A beam is a
    list of live prefixes; finished hypotheses are collected separately and
    the search stops once no live prefix can beat the current top-B.
    """
    restricted = cfg.mode == RESTRICTED
    if restricted and (trie is None or len(trie) == 0):
        raise UnreachableLanguageError("restricted decoding needs a nonempty trie")
    max_len = _max_len(cfg, trie)
    width = cfg.beam_width

    live: list[tuple[float, tuple[int, ...]]] = [(0.0, ())]
    finished: list[tuple[float, tuple[int, ...]]] = []
    first = True
    while live:
        candidates = []
        for logprob, prefix in live:
            if not restricted and len(prefix) >= max_len:
                finished.append((logprob, prefix))
                continue
            for tok, step in _expansions(scorer, ctx, prefix, trie, cfg, max_len):
                total = logprob + step
                if tok == EOS:
                    finished.append((total, prefix))
                else:
                    candidates.append((total, prefix + (tok,)))
        if first and restricted and not candidates and not finished:
            raise UnreachableLanguageError(
                "unreachable language: every allowed first token has zero probability"
            )
        first = False
        finished.sort(key=_rank_key)
        del finished[width:]
        candidates.sort(key=_rank_key)
        live = candidates[:width]
        # log-probs only decrease, so a full set of finished hypotheses that
        # beats every live prefix is final
        if len(finished) == width and live and _rank_key(finished[-1]) < _rank_key(live[0]):
            break

    out = []
    for logprob, tokens in finished:
        tid = trie.resolve(tokens) if restricted else None
        out.append(ScoredSequence(tokens, logprob, tid))
    return out


@dataclass(frozen=True)
class SampleResult:
    sequences: list[ScoredSequence]
    relations: list[int]
    shortfall: bool
    draws: int


def sample_sequences(
    scorer,
    ctx: ImageContext,
    trie: PrefixTrie,
    cfg: DecoderConfig,
    triple_relations: Sequence[int],
    k: int = 3,
    rng: np.random.Generator | None = None,
) -> SampleResult:
    """Draw sequences until they cover ``k`` distinct relations or the cap is hit.

    ``triple_relations[triple_id]`` is the relation id of each triple.
    Duplicates are kept; ``relations`` lists distinct relations in order of
    first appearance.
    """
    if cfg.mode != RESTRICTED:
        raise ValueError("sampling is only defined for restricted decoding")
    if k < 1:
        raise ValueError("k must be >= 1")
    if trie is None or len(trie) == 0:
        raise UnreachableLanguageError("restricted decoding needs a nonempty trie")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    max_len = _max_len(cfg, trie)
    sample_cfg = DecoderConfig(cfg.beam_width, max_len, RESTRICTED, True, cfg.seed)

    sequences: list[ScoredSequence] = []
    relations: list[int] = []
    draws = 0
    while len(relations) < k and draws < SAMPLE_CAP:
        draws += 1
        prefix: tuple[int, ...] = ()
        logprob = 0.0
        while True:
            options = _expansions(scorer, ctx, prefix, trie, sample_cfg, max_len)
            if not options:
                if not prefix:
                    raise UnreachableLanguageError(
                        "unreachable language: every allowed first token has zero probability"
                    )
                # dead end below the root: the draw is void but counts toward the cap
                prefix = None
                break
            probs = np.exp([s for _, s in options])
            pick = rng.choice(len(options), p=probs / probs.sum())
            tok, step = options[pick]
            logprob += step
            if tok == EOS:
                break
            prefix = prefix + (tok,)
        if prefix is None:
            continue
        tid = trie.resolve(prefix)
        sequences.append(ScoredSequence(prefix, logprob, tid))
        rel = triple_relations[tid]
        if rel not in relations:
            relations.append(rel)
    return SampleResult(sequences, relations, len(relations) < k, draws)
