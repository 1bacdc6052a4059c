"""Token-id prefix tree over every corpus triple.

``allowed_next`` is the candidate-set function used to mask decoding; each
terminal node carries the triple id so a finished sequence maps straight
back to its triple without re-parsing text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from relgen.tokenizer import EOS, Vocabulary


class OffTrieError(KeyError):
    def __str__(self):
        return f"off-trie prefix {list(self.args[0])}"


class NotTerminalError(KeyError):
    def __str__(self):
        return f"sequence {list(self.args[0])} is not a complete triple"


@dataclass
class TrieNode:
    index: int
    children: dict = field(default_factory=dict)
    triple_id: int | None = None


class PrefixTrie:
    def __init__(self):
        self.nodes: list[TrieNode] = [TrieNode(0)]
        self.num_terminals = 0
        self.max_depth = 0

    @property
    def root(self) -> TrieNode:
        return self.nodes[0]

    def __len__(self):
        return self.num_terminals

    def insert(self, seq: Sequence[int], triple_id: int) -> None:
        if not seq:
            raise ValueError("cannot insert an empty sequence")
        node = self.root
        for tok in seq:
            if tok == EOS:
                raise ValueError("EOS inside a trie sequence")
            child = node.children.get(tok)
            if child is None:
                child = TrieNode(len(self.nodes))
                self.nodes.append(child)
                node.children[tok] = child
            node = child
        if node.triple_id is not None:
            if node.triple_id != triple_id:
                raise ValueError(
                    f"ambiguous corpus: sequence {list(seq)} maps to triples "
                    f"{node.triple_id} and {triple_id}"
                )
            return
        node.triple_id = triple_id
        self.num_terminals += 1
        self.max_depth = max(self.max_depth, len(seq))

    def find(self, prefix: Sequence[int]) -> TrieNode | None:
        node = self.root
        for tok in prefix:
            node = node.children.get(tok)
            if node is None:
                return None
        return node

    def allowed_next(self, prefix: Sequence[int]) -> frozenset:
        node = self.find(prefix)
        if node is None:
            raise OffTrieError(tuple(prefix))
        allowed = set(node.children)
        if node.triple_id is not None:
            allowed.add(EOS)
        return frozenset(allowed)

    def resolve(self, seq: Sequence[int]) -> int:
        node = self.find(seq)
        if node is None or node.triple_id is None:
            raise NotTerminalError(tuple(seq))
        return node.triple_id

    def is_terminal(self, seq: Sequence[int]) -> bool:
        node = self.find(seq)
        return node is not None and node.triple_id is not None

    def sequences(self) -> Iterator[tuple[tuple[int, ...], int]]:
        """Yield every (root-to-terminal path, triple_id), ascending token order."""
        stack = [(self.root, ())]
        while stack:
            node, path = stack.pop()
            if node.triple_id is not None:
                yield path, node.triple_id
            for tok in sorted(node.children, reverse=True):
                stack.append((node.children[tok], path + (tok,)))

    def dump(self, vocab: Vocabulary | None = None) -> dict:
        """JSON adjacency form: one entry per node, edges keyed by token."""
        nodes = []
        for node in self.nodes:
            edges = {}
            for tok in sorted(node.children):
                key = vocab.tokens[tok] if vocab is not None else str(tok)
                edges[key] = node.children[tok].index
            nodes.append({"id": node.index, "triple_id": node.triple_id, "children": edges})
        return {"num_nodes": len(self.nodes), "num_terminals": self.num_terminals, "nodes": nodes}

    def dumps(self, vocab: Vocabulary | None = None) -> str:
        return json.dumps(self.dump(vocab), indent=1)


def build_trie(sequences: Iterable[tuple[Sequence[int], int]]) -> PrefixTrie:
    """Insert (token sequence, triple_id) pairs one by one."""
    trie = PrefixTrie()
    for seq, triple_id in sequences:
        trie.insert(seq, triple_id)
    return trie


def trie_from_corpus(corpus, vocab: Vocabulary) -> PrefixTrie:
    return build_trie(
        (vocab.tokenize(corpus.text(t)), t.triple_id) for t in corpus.triples
    )


def validate_sequence(trie: PrefixTrie, seq: Sequence[int]) -> bool:
    """True iff ``seq`` spells a complete corpus triple."""
    return trie.is_terminal(seq)
