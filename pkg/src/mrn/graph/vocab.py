"""Token and edge-subtype vocabularies feeding the embedding tables."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from ..errors import EmptyCorpus
from .types import UNK_EDGE, Mrng, all_edge_keys

UNK = "<unk>"
PAD = "<pad>"


def _ordered(counts: Counter, candidates: Iterable[str]) -> list[str]:
    return sorted(candidates, key=lambda t: (-counts[t], t))


@dataclass(frozen=True)
class Vocabulary:
    """Frozen token->id maps. Node ids 0/1 are UNK/PAD; edge id 0 is UNK_EDGE."""

    node_tokens: dict[str, int]
    edge_subtypes: dict[str, int]
    min_frequency: int = 1

    def node_id(self, label: str) -> int:
        return self.node_tokens.get(label, 0)

    def edge_id(self, key: str) -> int:
        return self.edge_subtypes.get(key, 0)

    @property
    def n_nodes(self) -> int:
        return len(self.node_tokens)

    @property
    def n_edges(self) -> int:
        return len(self.edge_subtypes)

    def to_json(self) -> dict:
        return {
            "min_frequency": self.min_frequency,
            "node_tokens": sorted(self.node_tokens, key=self.node_tokens.__getitem__),
            "edge_subtypes": sorted(self.edge_subtypes, key=self.edge_subtypes.__getitem__),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Vocabulary":
        return cls(
            {t: i for i, t in enumerate(doc["node_tokens"])},
            {t: i for i, t in enumerate(doc["edge_subtypes"])},
            int(doc["min_frequency"]),
        )


def build_vocabulary(corpus: Iterable[Mrng], min_frequency: int = 1) -> Vocabulary:
    corpus = list(corpus)
    if not corpus:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    node_counts: Counter = Counter()
    edge_counts: Counter = Counter()
    for mrng in corpus:
        for g in mrng.functions:
            node_counts.update(g.labels)
            edge_counts.update(e.key for e in g.edges)
    kept = [t for t, c in node_counts.items() if c >= min_frequency and t not in (UNK, PAD)]
    node_tokens = {UNK: 0, PAD: 1}
    for tok in _ordered(node_counts, kept):
        node_tokens[tok] = len(node_tokens)
    edge_subtypes = {UNK_EDGE: 0}
    for key in _ordered(edge_counts, all_edge_keys()):
        edge_subtypes[key] = len(edge_subtypes)
    return Vocabulary(node_tokens, edge_subtypes, min_frequency)
