"""Multi-relational function graphs (MRFG) and nested contract graphs (MRNG)."""

from .builder import PrunedNode, build_mrfg, prune_ast
from .io import GRAPH_FORMAT, deserialize_graph, serialize_graph, to_dot
from .nested import build_mrng, call_index_pairs, extract_call_edges
from .types import UNK_EDGE, Edge, Mrfg, Mrng
from .vocab import Vocabulary, build_vocabulary

__all__ = [
    "GRAPH_FORMAT",
    "UNK_EDGE",
    "Edge",
    "Mrfg",
    "Mrng",
    "PrunedNode",
    "Vocabulary",
    "build_mrfg",
    "build_mrng",
    "build_vocabulary",
    "call_index_pairs",
    "deserialize_graph",
    "extract_call_edges",
    "prune_ast",
    "serialize_graph",
    "to_dot",
]
