"""Edge vocabulary and the graph containers (MRFG per function, MRNG per file)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..frontend.parser import is_elementary

DATA_TYPE = "DataType"
CONTROL = "ControlInfo"
FIELDS = "Fields"
DATA_FLOW = "DataFlow"
FALLBACK = "Fallback"
SELF_LOOP = "SelfLoop"

UNK_EDGE = "UNK_EDGE"

_SIZES = range(8, 257, 8)
DATA_TYPE_SUBTYPES = (
    ("address", "bool", "string", "bytes", "byte", "var", "uint", "int", "fixed", "ufixed")
    + tuple(f"uint{n}" for n in _SIZES)
    + tuple(f"int{n}" for n in _SIZES)
    + tuple(f"bytes{n}" for n in range(1, 33))
    + ("mapping", "array", "function", "userdefined")
)

SUBTYPES: dict[str, tuple[str, ...]] = {
    DATA_TYPE: DATA_TYPE_SUBTYPES,
    CONTROL: ("sequential", "if", "else", "while", "for", "require"),
    FIELDS: ("left", "right", "operation", "function_call", "condition", "argument", "member", "index"),
    DATA_FLOW: ("compute_from", "value_from"),
    FALLBACK: ("fallback",),
    SELF_LOOP: ("self",),
}
CATEGORIES = tuple(SUBTYPES)

ENTRY = "entry"


def edge_key(category: str, subtype: str) -> str:
    return f"{category}:{subtype}"


def all_edge_keys() -> list[str]:
    return [edge_key(c, s) for c, subs in SUBTYPES.items() for s in subs]


def is_known_subtype(category: str, subtype: str) -> bool:
    return subtype in SUBTYPES.get(category, ())


def data_type_subtype(type_text: str) -> str:
    """Map a canonical type string to its DataType edge subtype."""
    if type_text.startswith("mapping("):
        return "mapping"
    if type_text.endswith("]"):
        return "array"
    if type_text == "function":
        return "function"
    if is_elementary(type_text):
        return type_text if type_text in DATA_TYPE_SUBTYPES else UNK_EDGE
    return "userdefined"


@dataclass(frozen=True, order=True)
class Edge:
    src: int
    dst: int
    category: str
    subtype: str
    seq: Optional[int] = None

    @property
    def key(self) -> str:
        return edge_key(self.category, self.subtype)


@dataclass
class Mrfg:
    """Multi-relational graph of one function. Node 0 is always ``entry``."""

    name: str
    arity: int
    nodes: list[tuple[int, str]]
    edges: list[Edge]
    # provenance, not part of the interchange format
    ast_ids: list[Optional[int]] = field(default_factory=list, compare=False, repr=False)
    span: Optional[tuple[int, int, int, int]] = field(default=None, compare=False, repr=False)
    contract: str = field(default="", compare=False, repr=False)

    @property
    def labels(self) -> list[str]:
        return [label for _, label in self.nodes]

    def __len__(self) -> int:
        return len(self.nodes)

    def edges_of(self, category: str, subtype: Optional[str] = None) -> list[Edge]:
        return [e for e in self.edges if e.category == category and (subtype is None or e.subtype == subtype)]


@dataclass
class Mrng:
    """Nested contract graph: one MRFG per function plus invocation edges."""

    contract: str
    functions: list[Mrfg]
    calls: list[tuple[int, int]]
    warnings: list[str] = field(default_factory=list, compare=False, repr=False)
