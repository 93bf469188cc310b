"""Labeled corpora: JSONL manifests, loading and contract-level splits."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from ..errors import EmptyDataset, FormatError
from ..frontend import parse_source
from ..graph import build_mrng
from ..graph.types import Mrng

CLASSES = ("arithmetic", "reentrancy", "timestamp")
FALLBACK_NAMES = ("", "<fallback>", "fallback")


@dataclass(frozen=True)
class FunctionLabel:
    name: str
    arity: int
    label: int


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    vuln_class: str
    functions: tuple[FunctionLabel, ...]


@dataclass
class Sample:
    """One contract file: its graph plus labels aligned with ``mrng.functions``."""

    path: Path
    vuln_class: str
    mrng: Mrng
    labels: np.ndarray

    @property
    def n_functions(self) -> int:
        return len(self.labels)


def _entry(doc, where: str, base: Path) -> ManifestEntry:
    if not isinstance(doc, dict):
        raise FormatError("expected an object", where)
    path = doc.get("path")
    if not isinstance(path, str) or not path:
        raise FormatError("expected a non-empty string", where + ".path")
    vuln_class = doc.get("class")
    if vuln_class not in CLASSES:
        raise FormatError(f"class must be one of {', '.join(CLASSES)}", where + ".class")
    functions = doc.get("functions")
    if not isinstance(functions, list):
        raise FormatError("expected a list", where + ".functions")
    labels = []
    for i, f in enumerate(functions):
        fw = f"{where}.functions[{i}]"
        if not isinstance(f, dict):
            raise FormatError("expected an object", fw)
        name, arity, label = f.get("name"), f.get("arity"), f.get("label")
        if not isinstance(name, str):
            raise FormatError("expected a string", fw + ".name")
        if not isinstance(arity, int) or isinstance(arity, bool) or arity < 0:
            raise FormatError("expected a non-negative integer", fw + ".arity")
        if label not in (0, 1) or isinstance(label, bool):
            raise FormatError("expected 0 or 1", fw + ".label")
        labels.append(FunctionLabel(name, arity, label))
    resolved = Path(path) if Path(path).is_absolute() else base / path
    return ManifestEntry(resolved, vuln_class, tuple(labels))


def read_manifest(path: Union[str, Path]) -> list[ManifestEntry]:
    path = Path(path)
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"line {lineno} is not valid JSON ({exc.msg})") from exc
            entries.append(_entry(doc, f"$[line {lineno}]", path.parent))
    return entries


def _norm(name: str) -> str:
    return "" if name in FALLBACK_NAMES else name


def align_labels(entry: ManifestEntry, mrng: Mrng) -> np.ndarray:
    """Labels in graph-function order; every graph function must be labeled exactly once."""
    pool: dict[tuple[str, int], list[int]] = {}
    for f in entry.functions:
        pool.setdefault((_norm(f.name), f.arity), []).append(f.label)
    labels = []
    for g in mrng.functions:
        key = (_norm(g.name), g.arity)
        if not pool.get(key):
            raise FormatError(f"{entry.path}: no label for function {g.name or '<fallback>'}/{g.arity}")
        labels.append(pool[key].pop(0))
    extra = [f"{n or '<fallback>'}/{a}" for (n, a), rest in pool.items() for _ in rest]
    if extra:
        raise FormatError(f"{entry.path}: labeled functions not found in source: {', '.join(extra)}")
    return np.array(labels, dtype=np.float64)


def load_sample(entry: ManifestEntry) -> Sample:
    mrng = build_mrng(parse_source(entry.path.read_bytes(), str(entry.path)), contract=entry.path.stem)
    return Sample(entry.path, entry.vuln_class, mrng, align_labels(entry, mrng))


def load_dataset(manifest: Union[str, Path]) -> list[Sample]:
    return [load_sample(e) for e in read_manifest(manifest)]


def split_dataset(
    samples: Sequence, ratios: Sequence[float] = (0.8, 0.1, 0.1), seed: int = 0
) -> tuple[list, list, list]:
    """Seeded contract-level split; validation and test get floor(ratio*n), train the remainder."""
    if len(ratios) != 3 or any(r < 0 for r in ratios) or not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise ValueError(f"ratios must be three non-negative numbers summing to 1, got {tuple(ratios)}")
    n = len(samples)
    if n == 0:
        raise EmptyDataset("cannot split an empty dataset")
    n_val = math.floor(ratios[1] * n + 1e-9)
    n_test = math.floor(ratios[2] * n + 1e-9)
    order = np.random.default_rng(seed).permutation(n)
    n_train = n - n_val - n_test
    pick = lambda idx: [samples[i] for i in idx]  # noqa: E731
    return pick(order[:n_train]), pick(order[n_train : n_train + n_val]), pick(order[n_train + n_val :])
