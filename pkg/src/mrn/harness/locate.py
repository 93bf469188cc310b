"""Per-function verdicts for a single source file."""

from __future__ import annotations

from pathlib import Path
from typing import Union

from ..frontend import parse_source
from ..graph import build_mrng
from ..model import ModelCheckpoint

EXIT_CLEAN = 0
EXIT_ERROR = 1
EXIT_FINDINGS = 2


def locate(path: Union[str, Path], checkpoint: ModelCheckpoint, threshold: float = 0.5) -> dict:
    path = Path(path)
    mrng = build_mrng(parse_source(path.read_bytes(), str(path)), contract=path.stem)
    probs = checkpoint.model.forward(mrng).data if mrng.functions else []
    functions = []
    for g, p in zip(mrng.functions, probs):
        line, col, end_line, end_col = g.span or (0, 0, 0, 0)
        functions.append(
            {
                "name": g.name or "<fallback>",
                "arity": g.arity,
                "span": {"start_line": line, "start_col": col, "end_line": end_line, "end_col": end_col},
                "probability": float(p),
                "verdict": bool(p >= threshold),
            }
        )
    return {
        "path": str(path),
        "class": checkpoint.metadata.get("class"),
        "threshold": threshold,
        "functions": functions,
    }


def exit_code(report: dict) -> int:
    return EXIT_FINDINGS if any(f["verdict"] for f in report["functions"]) else EXIT_CLEAN
