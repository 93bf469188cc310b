"""``mrn-ckpt/1``: a zip holding ``meta.json`` plus one ``.npy`` per parameter."""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import FormatError, VersionError
from ..graph.vocab import Vocabulary
from ..tensor import Tensor
from .config import ModelConfig
from .network import MrnGcn

CKPT_FORMAT = "mrn-ckpt/1"


@dataclass
class ModelCheckpoint:
    model: MrnGcn
    metadata: dict = field(default_factory=dict)

    @property
    def config(self) -> ModelConfig:
        return self.model.config

    @property
    def vocab(self) -> Vocabulary:
        return self.model.vocab

    def parameter_names(self) -> list[str]:
        return list(self.model.params)


def save_checkpoint(ckpt: ModelCheckpoint, path: Union[str, Path]) -> None:
    meta = {
        "format": CKPT_FORMAT,
        "config": ckpt.config.to_json(),
        "vocab": ckpt.vocab.to_json(),
        "parameters": ckpt.parameter_names(),
        "metadata": ckpt.metadata,
    }
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("meta.json", json.dumps(meta, sort_keys=True, indent=1))
        for name, tensor in ckpt.model.params.items():
            buf = io.BytesIO()
            np.save(buf, tensor.data, allow_pickle=False)
            zf.writestr(f"params/{name}.npy", buf.getvalue())


def load_checkpoint(path: Union[str, Path]) -> ModelCheckpoint:
    if not Path(path).is_file():
        raise FileNotFoundError(f"no checkpoint at {path}")
    try:
        with zipfile.ZipFile(path) as zf:
            try:
                meta = json.loads(zf.read("meta.json"))
            except KeyError:
                raise FormatError("missing meta.json") from None
            if not isinstance(meta, dict):
                raise FormatError("meta.json must hold an object")
            tag = meta.get("format")
            if tag != CKPT_FORMAT:
                raise VersionError(f"unsupported checkpoint format {tag!r}", "$.format")
            try:
                config = ModelConfig.from_json(meta["config"])
                vocab = Vocabulary.from_json(meta["vocab"])
                names = list(meta["parameters"])
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"malformed metadata ({exc})") from exc
            params = {}
            for name in names:
                try:
                    data = np.load(io.BytesIO(zf.read(f"params/{name}.npy")), allow_pickle=False)
                except KeyError:
                    raise FormatError(f"missing parameter {name}", "$.parameters") from None
                params[name] = Tensor(data, requires_grad=True, name=name)
    except (zipfile.BadZipFile, json.JSONDecodeError, UnicodeDecodeError, ValueError, EOFError, OSError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"unreadable checkpoint ({exc})") from exc
    try:
        model = MrnGcn(config, vocab, params)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    return ModelCheckpoint(model, meta.get("metadata", {}))
