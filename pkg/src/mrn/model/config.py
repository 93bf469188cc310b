"""Hyperparameters of the network."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class ModelConfig:
    f_hidden: int = 64
    p: int = 8
    layers: int = 16
    heads: int = 4
    k_prime: int = 16
    c0: int = 128
    nested_layers: int = 2
    nested_width: int = 128
    conv_kernel: int = 5
    conv_filters: int = 8
    dropout: float = 0.2
    leaky_slope: float = 0.2
    eps: float = 1e-9
    seed: int = 0
    no_self_attention: bool = False
    no_nested: bool = False

    def __post_init__(self):
        for name in ("f_hidden", "p", "layers", "heads", "k_prime", "c0", "nested_width", "conv_kernel", "conv_filters"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.nested_layers < 0:
            raise ValueError("nested_layers must be non-negative")
        if self.f_hidden % self.p:
            raise ValueError(f"f_hidden ({self.f_hidden}) must be divisible by p ({self.p})")
        if self.f_hidden % self.heads:
            raise ValueError(f"f_hidden ({self.f_hidden}) must be divisible by heads ({self.heads})")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.classifier_width < self.conv_kernel:
            raise ValueError("classifier input narrower than the convolution kernel")

    @property
    def d_k(self) -> int:
        return self.f_hidden // self.heads

    @property
    def classifier_width(self) -> int:
        if self.no_nested or self.nested_layers == 0:
            return self.c0
        return self.nested_width

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in doc.items() if k in known})
