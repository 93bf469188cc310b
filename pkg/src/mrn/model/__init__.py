"""The MRN-GCN network and its checkpoint format."""

from .checkpoint import CKPT_FORMAT, ModelCheckpoint, load_checkpoint, save_checkpoint
from .config import ModelConfig
from .layers import (
    FeaturedContractGraph,
    build_fcg,
    classify_functions,
    compute_loss,
    eegcn_layer,
    embed_graph,
    fuse_layers,
    nested_gcn_layer,
    positional_encoding,
    prepare_graph,
    sort_pool,
)
from .network import MrnGcn, init_parameters, model_forward, parameter_shapes

__all__ = [
    "CKPT_FORMAT",
    "ModelCheckpoint",
    "load_checkpoint",
    "save_checkpoint",
    "FeaturedContractGraph",
    "ModelConfig",
    "MrnGcn",
    "build_fcg",
    "classify_functions",
    "compute_loss",
    "eegcn_layer",
    "embed_graph",
    "fuse_layers",
    "init_parameters",
    "model_forward",
    "nested_gcn_layer",
    "parameter_shapes",
    "positional_encoding",
    "prepare_graph",
    "sort_pool",
]
