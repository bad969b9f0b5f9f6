"""Minimal reverse-mode differentiation, layers, and optimizer."""

from .gradcheck import GradCheckError, grad_check
from .kernels import backend_name
from .layers import (
    MLP,
    BiGRU,
    Embedding,
    Linear,
    SequenceEncoder,
    VocabularyError,
    pad_batch,
    sequence_encode,
)
from .optim import AdamState, GradientError, adam_step
from .params import CheckpointError, ParamStore, deserialize, serialize
from .tape import DiffkitError, Node, ShapeError, Tape

__all__ = [
    "AdamState",
    "BiGRU",
    "CheckpointError",
    "DiffkitError",
    "Embedding",
    "GradCheckError",
    "GradientError",
    "Linear",
    "MLP",
    "Node",
    "ParamStore",
    "SequenceEncoder",
    "ShapeError",
    "Tape",
    "VocabularyError",
    "adam_step",
    "backend_name",
    "deserialize",
    "grad_check",
    "pad_batch",
    "sequence_encode",
    "serialize",
]
