"""Minimal deterministic neural-network engine for the trace classifier."""

from .adam import AdamState, adam_step
from .batch import (
    BatchCache,
    DropoutMasks,
    batch_backward,
    batch_forward,
    batch_loss,
    batch_loss_and_grads,
    make_dropout_masks,
    pad_batch,
)
from .init import as_rng, embedding_uniform, glorot_uniform
from .layers import (
    BCE_EPSILON,
    AttentionParams,
    LstmParams,
    attention_forward,
    bce_loss,
    dense_sigmoid_forward,
    lstm_cell_forward,
    lstm_sequence_forward,
    sigmoid,
)
from .network import (
    ModelParams,
    TraceCache,
    backward_trace,
    forward_trace,
    forward_trace_with_cache,
    trace_loss,
    zero_gradients,
)

__all__ = [
    "AdamState",
    "AttentionParams",
    "BCE_EPSILON",
    "BatchCache",
    "DropoutMasks",
    "LstmParams",
    "ModelParams",
    "TraceCache",
    "adam_step",
    "as_rng",
    "attention_forward",
    "backward_trace",
    "batch_backward",
    "batch_forward",
    "batch_loss",
    "batch_loss_and_grads",
    "bce_loss",
    "dense_sigmoid_forward",
    "embedding_uniform",
    "forward_trace",
    "forward_trace_with_cache",
    "glorot_uniform",
    "lstm_cell_forward",
    "lstm_sequence_forward",
    "make_dropout_masks",
    "pad_batch",
    "sigmoid",
    "trace_loss",
    "zero_gradients",
]
