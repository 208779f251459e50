"""The full trace classifier as a pure function of its parameters.

A trace of 1-based action indices is embedded, run through the LSTM, pooled
by attention, and mapped to one sigmoid unit per fluent. Index 0 is the
padding token: its embedding row is pinned to zero and padded positions are
excluded from attention, so appending padding to a trace leaves the output
bitwise unchanged.

The backward pass is hand-derived for this fixed architecture; it returns a
gradient for every trainable tensor, keyed like ``ModelParams.tensors()``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import (
    EmptyInputError,
    InvalidStateError,
    OutOfVocabularyError,
    ShapeError,
)
from .init import as_rng, embedding_uniform, glorot_uniform
from .layers import (
    BCE_EPSILON,
    AttentionCache,
    AttentionParams,
    LstmParams,
    LstmSequenceCache,
    attention_forward,
    bce_loss,
    dense_sigmoid_forward,
    lstm_sequence_forward,
)


@dataclass
class ModelParams:
    """All trainable tensors of the classifier.

    ``embedding`` has one row per action plus the padding row 0, which stays
    zero through initialisation and every update.
    """

    embedding: np.ndarray  # (n_actions + 1, embedding_dim)
    lstm: LstmParams
    attention: AttentionParams
    out_w: np.ndarray  # (hidden, n_fluents)
    out_b: np.ndarray  # (n_fluents,)

    @classmethod
    def create(
        cls,
        n_actions: int,
        n_fluents: int,
        embedding_dim: int,
        hidden_size: int,
        rng,
    ) -> "ModelParams":
        """Initialise a model; the rng draw order is fixed for reproducibility."""
        rng = as_rng(rng)
        embedding = embedding_uniform(n_actions + 1, embedding_dim, rng)
        embedding[0, :] = 0.0
        return cls(
            embedding=embedding,
            lstm=LstmParams.create(hidden_size, embedding_dim, rng),
            attention=AttentionParams.create(hidden_size, rng),
            out_w=glorot_uniform(hidden_size, n_fluents, rng),
            out_b=np.zeros(n_fluents),
        )

    @property
    def n_actions(self) -> int:
        return self.embedding.shape[0] - 1

    @property
    def n_fluents(self) -> int:
        return self.out_b.shape[0]

    @property
    def embedding_dim(self) -> int:
        return self.embedding.shape[1]

    @property
    def hidden_size(self) -> int:
        return self.lstm.hidden_size

    def tensors(self) -> dict[str, np.ndarray]:
        """Named views of every trainable tensor, in a fixed order."""
        return {
            "embedding": self.embedding,
            "lstm.w_f": self.lstm.w_f,
            "lstm.w_i": self.lstm.w_i,
            "lstm.w_o": self.lstm.w_o,
            "lstm.w_c": self.lstm.w_c,
            "lstm.b_f": self.lstm.b_f,
            "lstm.b_i": self.lstm.b_i,
            "lstm.b_o": self.lstm.b_o,
            "lstm.b_c": self.lstm.b_c,
            "attention.w_a": self.attention.w_a,
            "attention.b_a": self.attention.b_a,
            "attention.u_ctx": self.attention.u_ctx,
            "out.w": self.out_w,
            "out.b": self.out_b,
        }

    def copy(self) -> "ModelParams":
        return ModelParams(
            embedding=self.embedding.copy(),
            lstm=LstmParams(
                w_f=self.lstm.w_f.copy(),
                w_i=self.lstm.w_i.copy(),
                w_o=self.lstm.w_o.copy(),
                w_c=self.lstm.w_c.copy(),
                b_f=self.lstm.b_f.copy(),
                b_i=self.lstm.b_i.copy(),
                b_o=self.lstm.b_o.copy(),
                b_c=self.lstm.b_c.copy(),
                hidden_size=self.lstm.hidden_size,
                input_size=self.lstm.input_size,
            ),
            attention=AttentionParams(
                w_a=self.attention.w_a.copy(),
                b_a=self.attention.b_a.copy(),
                u_ctx=self.attention.u_ctx.copy(),
            ),
            out_w=self.out_w.copy(),
            out_b=self.out_b.copy(),
        )

    def validate(self) -> None:
        self.lstm.validate()
        self.attention.validate()
        if self.embedding.ndim != 2 or self.embedding.shape[1] != self.lstm.input_size:
            raise ShapeError(
                f"embedding {self.embedding.shape} incompatible with "
                f"lstm input size {self.lstm.input_size}"
            )
        if self.attention.hidden_size != self.lstm.hidden_size:
            raise ShapeError("attention and lstm disagree on hidden size")
        if self.out_w.shape != (self.lstm.hidden_size, self.out_b.shape[0]):
            raise ShapeError(
                f"output weights {self.out_w.shape} incompatible with "
                f"hidden {self.lstm.hidden_size} and bias {self.out_b.shape}"
            )


def zero_gradients(params: ModelParams) -> dict[str, np.ndarray]:
    """A gradient accumulator with the same named shapes as the parameters."""
    return {name: np.zeros_like(t) for name, t in params.tensors().items()}


@dataclass
class TraceCache:
    """Everything the backward pass needs from one forward run."""

    indices: np.ndarray  # (T,) int, 0 = padding
    mask: np.ndarray  # (T,) bool
    lstm: LstmSequenceCache
    attention: AttentionCache
    alphas: np.ndarray  # (T,)
    context: np.ndarray  # (hidden,)
    preds: np.ndarray  # (n_fluents,)


def _check_indices(indices, params: ModelParams) -> np.ndarray:
    indices = np.asarray(indices, dtype=np.int64)
    if indices.ndim != 1 or indices.size == 0:
        raise EmptyInputError("forward_trace needs a non-empty index sequence")
    if indices.min() < 0 or indices.max() > params.n_actions:
        raise OutOfVocabularyError(
            f"action index out of range 0..{params.n_actions}: "
            f"{indices[(indices < 0) | (indices > params.n_actions)][0]}"
        )
    if not (indices > 0).any():
        raise EmptyInputError("index sequence contains only padding")
    return indices


def forward_trace_with_cache(indices, params: ModelParams) -> tuple[np.ndarray, TraceCache]:
    """Forward pass over one trace, retaining activations for the backward pass."""
    indices = _check_indices(indices, params)
    mask = indices > 0
    xs = params.embedding[indices]
    hs, lstm_cache = lstm_sequence_forward(xs, params.lstm)
    context, alphas, att_cache = attention_forward(hs, params.attention, mask=mask)
    preds = dense_sigmoid_forward(context, params.out_w, params.out_b)
    cache = TraceCache(
        indices=indices,
        mask=mask,
        lstm=lstm_cache,
        attention=att_cache,
        alphas=alphas,
        context=context,
        preds=preds,
    )
    return preds, cache


def forward_trace(indices, params: ModelParams) -> np.ndarray:
    """Per-fluent probabilities for one trace of 1-based action indices."""
    preds, _ = forward_trace_with_cache(indices, params)
    return preds


def trace_loss(indices, targets, params: ModelParams) -> float:
    """Binary cross-entropy of one trace against a multi-hot target."""
    return bce_loss(forward_trace(indices, params), targets)


def backward_trace(
    cache: TraceCache,
    targets,
    params: ModelParams,
    loss_scale: float = 1.0,
) -> dict[str, np.ndarray]:
    """Gradients of the clamped BCE loss w.r.t. every trainable tensor.

    ``loss_scale`` multiplies the loss (and therefore every gradient); the
    padding embedding row receives whatever the chain rule says, and it is the
    trainer's job to keep it frozen.
    """
    targets = np.asarray(targets, dtype=np.float64)
    n = params.hidden_size
    n_fluents = params.n_fluents
    if targets.shape != (n_fluents,):
        raise ShapeError(f"targets {targets.shape} != ({n_fluents},)")
    if (
        cache.lstm.h.shape[1] != n
        or cache.lstm.xs.shape[1] != params.embedding_dim
        or cache.preds.shape[0] != n_fluents
    ):
        raise InvalidStateError("forward cache does not match these parameters")

    grads = zero_gradients(params)
    preds = cache.preds
    p = np.clip(preds, BCE_EPSILON, 1.0 - BCE_EPSILON)
    in_range = (preds > BCE_EPSILON) & (preds < 1.0 - BCE_EPSILON)

    # loss = mean_j -[y log p + (1-y) log(1-p)]; clamped components have zero slope
    dpreds = np.where(
        in_range,
        loss_scale * (-targets / p + (1.0 - targets) / (1.0 - p)) / n_fluents,
        0.0,
    )
    dlogits = dpreds * preds * (1.0 - preds)

    grads["out.w"][...] = np.outer(cache.context, dlogits)
    grads["out.b"][...] = dlogits
    dcontext = params.out_w @ dlogits

    # attention over the selected (unmasked) positions
    att = cache.attention
    dh = np.zeros_like(cache.lstm.h)
    dalpha = att.h_sel @ dcontext
    dh[att.selected] += att.alpha_sel[:, None] * dcontext[None, :]
    dlog = att.alpha_sel * (dalpha - float(att.alpha_sel @ dalpha))
    du = dlog[:, None] * params.attention.u_ctx[None, :]
    grads["attention.u_ctx"][...] = att.u_sel.T @ dlog
    da = du * (1.0 - att.u_sel**2)
    grads["attention.w_a"][...] = att.h_sel.T @ da
    grads["attention.b_a"][...] = da.sum(axis=0)
    dh[att.selected] += da @ params.attention.w_a.T

    # LSTM backward through time
    lstm = cache.lstm
    p_l = params.lstm
    dh_carry = np.zeros(n)
    dc_carry = np.zeros(n)
    d_emb = grads["embedding"]
    for t in range(lstm.h.shape[0] - 1, -1, -1):
        dh_t = dh[t] + dh_carry
        do = dh_t * lstm.tanh_c[t]
        dc_t = dc_carry + dh_t * lstm.o[t] * (1.0 - lstm.tanh_c[t] ** 2)
        di = dc_t * lstm.c_hat[t]
        dc_hat = dc_t * lstm.i[t]
        c_prev = lstm.c[t - 1] if t > 0 else np.zeros(n)
        df = dc_t * c_prev
        dc_carry = dc_t * lstm.f[t]
        da_i = di * lstm.i[t] * (1.0 - lstm.i[t])
        da_f = df * lstm.f[t] * (1.0 - lstm.f[t])
        da_o = do * lstm.o[t] * (1.0 - lstm.o[t])
        da_c = dc_hat * (1.0 - lstm.c_hat[t] ** 2)
        z = lstm.z[t]
        grads["lstm.w_i"] += np.outer(z, da_i)
        grads["lstm.w_f"] += np.outer(z, da_f)
        grads["lstm.w_o"] += np.outer(z, da_o)
        grads["lstm.w_c"] += np.outer(z, da_c)
        grads["lstm.b_i"] += da_i
        grads["lstm.b_f"] += da_f
        grads["lstm.b_o"] += da_o
        grads["lstm.b_c"] += da_c
        dz = da_i @ p_l.w_i.T + da_f @ p_l.w_f.T + da_o @ p_l.w_o.T + da_c @ p_l.w_c.T
        dh_carry = dz[:n]
        d_emb[cache.indices[t]] += dz[n:]
    return grads
