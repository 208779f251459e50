"""Layers of the trace classifier: LSTM cell, attention pooling, sigmoid head.

All functions are pure and operate on float64 numpy arrays using the
row-vector convention: a linear map with weights W of shape (fan_in, fan_out)
is applied as ``x @ W + b``. The LSTM consumes the concatenation
``[h_prev, x_t]`` (hidden state first), so each gate matrix has shape
(hidden_size + input_size, hidden_size).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInputError, ShapeError
from .init import as_rng, glorot_uniform

# Sigmoid outputs are clamped into [BCE_EPSILON, 1 - BCE_EPSILON] before logs.
BCE_EPSILON = 1e-7


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function via the tanh identity."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * (1.0 + np.tanh(0.5 * x))


@dataclass
class LstmParams:
    """Weights of one LSTM layer, shared across all timesteps."""

    w_f: np.ndarray
    w_i: np.ndarray
    w_o: np.ndarray
    w_c: np.ndarray
    b_f: np.ndarray
    b_i: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray
    hidden_size: int
    input_size: int

    @classmethod
    def create(cls, hidden_size: int, input_size: int, rng) -> "LstmParams":
        """Glorot-uniform gate matrices, zero biases."""
        rng = as_rng(rng)
        rows = hidden_size + input_size
        return cls(
            w_f=glorot_uniform(rows, hidden_size, rng),
            w_i=glorot_uniform(rows, hidden_size, rng),
            w_o=glorot_uniform(rows, hidden_size, rng),
            w_c=glorot_uniform(rows, hidden_size, rng),
            b_f=np.zeros(hidden_size),
            b_i=np.zeros(hidden_size),
            b_o=np.zeros(hidden_size),
            b_c=np.zeros(hidden_size),
            hidden_size=hidden_size,
            input_size=input_size,
        )

    @classmethod
    def zeros(cls, hidden_size: int, input_size: int) -> "LstmParams":
        rows = hidden_size + input_size
        return cls(
            w_f=np.zeros((rows, hidden_size)),
            w_i=np.zeros((rows, hidden_size)),
            w_o=np.zeros((rows, hidden_size)),
            w_c=np.zeros((rows, hidden_size)),
            b_f=np.zeros(hidden_size),
            b_i=np.zeros(hidden_size),
            b_o=np.zeros(hidden_size),
            b_c=np.zeros(hidden_size),
            hidden_size=hidden_size,
            input_size=input_size,
        )

    def validate(self) -> None:
        rows = self.hidden_size + self.input_size
        for name in ("w_f", "w_i", "w_o", "w_c"):
            m = getattr(self, name)
            if m.shape != (rows, self.hidden_size):
                raise ShapeError(
                    f"lstm {name} has shape {m.shape}, expected {(rows, self.hidden_size)}"
                )
        for name in ("b_f", "b_i", "b_o", "b_c"):
            b = getattr(self, name)
            if b.shape != (self.hidden_size,):
                raise ShapeError(
                    f"lstm {name} has shape {b.shape}, expected {(self.hidden_size,)}"
                )


@dataclass
class AttentionParams:
    """Attention pooling parameters: square projection, bias, trainable query."""

    w_a: np.ndarray  # (hidden, hidden)
    b_a: np.ndarray  # (hidden,)
    u_ctx: np.ndarray  # (hidden,)

    @classmethod
    def create(cls, hidden_size: int, rng) -> "AttentionParams":
        rng = as_rng(rng)
        return cls(
            w_a=glorot_uniform(hidden_size, hidden_size, rng),
            b_a=np.zeros(hidden_size),
            u_ctx=glorot_uniform(hidden_size, 1, rng).ravel(),
        )

    @classmethod
    def zeros(cls, hidden_size: int) -> "AttentionParams":
        return cls(
            w_a=np.zeros((hidden_size, hidden_size)),
            b_a=np.zeros(hidden_size),
            u_ctx=np.zeros(hidden_size),
        )

    def validate(self) -> None:
        n = self.u_ctx.shape[0] if self.u_ctx.ndim == 1 else -1
        if n < 1 or self.w_a.shape != (n, n) or self.b_a.shape != (n,):
            raise ShapeError(
                f"attention shapes inconsistent: w_a {self.w_a.shape}, "
                f"b_a {self.b_a.shape}, u_ctx {self.u_ctx.shape}"
            )

    @property
    def hidden_size(self) -> int:
        return self.u_ctx.shape[0]


@dataclass
class LstmStep:
    """Per-timestep activations retained for the backward pass."""

    z: np.ndarray  # concatenated (h_prev, x_t)
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    c_hat: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray


def lstm_cell_forward(
    x_t: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray, p: LstmParams
) -> tuple[np.ndarray, np.ndarray, LstmStep]:
    """One LSTM step.

    c_hat = tanh(W_c [h_prev, x_t] + b_c)
    i, f, o = sigmoid(W_* [h_prev, x_t] + b_*)
    c_t = i * c_hat + f * c_prev
    h_t = tanh(c_t) * o
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)
    if x_t.shape != (p.input_size,):
        raise ShapeError(f"input has shape {x_t.shape}, expected {(p.input_size,)}")
    if h_prev.shape != (p.hidden_size,) or c_prev.shape != (p.hidden_size,):
        raise ShapeError(
            f"state has shapes {h_prev.shape}/{c_prev.shape}, "
            f"expected {(p.hidden_size,)}"
        )
    z = np.concatenate([h_prev, x_t])
    c_hat = np.tanh(z @ p.w_c + p.b_c)
    i = sigmoid(z @ p.w_i + p.b_i)
    f = sigmoid(z @ p.w_f + p.b_f)
    o = sigmoid(z @ p.w_o + p.b_o)
    c = i * c_hat + f * c_prev
    tanh_c = np.tanh(c)
    h = tanh_c * o
    return h, c, LstmStep(z=z, i=i, f=f, o=o, c_hat=c_hat, c=c, tanh_c=tanh_c)


@dataclass
class LstmSequenceCache:
    """Stacked per-step activations for a whole sequence (row t = step t)."""

    xs: np.ndarray  # (T, input)
    z: np.ndarray  # (T, hidden + input)
    i: np.ndarray  # (T, hidden)
    f: np.ndarray
    o: np.ndarray
    c_hat: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray
    h: np.ndarray


def lstm_sequence_forward(
    xs, p: LstmParams
) -> tuple[np.ndarray, LstmSequenceCache]:
    """Run the cell over a sequence with zero-initialised h_0 and c_0.

    Returns the (T, hidden) matrix of per-step outputs plus the cache needed
    by the backward pass.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[0] == 0:
        raise EmptyInputError("lstm_sequence_forward needs a non-empty (T, input) sequence")
    if xs.shape[1] != p.input_size:
        raise ShapeError(f"sequence feature size {xs.shape[1]} != input size {p.input_size}")
    n_steps = xs.shape[0]
    n = p.hidden_size
    cache = LstmSequenceCache(
        xs=xs,
        z=np.empty((n_steps, n + p.input_size)),
        i=np.empty((n_steps, n)),
        f=np.empty((n_steps, n)),
        o=np.empty((n_steps, n)),
        c_hat=np.empty((n_steps, n)),
        c=np.empty((n_steps, n)),
        tanh_c=np.empty((n_steps, n)),
        h=np.empty((n_steps, n)),
    )
    h = np.zeros(n)
    c = np.zeros(n)
    for t in range(n_steps):
        h, c, step = lstm_cell_forward(xs[t], h, c, p)
        cache.z[t] = step.z
        cache.i[t] = step.i
        cache.f[t] = step.f
        cache.o[t] = step.o
        cache.c_hat[t] = step.c_hat
        cache.c[t] = step.c
        cache.tanh_c[t] = step.tanh_c
        cache.h[t] = h
    return cache.h.copy(), cache


@dataclass
class AttentionCache:
    """Compact attention activations over the unmasked positions only."""

    selected: np.ndarray  # (S,) indices of attended positions
    h_sel: np.ndarray  # (S, hidden)
    u_sel: np.ndarray  # (S, hidden)
    alpha_sel: np.ndarray  # (S,)


def attention_forward(
    hs: np.ndarray, p: AttentionParams, mask: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, AttentionCache]:
    """Pool per-step hidden states into one context vector.

    u_t = tanh(h_t @ W_a + b_a); alpha = softmax_t(u_t . u_ctx);
    context = sum_t alpha_t h_t. Positions where ``mask`` is False are
    excluded entirely, so appending masked steps cannot perturb the result.
    Returned ``alphas`` has the full sequence length with zeros at masked
    positions.
    """
    hs = np.asarray(hs, dtype=np.float64)
    if hs.ndim != 2 or hs.shape[0] == 0:
        raise EmptyInputError("attention_forward needs a non-empty (T, hidden) matrix")
    if hs.shape[1] != p.hidden_size:
        raise ShapeError(f"hidden size {hs.shape[1]} != attention size {p.hidden_size}")
    if mask is None:
        selected = np.arange(hs.shape[0])
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (hs.shape[0],):
            raise ShapeError(f"mask shape {mask.shape} != sequence length {hs.shape[0]}")
        selected = np.flatnonzero(mask)
        if selected.size == 0:
            raise EmptyInputError("attention mask excludes every position")
    h_sel = hs[selected]
    u_sel = np.tanh(h_sel @ p.w_a + p.b_a)
    logits = u_sel @ p.u_ctx
    shifted = np.exp(logits - logits.max())
    alpha_sel = shifted / shifted.sum()
    context = alpha_sel @ h_sel
    alphas = np.zeros(hs.shape[0])
    alphas[selected] = alpha_sel
    return context, alphas, AttentionCache(
        selected=selected, h_sel=h_sel, u_sel=u_sel, alpha_sel=alpha_sel
    )


def dense_sigmoid_forward(
    context: np.ndarray, w_out: np.ndarray, b_out: np.ndarray
) -> np.ndarray:
    """Per-fluent probabilities: sigmoid(context @ w_out + b_out)."""
    context = np.asarray(context, dtype=np.float64)
    if context.ndim != 1 or w_out.ndim != 2 or w_out.shape[0] != context.shape[0]:
        raise ShapeError(
            f"context {context.shape} incompatible with output weights {w_out.shape}"
        )
    if b_out.shape != (w_out.shape[1],):
        raise ShapeError(f"output bias {b_out.shape} != width {(w_out.shape[1],)}")
    return sigmoid(context @ w_out + b_out)


def bce_loss(preds: np.ndarray, targets: np.ndarray) -> float:
    """Mean binary cross-entropy with predictions clamped away from 0 and 1."""
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape or preds.ndim != 1:
        raise ShapeError(f"prediction shape {preds.shape} != target shape {targets.shape}")
    if not np.all((targets == 0.0) | (targets == 1.0)):
        raise ShapeError("targets must be a multi-hot vector of 0s and 1s")
    p = np.clip(preds, BCE_EPSILON, 1.0 - BCE_EPSILON)
    return float(np.mean(-(targets * np.log(p) + (1.0 - targets) * np.log(1.0 - p))))
