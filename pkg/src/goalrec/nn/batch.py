"""Vectorised forward/backward over padded mini-batches.

Sequences in a batch are right-padded with index 0 to the longest length;
padded positions read the frozen zero embedding row and are excluded from
attention, so the per-sample results match the single-trace path up to
floating-point summation order (tested). The batch loss is the mean over
samples of the per-sample mean BCE.

Dropout is training-only: one inverted-dropout mask per sequence on the LSTM
input connections and one on the hidden-to-hidden connections, fixed across
timesteps. Masks are passed in explicitly so gradients can be checked with
the masks held constant.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInputError, OutOfVocabularyError, ShapeError
from .init import as_rng
from .layers import BCE_EPSILON, sigmoid
from .network import ModelParams, zero_gradients


@dataclass
class DropoutMasks:
    """Per-sequence inverted dropout masks (values 0 or 1/keep_prob)."""

    input_mask: np.ndarray  # (B, embedding_dim)
    recurrent_mask: np.ndarray  # (B, hidden)


def make_dropout_masks(
    n_sequences: int,
    params: ModelParams,
    dropout: float,
    recurrent_dropout: float,
    rng,
) -> DropoutMasks | None:
    """Sample masks for one batch; None when both rates are zero."""
    if dropout == 0.0 and recurrent_dropout == 0.0:
        return None
    rng = as_rng(rng)

    def mask(rate: float, width: int) -> np.ndarray:
        if rate == 0.0:
            return np.ones((n_sequences, width))
        keep = 1.0 - rate
        return (rng.random((n_sequences, width)) < keep) / keep

    return DropoutMasks(
        input_mask=mask(dropout, params.embedding_dim),
        recurrent_mask=mask(recurrent_dropout, params.hidden_size),
    )


def pad_batch(index_sequences) -> np.ndarray:
    """Right-pad 1-based index sequences with 0 into a (B, T_max) array."""
    if len(index_sequences) == 0:
        raise EmptyInputError("pad_batch needs at least one sequence")
    lengths = [len(seq) for seq in index_sequences]
    if min(lengths) == 0:
        raise EmptyInputError("pad_batch received an empty sequence")
    out = np.zeros((len(index_sequences), max(lengths)), dtype=np.int64)
    for row, seq in enumerate(index_sequences):
        out[row, : len(seq)] = seq
    return out


@dataclass
class BatchCache:
    indices: np.ndarray  # (B, T)
    mask: np.ndarray  # (B, T) bool
    z: np.ndarray  # (T, B, hidden + input), after dropout
    i: np.ndarray  # (T, B, hidden)
    f: np.ndarray
    o: np.ndarray
    c_hat: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray
    h: np.ndarray  # (B, T, hidden), raw hidden states
    u: np.ndarray  # (B, T, hidden)
    alphas: np.ndarray  # (B, T)
    context: np.ndarray  # (B, hidden)
    preds: np.ndarray  # (B, n_fluents)
    dropout: DropoutMasks | None


def batch_forward(
    indices: np.ndarray,
    params: ModelParams,
    dropout: DropoutMasks | None = None,
) -> tuple[np.ndarray, BatchCache]:
    """Forward pass over a padded batch of index sequences."""
    indices = np.asarray(indices, dtype=np.int64)
    if indices.ndim != 2 or indices.size == 0:
        raise EmptyInputError("batch_forward needs a non-empty (B, T) index array")
    if indices.min() < 0 or indices.max() > params.n_actions:
        raise OutOfVocabularyError(f"action index out of range 0..{params.n_actions}")
    mask = indices > 0
    if not mask.any(axis=1).all():
        raise EmptyInputError("every sequence in a batch needs at least one real token")

    n_batch, n_steps = indices.shape
    n = params.hidden_size
    d = params.embedding_dim
    p_l = params.lstm

    xs = params.embedding[indices]  # (B, T, d)
    if dropout is not None:
        if dropout.input_mask.shape != (n_batch, d) or dropout.recurrent_mask.shape != (n_batch, n):
            raise ShapeError("dropout masks do not match the batch shape")
        xs = xs * dropout.input_mask[:, None, :]

    # fuse the four gate products into one matmul per step
    w_all = np.hstack([p_l.w_i, p_l.w_f, p_l.w_o, p_l.w_c])
    b_all = np.concatenate([p_l.b_i, p_l.b_f, p_l.b_o, p_l.b_c])

    z_all = np.empty((n_steps, n_batch, n + d))
    gate_i = np.empty((n_steps, n_batch, n))
    gate_f = np.empty((n_steps, n_batch, n))
    gate_o = np.empty((n_steps, n_batch, n))
    c_hat_all = np.empty((n_steps, n_batch, n))
    c_all = np.empty((n_steps, n_batch, n))
    tanh_c_all = np.empty((n_steps, n_batch, n))
    h_all = np.empty((n_batch, n_steps, n))

    h = np.zeros((n_batch, n))
    c = np.zeros((n_batch, n))
    for t in range(n_steps):
        h_in = h if dropout is None else h * dropout.recurrent_mask
        z = np.concatenate([h_in, xs[:, t, :]], axis=1)
        acts = z @ w_all + b_all
        i = sigmoid(acts[:, :n])
        f = sigmoid(acts[:, n : 2 * n])
        o = sigmoid(acts[:, 2 * n : 3 * n])
        c_hat = np.tanh(acts[:, 3 * n :])
        c = i * c_hat + f * c
        tanh_c = np.tanh(c)
        h = tanh_c * o
        z_all[t] = z
        gate_i[t] = i
        gate_f[t] = f
        gate_o[t] = o
        c_hat_all[t] = c_hat
        c_all[t] = c
        tanh_c_all[t] = tanh_c
        h_all[:, t, :] = h

    p_a = params.attention
    u = np.tanh(h_all @ p_a.w_a + p_a.b_a)  # (B, T, n)
    logits = u @ p_a.u_ctx  # (B, T)
    logits = np.where(mask, logits, -np.inf)
    shifted = np.exp(logits - logits.max(axis=1, keepdims=True))
    alphas = shifted / shifted.sum(axis=1, keepdims=True)
    context = np.einsum("bt,btn->bn", alphas, h_all)
    preds = sigmoid(context @ params.out_w + params.out_b)

    cache = BatchCache(
        indices=indices, mask=mask, z=z_all, i=gate_i, f=gate_f, o=gate_o,
        c_hat=c_hat_all, c=c_all, tanh_c=tanh_c_all, h=h_all, u=u,
        alphas=alphas, context=context, preds=preds, dropout=dropout,
    )
    return preds, cache


def batch_loss(preds: np.ndarray, targets: np.ndarray) -> float:
    """Mean over samples of the per-sample mean BCE."""
    if preds.shape != targets.shape:
        raise ShapeError(f"predictions {preds.shape} != targets {targets.shape}")
    p = np.clip(preds, BCE_EPSILON, 1.0 - BCE_EPSILON)
    return float(np.mean(-(targets * np.log(p) + (1.0 - targets) * np.log(1.0 - p))))


def batch_backward(
    cache: BatchCache, targets: np.ndarray, params: ModelParams
) -> dict[str, np.ndarray]:
    """Gradients of ``batch_loss`` w.r.t. every trainable tensor."""
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != cache.preds.shape:
        raise ShapeError(f"targets {targets.shape} != predictions {cache.preds.shape}")
    n_batch, n_steps = cache.indices.shape
    n = params.hidden_size
    grads = zero_gradients(params)

    preds = cache.preds
    p = np.clip(preds, BCE_EPSILON, 1.0 - BCE_EPSILON)
    in_range = (preds > BCE_EPSILON) & (preds < 1.0 - BCE_EPSILON)
    denom = preds.size  # mean over samples and fluents
    dpreds = np.where(in_range, (-targets / p + (1.0 - targets) / (1.0 - p)) / denom, 0.0)
    dlogits_out = dpreds * preds * (1.0 - preds)

    grads["out.w"][...] = cache.context.T @ dlogits_out
    grads["out.b"][...] = dlogits_out.sum(axis=0)
    dcontext = dlogits_out @ params.out_w.T  # (B, n)

    # attention: masked positions have alpha == 0, so their dlog vanishes
    p_a = params.attention
    dalpha = np.einsum("bn,btn->bt", dcontext, cache.h)
    dh = cache.alphas[:, :, None] * dcontext[:, None, :]  # (B, T, n)
    inner = (cache.alphas * dalpha).sum(axis=1, keepdims=True)
    dlog = cache.alphas * (dalpha - inner)
    du = dlog[:, :, None] * p_a.u_ctx[None, None, :]
    grads["attention.u_ctx"][...] = np.einsum("bt,btn->n", dlog, cache.u)
    da = du * (1.0 - cache.u**2)
    grads["attention.w_a"][...] = np.einsum("btn,btm->nm", cache.h, da)
    grads["attention.b_a"][...] = da.sum(axis=(0, 1))
    dh += da @ p_a.w_a.T

    p_l = params.lstm
    w_all = np.hstack([p_l.w_i, p_l.w_f, p_l.w_o, p_l.w_c])
    dw_all = np.zeros_like(w_all)
    db_all = np.zeros(4 * n)
    da_all = np.empty((n_batch, 4 * n))
    dh_carry = np.zeros((n_batch, n))
    dc_carry = np.zeros((n_batch, n))
    dx = np.empty((n_steps, n_batch, params.embedding_dim))
    for t in range(n_steps - 1, -1, -1):
        dh_t = dh[:, t, :] + dh_carry
        do = dh_t * cache.tanh_c[t]
        dc_t = dc_carry + dh_t * cache.o[t] * (1.0 - cache.tanh_c[t] ** 2)
        di = dc_t * cache.c_hat[t]
        dc_hat = dc_t * cache.i[t]
        c_prev = cache.c[t - 1] if t > 0 else np.zeros((n_batch, n))
        df = dc_t * c_prev
        dc_carry = dc_t * cache.f[t]
        da_all[:, :n] = di * cache.i[t] * (1.0 - cache.i[t])
        da_all[:, n : 2 * n] = df * cache.f[t] * (1.0 - cache.f[t])
        da_all[:, 2 * n : 3 * n] = do * cache.o[t] * (1.0 - cache.o[t])
        da_all[:, 3 * n :] = dc_hat * (1.0 - cache.c_hat[t] ** 2)
        dw_all += cache.z[t].T @ da_all
        db_all += da_all.sum(axis=0)
        dz = da_all @ w_all.T
        dh_carry = dz[:, :n]
        if cache.dropout is not None:
            dh_carry = dh_carry * cache.dropout.recurrent_mask
        dx[t] = dz[:, n:]
    grads["lstm.w_i"][...] = dw_all[:, :n]
    grads["lstm.w_f"][...] = dw_all[:, n : 2 * n]
    grads["lstm.w_o"][...] = dw_all[:, 2 * n : 3 * n]
    grads["lstm.w_c"][...] = dw_all[:, 3 * n :]
    grads["lstm.b_i"][...] = db_all[:n]
    grads["lstm.b_f"][...] = db_all[n : 2 * n]
    grads["lstm.b_o"][...] = db_all[2 * n : 3 * n]
    grads["lstm.b_c"][...] = db_all[3 * n :]

    if cache.dropout is not None:
        dx = dx * cache.dropout.input_mask[None, :, :]
    flat_idx = cache.indices.T.reshape(-1)  # t-major to match dx layout
    np.add.at(grads["embedding"], flat_idx, dx.reshape(-1, params.embedding_dim))
    return grads


def batch_loss_and_grads(
    indices: np.ndarray,
    targets: np.ndarray,
    params: ModelParams,
    dropout: DropoutMasks | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Convenience wrapper: forward, loss, and gradients in one call."""
    preds, cache = batch_forward(indices, params, dropout)
    return batch_loss(preds, np.asarray(targets, dtype=np.float64)), batch_backward(
        cache, targets, params
    )
