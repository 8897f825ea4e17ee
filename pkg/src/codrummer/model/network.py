"""Forward and backward passes of the causal dilated convolution stack.

Everything is plain numpy in float64. Parameters live in an ordered dict
keyed by name; gradients come back in a dict of the same shape, which is
what makes the finite-difference gradient check straightforward.

Geometry: the input is [start] ++ context ++ masks. Output position j is
read from the hidden state at input index (context_steps) + j, so it can
see the start token, the whole context, and the first j mask cells, but
never anything later.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..errors import DataError
from .config import ModelConfig

Params = dict[str, np.ndarray]

PROB_FLOOR = 1e-12


def parameter_names(config: ModelConfig) -> list[str]:
    names = ["embedding"]
    for l in range(config.layers):
        names += [f"conv{l}.weight", f"conv{l}.bias"]
    names += ["head.weight", "head.bias"]
    return names


def _representable(arr: np.ndarray) -> np.ndarray:
    # Keep values exactly float32-representable so the on-disk format
    # round-trips without loss.
    return arr.astype(np.float32).astype(np.float64)


def init_parameters(config: ModelConfig) -> Params:
    rng = np.random.default_rng(config.seed)
    params: Params = {}
    params["embedding"] = _representable(
        rng.normal(0.0, 0.1, size=(config.vocab_size, config.embed_dim))
    )
    c_in = config.embed_dim
    for l in range(config.layers):
        fan_in = config.kernel_size * c_in
        scale = np.sqrt(2.0 / fan_in)
        params[f"conv{l}.weight"] = _representable(
            rng.normal(0.0, scale, size=(config.kernel_size, c_in, config.hidden_units))
        )
        params[f"conv{l}.bias"] = np.zeros(config.hidden_units)
        c_in = config.hidden_units
    # Small head so an untrained model predicts near-uniformly.
    params["head.weight"] = _representable(
        rng.normal(0.0, 0.01, size=(config.hidden_units, config.vocab_size))
    )
    params["head.bias"] = np.zeros(config.vocab_size)
    return params


@dataclass
class _LayerCache:
    x: np.ndarray          # input (B, L, C_in)
    pre: np.ndarray        # pre-activation (B, L, H)
    residual: bool
    drop_mask: np.ndarray | None


@dataclass
class ForwardResult:
    probs: np.ndarray      # (B, T, V)
    cache: "_Cache | None"


@dataclass
class _Cache:
    input_ids: np.ndarray
    layers: list[_LayerCache]
    hidden_out: np.ndarray  # (B, T, H) hidden rows feeding the head
    out_index: np.ndarray   # which sequence positions feed the head


def _conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, dilation: int) -> np.ndarray:
    kernel = w.shape[0]
    out = np.broadcast_to(b, x.shape[:2] + (w.shape[2],)).copy()
    for k in range(kernel):
        pad = (kernel - 1 - k) * dilation
        if pad == 0:
            out += x @ w[k]
        elif pad < x.shape[1]:
            out[:, pad:] += x[:, :-pad] @ w[k]
    return out


def _conv_backward(
    d_pre: np.ndarray, x: np.ndarray, w: np.ndarray, dilation: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    kernel = w.shape[0]
    dw = np.zeros_like(w)
    dx = np.zeros_like(x)
    for k in range(kernel):
        pad = (kernel - 1 - k) * dilation
        if pad == 0:
            dw[k] = np.tensordot(x, d_pre, axes=([0, 1], [0, 1]))
            dx += d_pre @ w[k].T
        elif pad < x.shape[1]:
            dw[k] = np.tensordot(x[:, :-pad], d_pre[:, pad:], axes=([0, 1], [0, 1]))
            dx[:, :-pad] += d_pre[:, pad:] @ w[k].T
    db = d_pre.sum(axis=(0, 1))
    return dw, db, dx


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def forward_batch(
    params: Params,
    config: ModelConfig,
    input_ids: np.ndarray,
    train: bool = False,
    dropout_rng: np.random.Generator | None = None,
) -> ForwardResult:
    ids = np.asarray(input_ids)
    if ids.ndim != 2 or ids.shape[1] != config.input_length:
        raise DataError(
            f"input must be (batch, {config.input_length}), got {ids.shape}"
        )
    if ids.min() < 0 or ids.max() >= config.vocab_size:
        raise DataError("input id out of vocabulary range")

    use_dropout = train and config.dropout_rate > 0.0
    if use_dropout and dropout_rng is None:
        raise DataError("training forward with dropout needs an rng")

    x = params["embedding"][ids]
    layer_caches: list[_LayerCache] = []
    for l in range(config.layers):
        w = params[f"conv{l}.weight"]
        b = params[f"conv{l}.bias"]
        pre = _conv_forward(x, w, b, config.dilations[l])
        out = np.maximum(pre, 0.0)
        residual = x.shape[-1] == out.shape[-1]
        if residual:
            out = out + x
        drop_mask = None
        if use_dropout:
            keep = 1.0 - config.dropout_rate
            drop_mask = (dropout_rng.random(out.shape) < keep) / keep
            out = out * drop_mask
        layer_caches.append(_LayerCache(x=x, pre=pre, residual=residual,
                                        drop_mask=drop_mask))
        x = out

    # hidden rows that feed the head: one step before each masked position
    out_index = config.context_steps + np.arange(config.target_steps)
    hidden_out = x[:, out_index, :]
    logits = hidden_out @ params["head.weight"] + params["head.bias"]
    probs = _softmax(logits)
    cache = _Cache(input_ids=ids, layers=layer_caches, hidden_out=hidden_out,
                   out_index=out_index)
    return ForwardResult(probs=probs, cache=cache)


def assemble_input_ids(
    start_id: int,
    context_ids,
    mask_id: int,
    target_steps: int,
) -> np.ndarray:
    """[start] ++ context ++ masks. Masking is input substitution: whatever
    the target positions held is replaced wholesale by the mask token."""
    return np.array(
        [start_id] + list(context_ids) + [mask_id] * target_steps, dtype=np.int64
    )


def forward(params: Params, config: ModelConfig, input_ids) -> np.ndarray:
    """Single-sequence inference: (input_length,) ids -> (target_steps, vocab)."""
    ids = np.asarray(input_ids)
    if ids.ndim != 1:
        raise DataError(f"expected a 1-d id sequence, got shape {ids.shape}")
    return forward_batch(params, config, ids[None, :], train=False).probs[0]


def loss(
    prob_grid: np.ndarray,
    target_ids: np.ndarray,
    silent_token_id: int,
    silent_loss_weight: float = 0.1,
) -> float:
    """Weighted-mean cross-entropy over the target positions.

    Silent targets contribute with weight `silent_loss_weight` to both the
    numerator and the denominator, so an all-silent measure still reports a
    comparable magnitude.
    """
    probs = np.asarray(prob_grid)
    targets = np.asarray(target_ids)
    if probs.ndim == 2:
        probs = probs[None]
        targets = targets[None]
    b_idx, t_idx = np.indices(targets.shape)
    chosen = probs[b_idx, t_idx, targets]
    if np.any(chosen <= PROB_FLOOR):
        warnings.warn("probability underflow clamped in loss")
        chosen = np.maximum(chosen, PROB_FLOOR)
    weights = np.where(targets == silent_token_id, silent_loss_weight, 1.0)
    return float((weights * -np.log(chosen)).sum() / weights.sum())


def loss_and_grad(
    result: ForwardResult,
    target_ids: np.ndarray,
    silent_token_id: int,
    silent_loss_weight: float = 0.1,
) -> tuple[float, np.ndarray]:
    """Loss plus its gradient w.r.t. the logits (softmax already folded in)."""
    probs = result.probs
    targets = np.asarray(target_ids)
    if targets.shape != probs.shape[:2]:
        raise DataError(f"targets {targets.shape} do not match probs {probs.shape}")
    value = loss(probs, targets, silent_token_id, silent_loss_weight)
    weights = np.where(targets == silent_token_id, silent_loss_weight, 1.0)
    scale = weights / weights.sum()
    d_logits = probs * scale[..., None]
    b_idx, t_idx = np.indices(targets.shape)
    d_logits[b_idx, t_idx, targets] -= scale
    return value, d_logits


def backward(
    params: Params,
    config: ModelConfig,
    result: ForwardResult,
    d_logits: np.ndarray,
) -> Params:
    cache = result.cache
    if cache is None:
        raise DataError("forward result carries no cache")
    grads: Params = {name: np.zeros_like(params[name]) for name in params}

    grads["head.weight"] = np.tensordot(cache.hidden_out, d_logits,
                                        axes=([0, 1], [0, 1]))
    grads["head.bias"] = d_logits.sum(axis=(0, 1))

    batch, seq = cache.input_ids.shape
    d_x = np.zeros((batch, seq, config.hidden_units))
    d_x[:, cache.out_index, :] = d_logits @ params["head.weight"].T

    for l in reversed(range(config.layers)):
        lc = cache.layers[l]
        d_out = d_x
        if lc.drop_mask is not None:
            d_out = d_out * lc.drop_mask
        d_pre = d_out * (lc.pre > 0.0)
        dw, db, d_in = _conv_backward(d_pre, lc.x, params[f"conv{l}.weight"],
                                      config.dilations[l])
        if lc.residual:
            d_in = d_in + d_out
        grads[f"conv{l}.weight"] = dw
        grads[f"conv{l}.bias"] = db
        d_x = d_in

    d_embed = np.zeros_like(params["embedding"])
    np.add.at(d_embed, cache.input_ids, d_x)
    grads["embedding"] = d_embed
    return grads
