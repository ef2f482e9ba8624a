"""Scaled dot-product multi-head attention shared by the encoder and fusion layers."""

from __future__ import annotations

import math

import numpy as np

from .tensor import Tensor, concat, dropout, matmul, softmax, transpose

__all__ = ["multi_head_attention"]


def multi_head_attention(
    x: Tensor,
    wq: Tensor,
    wk: Tensor,
    wv: Tensor,
    wo: Tensor,
    num_heads: int,
    *,
    bq: Tensor | None = None,
    bk: Tensor | None = None,
    bv: Tensor | None = None,
    bo: Tensor | None = None,
    training: bool = False,
    rng: np.random.Generator | None = None,
    attn_dropout: float = 0.0,
    probs_sink: list | None = None,
) -> Tensor:
    """Self-attention over the rows of ``x`` [S, d]; output has the same shape.

    Head h reads its slice of the packed Q/K/V projections, scores with
    1/sqrt(d_k) scaling, softmax-normalizes per query row, and the
    concatenated head outputs pass through the output projection. Dropout is
    applied to the attention probabilities in training mode only.

    ``probs_sink``, when given, collects each head's probability matrix
    (before dropout); the tests use it to audit row normalization.
    """
    d_model = x.shape[1]
    if d_model % num_heads:
        raise ValueError(f"width {d_model} not divisible by {num_heads} heads")
    d_k = d_model // num_heads
    scale = Tensor(1.0 / math.sqrt(d_k))

    q = matmul(x, wq)
    k = matmul(x, wk)
    v = matmul(x, wv)
    if bq is not None:
        q, k, v = q + bq, k + bk, v + bv

    head_outputs = []
    for h in range(num_heads):
        cols = slice(h * d_k, (h + 1) * d_k)
        scores = matmul(q[:, cols], transpose(k[:, cols])) * scale
        probs = softmax(scores, axis=-1)
        if probs_sink is not None:
            probs_sink.append(probs)
        probs = dropout(probs, attn_dropout, training, rng)
        head_outputs.append(matmul(probs, v[:, cols]))

    out = matmul(concat(head_outputs, axis=1), wo)
    return out if bo is None else out + bo
