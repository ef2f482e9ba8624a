"""Parameter initialization and the Adam optimizer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor

__all__ = ["xavier_normal_init", "AdamState", "adam_step", "Adam", "zero_grads"]


def _as_rng(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def xavier_normal_init(fan_in: int, fan_out: int, rng_seed) -> Tensor:
    """Trainable [fan_in, fan_out] matrix, entries N(0, 2 / (fan_in + fan_out)).

    Deterministic for a fixed seed; also accepts a live Generator so callers
    can initialize many parameters from one stream.
    """
    if fan_in <= 0 or fan_out <= 0:
        raise ValueError(f"fans must be positive, got ({fan_in}, {fan_out})")
    std = math.sqrt(2.0 / (fan_in + fan_out))
    rng = _as_rng(rng_seed)
    return Tensor(std * rng.standard_normal((fan_in, fan_out)), requires_grad=True)


@dataclass
class AdamState:
    """Per-parameter moment buffers plus the shared step counter."""

    first_moment: list[np.ndarray]
    second_moment: list[np.ndarray]
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_params(cls, params, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8) -> "AdamState":
        shapes = [np.zeros_like(p.data if isinstance(p, Tensor) else p) for p in params]
        return cls(
            first_moment=shapes,
            second_moment=[np.zeros_like(s) for s in shapes],
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )


def adam_step(params, grads, state: AdamState, learning_rate: float):
    """One bias-corrected adaptive-moment update, in place.

    ``params`` and ``grads`` are aligned lists of ndarrays (or Tensors, whose
    ``.data``/``.grad`` are used). Returns ``(params, state)``.
    """
    arrays = [p.data if isinstance(p, Tensor) else p for p in params]
    grad_arrays = [g.grad if isinstance(g, Tensor) else g for g in grads]
    if len(arrays) != len(grad_arrays):
        raise ValueError("params and grads must align")
    for p, g, m, v in zip(arrays, grad_arrays, state.first_moment, state.second_moment):
        if g is None or p.shape != g.shape or p.shape != m.shape or p.shape != v.shape:
            raise ValueError("parameter, gradient, and moment shapes must agree")
    state.step_count += 1
    bc1 = 1.0 - state.beta1 ** state.step_count
    bc2 = 1.0 - state.beta2 ** state.step_count
    for p, g, m, v in zip(arrays, grad_arrays, state.first_moment, state.second_moment):
        m[...] = state.beta1 * m + (1.0 - state.beta1) * g
        v[...] = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        p -= learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)
    return params, state


@dataclass
class Adam:
    """Adam bound to a fixed parameter list, for use as one learning-rate group."""

    params: list[Tensor]
    learning_rate: float
    state: AdamState = field(init=False)

    def __post_init__(self):
        self.state = AdamState.for_params(self.params)

    def step(self) -> None:
        grads = [p.grad for p in self.params]
        adam_step(self.params, grads, self.state, self.learning_rate)


def zero_grads(params) -> None:
    for p in params:
        p.grad = None
