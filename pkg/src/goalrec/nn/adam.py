"""Adam optimiser over named tensor dictionaries."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidConfigError, ShapeError, TrainingDivergedError


@dataclass
class AdamState:
    """Per-tensor first/second moments plus the shared hyperparameters."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.99
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_tensors(cls, tensors: dict[str, np.ndarray], **hyper) -> "AdamState":
        """Zero-moment state matching the shapes of ``tensors``."""
        state = cls(**hyper)
        if not (0.0 < state.beta1 < 1.0 and 0.0 < state.beta2 < 1.0):
            raise InvalidConfigError("beta1 and beta2 must lie strictly in (0, 1)")
        if state.learning_rate <= 0.0 or state.epsilon <= 0.0:
            raise InvalidConfigError("learning_rate and epsilon must be positive")
        state.first_moment = {k: np.zeros_like(v) for k, v in tensors.items()}
        state.second_moment = {k: np.zeros_like(v) for k, v in tensors.items()}
        return state


def adam_step(
    tensors: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One bias-corrected Adam update, applied to the tensors in place.

    theta -= lr * m_hat / (sqrt(v_hat) + eps). Deterministic; raises if any
    gradient component is not finite.
    """
    if set(tensors) != set(state.first_moment) or set(grads) != set(tensors):
        raise ShapeError("tensor, gradient and moment dictionaries must share keys")
    for name, g in grads.items():
        if g.shape != tensors[name].shape:
            raise ShapeError(f"gradient for {name} has shape {g.shape}, "
                             f"parameter has {tensors[name].shape}")
        if not np.all(np.isfinite(g)):
            raise TrainingDivergedError(f"non-finite gradient in {name}")
    state.step_count += 1
    t = state.step_count
    bias1 = 1.0 - state.beta1**t
    bias2 = 1.0 - state.beta2**t
    for name, g in grads.items():
        m = state.first_moment[name]
        v = state.second_moment[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        tensors[name] -= state.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + state.epsilon)
    return tensors, state
