"""Adamax: the infinity-norm variant of Adam.

Update rule per parameter theta with gradient g at step t:

    m <- beta1 * m + (1 - beta1) * g
    u <- max(beta2 * u, |g|)
    theta <- theta - (lr / (1 - beta1**t)) * m / (u + eps)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError
from .nn import GradientSet, Mlp


@dataclass
class AdamaxState:
    """First moment m and infinity-norm accumulator u, shaped like an Mlp."""

    m: GradientSet
    u: GradientSet
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_mlp(
        cls,
        mlp: Mlp,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
    ) -> "AdamaxState":
        if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
            raise ConfigError("beta1 and beta2 must lie in [0, 1)")
        if epsilon <= 0.0:
            raise ConfigError("epsilon must be positive")
        return cls(
            m=GradientSet.zeros_like(mlp),
            u=GradientSet.zeros_like(mlp),
            beta1=beta1,
            beta2=beta2,
            epsilon=epsilon,
        )


def adamax_step(
    mlp: Mlp, grads: GradientSet, state: AdamaxState, learning_rate: float
) -> tuple[Mlp, AdamaxState]:
    """One Adamax update. Returns a new Mlp and advanced state; the inputs
    are left untouched."""
    if learning_rate <= 0.0:
        raise ConfigError(f"learning_rate must be > 0, got {learning_rate}")
    if not grads.all_finite():
        raise NumericError("gradient contains non-finite entries")

    t = state.step_count + 1
    scale = learning_rate / (1.0 - state.beta1**t)

    new_layers = []
    new_m_w, new_m_b, new_u_w, new_u_b = [], [], [], []
    for layer, gw, gb, mw, mb, uw, ub in zip(
        mlp.layers,
        grads.weight_grads,
        grads.bias_grads,
        state.m.weight_grads,
        state.m.bias_grads,
        state.u.weight_grads,
        state.u.bias_grads,
    ):
        mw2 = state.beta1 * mw + (1.0 - state.beta1) * gw
        mb2 = state.beta1 * mb + (1.0 - state.beta1) * gb
        uw2 = np.maximum(state.beta2 * uw, np.abs(gw))
        ub2 = np.maximum(state.beta2 * ub, np.abs(gb))
        w = layer.weights - scale * mw2 / (uw2 + state.epsilon)
        b = layer.bias - scale * mb2 / (ub2 + state.epsilon)
        new_layers.append(type(layer)(w, b, layer.activation))
        new_m_w.append(mw2)
        new_m_b.append(mb2)
        new_u_w.append(uw2)
        new_u_b.append(ub2)

    new_state = AdamaxState(
        m=GradientSet(new_m_w, new_m_b),
        u=GradientSet(new_u_w, new_u_b),
        step_count=t,
        beta1=state.beta1,
        beta2=state.beta2,
        epsilon=state.epsilon,
    )
    return Mlp(new_layers), new_state
