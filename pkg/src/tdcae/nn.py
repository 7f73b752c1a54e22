"""Minimal dense-network engine: parameter storage, forward evaluation and
exact reverse-mode gradients for stacks of affine layers with tanh or
identity activations.

Everything is float64. Networks here are tiny (tens of neurons), so the
engine favours exactness and checkability over throughput.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, DimensionError, NumericError


class Activation(str, Enum):
    TANH = "tanh"
    IDENTITY = "identity"


def _as_matrix(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NumericError(f"{name} contains non-finite entries")
    return x


@dataclass
class DenseLayer:
    """One affine layer: y = act(x @ weights.T + bias).

    weights has shape (out, in); bias has shape (out,).
    """

    weights: np.ndarray
    bias: np.ndarray
    activation: Activation

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise DimensionError("weights must be 2-D and bias 1-D")
        if self.bias.shape[0] != self.weights.shape[0]:
            raise DimensionError(
                f"bias length {self.bias.shape[0]} != weight rows {self.weights.shape[0]}"
            )
        self.activation = Activation(self.activation)

    @property
    def in_size(self) -> int:
        return self.weights.shape[1]

    @property
    def out_size(self) -> int:
        return self.weights.shape[0]


@dataclass
class Mlp:
    """An ordered stack of shape-compatible dense layers."""

    layers: list[DenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise ConfigError("an Mlp needs at least one layer")
        for k in range(len(self.layers) - 1):
            if self.layers[k].out_size != self.layers[k + 1].in_size:
                raise DimensionError(
                    f"layer {k} outputs {self.layers[k].out_size} values but "
                    f"layer {k + 1} expects {self.layers[k + 1].in_size}"
                )

    @property
    def input_size(self) -> int:
        return self.layers[0].in_size

    @property
    def output_size(self) -> int:
        return self.layers[-1].out_size

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_size] + [layer.out_size for layer in self.layers]

    def n_parameters(self) -> int:
        return sum(l.weights.size + l.bias.size for l in self.layers)

    def copy(self) -> "Mlp":
        return Mlp(
            [
                DenseLayer(l.weights.copy(), l.bias.copy(), l.activation)
                for l in self.layers
            ]
        )


@dataclass
class ActivationTrace:
    """Everything forward() saw, kept for the backward pass."""

    input: np.ndarray
    pre: list[np.ndarray] = field(default_factory=list)
    post: list[np.ndarray] = field(default_factory=list)

    @property
    def output(self) -> np.ndarray:
        return self.post[-1]


@dataclass
class GradientSet:
    """Per-layer parameter gradients, shape-matched to an Mlp."""

    weight_grads: list[np.ndarray]
    bias_grads: list[np.ndarray]

    @classmethod
    def zeros_like(cls, mlp: Mlp) -> "GradientSet":
        return cls(
            [np.zeros_like(l.weights) for l in mlp.layers],
            [np.zeros_like(l.bias) for l in mlp.layers],
        )

    def add_(self, other: "GradientSet") -> "GradientSet":
        """Accumulate another gradient set into this one, in place."""
        for gw, ow in zip(self.weight_grads, other.weight_grads):
            gw += ow
        for gb, ob in zip(self.bias_grads, other.bias_grads):
            gb += ob
        return self

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(g)) for g in self.weight_grads) and all(
            np.all(np.isfinite(g)) for g in self.bias_grads
        )


def init_mlp(layer_sizes: list[int], activations: list[Activation], seed: int) -> Mlp:
    """Build an Mlp with Glorot-uniform weights and zero biases.

    Weights for a layer with fan_in inputs and fan_out outputs are drawn
    uniformly from [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))].
    The same seed always yields bit-identical parameters.
    """
    if len(layer_sizes) < 2:
        raise ConfigError("layer_sizes needs at least an input and an output size")
    if len(activations) != len(layer_sizes) - 1:
        raise ConfigError(
            f"expected {len(layer_sizes) - 1} activations, got {len(activations)}"
        )
    if any(int(s) < 1 for s in layer_sizes):
        raise ConfigError("every layer size must be >= 1")

    rng = np.random.default_rng(int(seed))
    layers = []
    for fan_in, fan_out, act in zip(layer_sizes, layer_sizes[1:], activations):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        layers.append(DenseLayer(weights, np.zeros(fan_out), Activation(act)))
    return Mlp(layers)


def forward(mlp: Mlp, x) -> ActivationTrace:
    """Evaluate the network on a batch, keeping per-layer activations.

    x has shape (batch, input_size); trace.output has shape
    (batch, output_size). Pure: does not touch the Mlp.
    """
    x = _as_matrix(x, "input")
    if x.shape[0] < 1:
        raise DimensionError("batch must contain at least one row")
    if x.shape[1] != mlp.input_size:
        raise DimensionError(
            f"input has {x.shape[1]} columns, network expects {mlp.input_size}"
        )

    trace = ActivationTrace(input=x)
    a = x
    for layer in mlp.layers:
        z = a @ layer.weights.T + layer.bias
        a = np.tanh(z) if layer.activation is Activation.TANH else z
        trace.pre.append(z)
        trace.post.append(a)
    if not np.all(np.isfinite(a)):
        raise NumericError("forward pass produced non-finite output")
    return trace


def backward(
    mlp: Mlp, trace: ActivationTrace, output_cotangent
) -> tuple[GradientSet, np.ndarray]:
    """Reverse-mode pass: cotangent of the output -> parameter gradients
    plus the cotangent of the input.

    The input cotangent matters because the consistency loss differentiates
    through separate encoder evaluations at neighbouring timesteps.
    """
    g = _as_matrix(output_cotangent, "output_cotangent")
    if g.shape != trace.output.shape:
        raise DimensionError(
            f"cotangent shape {g.shape} != output shape {trace.output.shape}"
        )

    weight_grads: list[np.ndarray] = [None] * len(mlp.layers)  # type: ignore[list-item]
    bias_grads: list[np.ndarray] = [None] * len(mlp.layers)  # type: ignore[list-item]

    for k in range(len(mlp.layers) - 1, -1, -1):
        layer = mlp.layers[k]
        post = trace.post[k]
        if layer.activation is Activation.TANH:
            g = g * (1.0 - post * post)  # tanh' from the stored post-activation
        a_in = trace.post[k - 1] if k > 0 else trace.input
        weight_grads[k] = g.T @ a_in
        bias_grads[k] = g.sum(axis=0)
        g = g @ layer.weights

    return GradientSet(weight_grads, bias_grads), g
