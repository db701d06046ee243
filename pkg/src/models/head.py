"""
Fully connected rating head and the training objective.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.models.attention import FusedRepresentation
from src.models.params import ParameterStore, glorot_uniform
from src.numerics import ShapeError, Tensor, as_tensor
from src.numerics import ops
from src.schemas import ConfigError


@dataclass
class DenseStack:
    """m layers; every layer but the last is ELU + dropout, the last is linear with one output."""
    layers: List[Tuple[Tensor, Tensor]]
    dropout_rate: float = 0.5
    hidden_activation: str = "elu"

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[1]

    @classmethod
    def create(cls, store: ParameterStore, input_dim: int, fc_layers: int, hidden: int,
               dropout_rate: float, rng: np.random.Generator,
               output_bias: float = 0.0) -> "DenseStack":
        dims = [input_dim] + [hidden] * (fc_layers - 1) + [1]
        layers = []
        for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
            weight = store.add(f"head.layer{i}.weight",
                               glorot_uniform(rng, (fan_out, fan_in), fan_in, fan_out))
            bias = store.add(f"head.layer{i}.bias", np.zeros((fan_out, 1)))
            layers.append((weight, bias))
        layers[-1][1].data[...] = output_bias
        return cls(layers, dropout_rate)


def predict(z: Union[FusedRepresentation, Tensor], stack: DenseStack, training: bool = False,
            rng: Optional[np.random.Generator] = None) -> Tensor:
    """ŷ as a 0-d tensor; dropout only runs when `training`."""
    z = z.z if isinstance(z, FusedRepresentation) else z
    if z.ndim != 1 or z.shape[0] != stack.input_dim:
        raise ShapeError(f"predict: representation {z.shape} does not fit input dim {stack.input_dim}")
    if training and stack.dropout_rate > 0 and rng is None:
        raise ValueError("training with dropout needs a random generator")
    h = ops.reshape(z, (z.shape[0], 1))
    last = len(stack.layers) - 1
    for i, (weight, bias) in enumerate(stack.layers):
        h = ops.add(ops.matmul(weight, h), bias)
        if i < last:
            h = ops.activation(h, stack.hidden_activation)
            h = ops.dropout(h, stack.dropout_rate, rng, training)
    return ops.reshape(h, ())


def rating_loss(predictions: Union[Tensor, Sequence[float]], truths: Union[Tensor, Sequence[float]]) -> Tensor:
    """Mean squared error."""
    predictions = as_tensor(predictions)
    truths = as_tensor(truths, dtype=predictions.dtype)
    if predictions.shape != truths.shape or predictions.ndim != 1 or predictions.shape[0] < 1:
        raise ShapeError(f"rating_loss: predictions {predictions.shape} vs truths {truths.shape}")
    return ops.mean(ops.square(ops.sub(predictions, truths)))


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")


def total_loss(l_trace: Tensor, l_rating: Tensor, weights: LossWeights) -> Tensor:
    """α·L_trace + (1 − α)·L_rating."""
    return ops.add(ops.scale(as_tensor(l_trace), weights.alpha),
                   ops.scale(as_tensor(l_rating), 1.0 - weights.alpha))
