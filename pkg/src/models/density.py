"""
Density matrices ρ = Σ_i p_i |c_i⟩⟨c_i| over document positions, and the trace loss.
"""

from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Sequence, Union

import numpy as np

from src.models.encoder import FeatureMap
from src.models.params import ParameterStore
from src.numerics import ShapeError, Tensor
from src.numerics import ops

DistMode = Literal["softmax", "free"]
Side = Literal["user", "item"]


@dataclass
class PositionDistribution:
    """Weights over positions; `logits` is None for owners never seen in training."""
    length: int
    mode: DistMode = "softmax"
    logits: Optional[Tensor] = None
    dtype: type = np.float64

    def probabilities(self) -> Tensor:
        if self.logits is None:
            return Tensor(np.full(self.length, 1.0 / self.length), dtype=self.dtype)
        if self.mode == "softmax":
            return ops.softmax(self.logits)
        return self.logits


class PositionTable:
    """One distribution per user and per item, stored as `position.<side>.<owner>`."""

    def __init__(self, store: ParameterStore, length: int, mode: DistMode = "softmax"):
        if mode not in ("softmax", "free"):
            raise ValueError(f"unknown position distribution mode {mode!r}")
        self.store = store
        self.length = length
        self.mode = mode

    @staticmethod
    def key(side: Side, owner: str) -> str:
        return f"position.{side}.{owner}"

    def register(self, side: Side, owners: Iterable[str]) -> None:
        # softmax logits start at zero, free weights at 1/L: both give uniform p
        init = 0.0 if self.mode == "softmax" else 1.0 / self.length
        for owner in owners:
            if self.key(side, owner) not in self.store:
                self.store.add(self.key(side, owner), np.full(self.length, init))

    def get(self, side: Side, owner: str) -> PositionDistribution:
        return PositionDistribution(self.length, self.mode, self.store.get(self.key(side, owner)),
                                    self.store.dtype)


@dataclass
class DensityMatrix:
    values: Tensor              # n x n
    owner_id: str
    probabilities: Tensor       # L

    @property
    def n(self) -> int:
        return self.values.shape[0]


def unit_states(C: Union[FeatureMap, Tensor]) -> Tensor:
    """Columns of C scaled to unit norm; zero columns stay zero."""
    values = C.values if isinstance(C, FeatureMap) else C
    return ops.l2_normalize(values, axis=0)


def density_matrix(states: Tensor, dist: Union[PositionDistribution, Tensor],
                   owner_id: str = "") -> DensityMatrix:
    """ρ = (S · diag(p)) · Sᵀ."""
    p = dist.probabilities() if isinstance(dist, PositionDistribution) else dist
    if p.ndim != 1 or p.shape[0] != states.shape[1]:
        raise ShapeError(f"density_matrix: states {states.shape} do not match distribution {p.shape}")
    weighted = ops.mul(states, ops.reshape(p, (1, -1)))
    return DensityMatrix(ops.matmul(weighted, ops.transpose(states)), owner_id, p)


def _mean_trace_gap(rhos: Sequence[DensityMatrix]) -> Tensor:
    gaps = [ops.square(ops.sub(ops.trace(rho.values), 1.0)) for rho in rhos]
    summed = gaps[0] if len(gaps) == 1 else ops.total(ops.concat(
        [ops.reshape(g, (1,)) for g in gaps]))
    return ops.scale(summed, 1.0 / len(gaps))


def trace_loss(user_rhos: Sequence[DensityMatrix], item_rhos: Sequence[DensityMatrix]) -> Tensor:
    """mean_u (tr ρ_u − 1)² + mean_v (tr ρ_v − 1)²."""
    if not user_rhos or not item_rhos:
        raise ValueError("trace_loss needs at least one user and one item density matrix")
    return ops.add(_mean_trace_gap(user_rhos), _mean_trace_gap(item_rhos))
