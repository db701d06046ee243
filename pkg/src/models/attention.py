"""
Mutual attention between a user and an item density matrix, and the fused vector
z = [tr(M) ⊕ diag(M) ⊕ z_u ⊕ z_v].
"""

from dataclasses import dataclass
from typing import Literal, Optional, Tuple, Union

from src.models.density import DensityMatrix
from src.numerics import ShapeError, Tensor
from src.numerics import ops

Pooling = Literal["mean", "max"]


def _values(rho: Union[DensityMatrix, Tensor]) -> Tensor:
    return rho.values if isinstance(rho, DensityMatrix) else rho


@dataclass
class MutualAttention:
    M: Tensor
    trace: Tensor
    diag: Tensor
    a_u: Tensor
    a_v: Tensor


@dataclass
class FusedRepresentation:
    z: Tensor
    attention: Optional[MutualAttention] = None

    @property
    def length(self) -> int:
        return self.z.shape[0]


def mutual_matrix(rho_u: Union[DensityMatrix, Tensor], rho_v: Union[DensityMatrix, Tensor]) -> Tensor:
    """M = ρ_u · ρ_vᵀ."""
    u, v = _values(rho_u), _values(rho_v)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ShapeError(f"mutual_matrix: density matrices {u.shape} and {v.shape} differ")
    return ops.matmul(u, ops.transpose(v))


def pooled_attention(M: Tensor, pooling: Pooling = "mean") -> Tuple[Tensor, Tensor]:
    """softmax of row pools (a_u) and column pools (a_v) of M."""
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"pooled_attention: expected a square matrix, got {M.shape}")
    if pooling == "mean":
        theta, gamma = ops.mean(M, axis=1), ops.mean(M, axis=0)
    elif pooling == "max":
        theta, gamma = ops.amax(M, axis=1), ops.amax(M, axis=0)
    else:
        raise ValueError(f"unknown pooling {pooling!r}")
    return ops.softmax(theta), ops.softmax(gamma)


def mutual_attention(M: Tensor, pooling: Pooling = "mean") -> MutualAttention:
    a_u, a_v = pooled_attention(M, pooling)
    return MutualAttention(M=M, trace=ops.trace(M), diag=ops.diagonal(M), a_u=a_u, a_v=a_v)


def weighted_states(rho_u: Tensor, rho_v: Tensor, a_u: Tensor, a_v: Tensor) -> Tuple[Tensor, Tensor]:
    """z_u = (ρ_u · a_u)ᵀ and z_v = a_vᵀ · ρ_v, both as length-n vectors."""
    n = rho_u.shape[0]
    z_u = ops.matmul(rho_u, ops.reshape(a_u, (n, 1)))
    z_v = ops.matmul(ops.reshape(a_v, (1, n)), rho_v)
    return ops.reshape(z_u, (n,)), ops.reshape(z_v, (n,))


def fuse(rho_u: Union[DensityMatrix, Tensor], rho_v: Union[DensityMatrix, Tensor],
         M: Tensor, pooling: Pooling = "mean") -> FusedRepresentation:
    u, v = _values(rho_u), _values(rho_v)
    if M.shape != u.shape or u.shape != v.shape:
        raise ShapeError(f"fuse: inconsistent shapes {u.shape}, {v.shape}, {M.shape}")
    attention = mutual_attention(M, pooling)
    z_u, z_v = weighted_states(u, v, attention.a_u, attention.a_v)
    z = ops.concat([ops.reshape(attention.trace, (1,)), attention.diag, z_u, z_v])
    return FusedRepresentation(z, attention)
