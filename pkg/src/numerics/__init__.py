"""
Minimal dense-tensor engine with reverse-mode gradients.
"""

from src.numerics.tensor import (
    DEFAULT_DTYPE,
    GradientTape,
    NonFiniteError,
    NumericsError,
    ShapeError,
    Tensor,
    as_tensor,
)
from src.numerics.gradcheck import NonDeterministicLossError, gradient_check
