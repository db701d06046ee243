"""
Dense tensors and the gradient tape that records operations on them.

A `Tensor` wraps a numpy array. Operations from `src.numerics.ops` record
themselves on the innermost active `GradientTape` whenever one of their
inputs requires a gradient; `GradientTape.backward` then replays the record
in exact reverse order.
"""

import threading
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

DEFAULT_DTYPE = np.float64

ArrayLike = Union[np.ndarray, float, int, Sequence[float], Sequence[Sequence[float]]]


class NumericsError(Exception):
    """Base class for tensor-engine errors."""


class ShapeError(NumericsError, ValueError):
    """Operands have incompatible shapes."""


class NonFiniteError(NumericsError, FloatingPointError):
    """A forward value or a gradient became NaN or infinite."""

    def __init__(self, tensor_name: str, stage: str = "forward"):
        self.tensor_name = tensor_name
        self.stage = stage
        super().__init__(f"non-finite values in {stage} pass at tensor '{tensor_name}'")


class Tensor:
    """Dense real array with an optional gradient buffer.

    `grad` is allocated iff `requires_grad`; it always has the shape of `data`.
    """

    def __init__(self, data: ArrayLike, requires_grad: bool = False,
                 name: Optional[str] = None, dtype=None):
        self.data = np.array(data, dtype=dtype or DEFAULT_DTYPE)
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.data) if requires_grad else None
        self.name = name

    @classmethod
    def _wrap(cls, data: np.ndarray, requires_grad: bool, name: Optional[str]) -> "Tensor":
        # no copy: used by ops for freshly computed arrays
        out = cls.__new__(cls)
        out.data = data
        out.requires_grad = requires_grad
        out.grad = np.zeros_like(data) if requires_grad else None
        out.name = name
        return out

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad.fill(0.0)

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad}{label})"

    # operator sugar, delegating to src.numerics.ops
    def __add__(self, other):
        from src.numerics import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from src.numerics import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from src.numerics import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from src.numerics import ops
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from src.numerics import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from src.numerics import ops
        return ops.matmul(self, other)

    @property
    def T(self) -> "Tensor":
        from src.numerics import ops
        return ops.transpose(self)


def as_tensor(value: Union[Tensor, ArrayLike], dtype=None) -> Tensor:
    """Return `value` unchanged if it is a Tensor, else a constant Tensor."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=False, dtype=dtype)


def ensure_finite(array: np.ndarray, name: str, stage: str = "forward") -> None:
    if not np.all(np.isfinite(array)):
        raise NonFiniteError(name, stage)


BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass
class TapeEntry:
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


_local = threading.local()


def _tape_stack() -> List["GradientTape"]:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def current_tape() -> Optional["GradientTape"]:
    """Innermost active tape of the calling thread, if any."""
    stack = _tape_stack()
    return stack[-1] if stack else None


class GradientTape:
    """Ordered record of executed operations.

    Tapes are thread-local: operations only record on a tape entered in the
    same thread, so independent models can train on separate threads.

    Usage:
        with GradientTape() as tape:
            loss = model_loss(...)
        tape.backward(loss)
    """

    def __init__(self):
        self.entries: List[TapeEntry] = []

    def __enter__(self) -> "GradientTape":
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self.entries)

    def record(self, op: str, inputs: Tuple[Tensor, ...], output: Tensor,
               backward: BackwardFn) -> None:
        self.entries.append(TapeEntry(op, inputs, output, backward))

    def backward(self, loss: Tensor) -> None:
        """Propagate d(loss)/d(x) into `grad` of every recorded tensor.

        Leaf gradients accumulate, so callers zero them between steps.
        """
        if loss.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        if not loss.requires_grad:
            raise NumericsError("loss does not depend on any tensor that requires grad")
        loss.grad += np.ones_like(loss.data)

        for entry in reversed(self.entries):
            upstream = entry.output.grad
            if not upstream.any():
                continue
            input_grads = entry.backward(upstream)
            for tensor, grad in zip(entry.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                ensure_finite(grad, tensor.name or entry.op, stage="backward")
                tensor.grad += grad
