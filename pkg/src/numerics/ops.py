"""
Differentiable primitives.

Each primitive computes its forward value with numpy and, when a tape is
active and an input requires a gradient, records a closure mapping the
upstream gradient to one gradient per input (None for inputs without one).
Every layer of the model is written in terms of these functions only.
"""

from typing import Literal, Optional, Sequence, Tuple, Union

import numpy as np

from src.numerics.tensor import (
    Tensor,
    ShapeError,
    as_tensor,
    current_tape,
    ensure_finite,
)

ActivationKind = Literal["relu", "elu", "identity"]
ACTIVATIONS = ("relu", "elu", "identity")

Operand = Union[Tensor, float, int, np.ndarray]


def _emit(op: str, data: np.ndarray, inputs: Tuple[Tensor, ...], backward) -> Tensor:
    ensure_finite(data, op)
    tape = current_tape()
    track = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor._wrap(data, requires_grad=track, name=op)
    if track:
        tape.record(op, inputs, out, backward)
    return out


def _pair(a: Operand, b: Operand) -> Tuple[Tensor, Tensor]:
    if isinstance(a, Tensor) and not isinstance(b, Tensor):
        return a, as_tensor(b, dtype=a.dtype)
    if isinstance(b, Tensor) and not isinstance(a, Tensor):
        return as_tensor(a, dtype=b.dtype), b
    return as_tensor(a), as_tensor(b)


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum `grad` over the axes numpy broadcast to reach it from `shape`."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: cannot broadcast shapes {a.shape} and {b.shape}") from None


# ---------------------------------------------------------------------------
# elementwise arithmetic


def add(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("add", a, b)

    def backward(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return _emit("add", a.data + b.data, (a, b), backward)


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("sub", a, b)

    def backward(g):
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return _emit("sub", a.data - b.data, (a, b), backward)


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("mul", a, b)

    def backward(g):
        return unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)

    return _emit("mul", a.data * b.data, (a, b), backward)


def scale(x: Tensor, factor: float) -> Tensor:
    def backward(g):
        return (g * factor,)

    return _emit("scale", x.data * factor, (x,), backward)


def square(x: Tensor) -> Tensor:
    def backward(g):
        return (2.0 * x.data * g,)

    return _emit("square", x.data * x.data, (x,), backward)


# ---------------------------------------------------------------------------
# linear algebra and shape manipulation


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """C = A·B for 2-D operands; dA = dC·Bᵀ, dB = Aᵀ·dC."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: dimension mismatch between {a.shape} and {b.shape}")

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return _emit("matmul", a.data @ b.data, (a, b), backward)


def transpose(x: Tensor) -> Tensor:
    if x.ndim != 2:
        raise ShapeError(f"transpose: expected a matrix, got shape {x.shape}")

    def backward(g):
        return (g.T,)

    return _emit("transpose", x.data.T.copy(), (x,), backward)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(shape)
    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: cannot view {x.shape} as {shape}") from None

    def backward(g):
        return (g.reshape(x.shape),)

    return _emit("reshape", data.copy(), (x,), backward)


def index(x: Tensor, key) -> Tensor:
    """Basic (slice/integer) indexing."""
    data = x.data[key]

    def backward(g):
        full = np.zeros_like(x.data)
        full[key] = g
        return (full,)

    return _emit("index", np.array(data, copy=True), (x,), backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    if not tensors:
        raise ShapeError("concat: no tensors given")
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as exc:
        shapes = [t.shape for t in tensors]
        raise ShapeError(f"concat: incompatible shapes {shapes} on axis {axis}") from exc
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _emit("concat", data, tensors, backward)


def total(x: Tensor, axis: Optional[int] = None) -> Tensor:
    """Sum over `axis` (all elements when None)."""
    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, x.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), x.shape).copy(),)

    return _emit("sum", np.asarray(x.data.sum(axis=axis)), (x,), backward)


def mean(x: Tensor, axis: Optional[int] = None) -> Tensor:
    count = x.size if axis is None else x.shape[axis]
    return scale(total(x, axis), 1.0 / count)


def amax(x: Tensor, axis: int) -> Tensor:
    """Maximum over `axis`; the gradient goes to the first maximal entry."""
    winners = np.argmax(x.data, axis=axis)

    def backward(g):
        full = np.zeros_like(x.data)
        np.put_along_axis(full, np.expand_dims(winners, axis), np.expand_dims(g, axis), axis=axis)
        return (full,)

    return _emit("amax", np.take_along_axis(
        x.data, np.expand_dims(winners, axis), axis=axis).squeeze(axis), (x,), backward)


def trace(x: Tensor) -> Tensor:
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ShapeError(f"trace: expected a square matrix, got shape {x.shape}")

    def backward(g):
        return (g * np.eye(x.shape[0], dtype=x.dtype),)

    return _emit("trace", np.asarray(np.trace(x.data)), (x,), backward)


def diagonal(x: Tensor) -> Tensor:
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ShapeError(f"diagonal: expected a square matrix, got shape {x.shape}")

    def backward(g):
        return (np.diag(g),)

    return _emit("diagonal", np.diagonal(x.data).copy(), (x,), backward)


def shift_columns(x: Tensor, offset: int) -> Tensor:
    """out[:, i] = x[:, i + offset], zero where i + offset runs past the end."""
    if x.ndim != 2 or offset < 0:
        raise ShapeError(f"shift_columns: bad input shape {x.shape} or offset {offset}")
    length = x.shape[1]
    data = np.zeros_like(x.data)
    if offset < length:
        data[:, :length - offset] = x.data[:, offset:]

    def backward(g):
        full = np.zeros_like(x.data)
        if offset < length:
            full[:, offset:] = g[:, :length - offset]
        return (full,)

    return _emit("shift_columns", data, (x,), backward)


def embedding_lookup(table: Tensor, token_ids: np.ndarray, pad_id: int = 0) -> Tensor:
    """Select columns of a d × |V| table; PAD columns come out as zeros.

    PAD positions receive no gradient, so the PAD column stays frozen.
    """
    token_ids = np.asarray(token_ids, dtype=np.int64)
    vocab_size = table.shape[1]
    if token_ids.size and (token_ids.min() < 0 or token_ids.max() >= vocab_size):
        bad = token_ids[(token_ids < 0) | (token_ids >= vocab_size)][0]
        raise IndexError(f"token id {bad} out of range for vocabulary of size {vocab_size}")
    real = token_ids != pad_id
    data = table.data[:, token_ids]
    data[:, ~real] = 0.0

    def backward(g):
        full = np.zeros_like(table.data)
        np.add.at(full.T, token_ids[real], g[:, real].T)
        return (full,)

    return _emit("embedding_lookup", data, (table,), backward)


# ---------------------------------------------------------------------------
# nonlinearities and normalisation


def activation(x: Tensor, kind: ActivationKind) -> Tensor:
    """relu, elu or identity; relu'(0) = 0 and elu'(0) = 1."""
    if kind == "relu":
        mask = x.data > 0
        data = np.where(mask, x.data, 0.0)

        def backward(g):
            return (g * mask,)
    elif kind == "elu":
        negative = np.minimum(x.data, 0.0)  # exp only ever sees non-positive input
        data = np.where(x.data > 0, x.data, np.expm1(negative))
        slope = np.where(x.data >= 0, 1.0, np.exp(negative))

        def backward(g):
            return (g * slope,)
    elif kind == "identity":
        data = x.data.copy()

        def backward(g):
            return (g,)
    else:
        raise ValueError(f"unknown activation {kind!r}; expected one of {ACTIVATIONS}")
    return _emit(kind, data.astype(x.dtype, copy=False), (x,), backward)


def softmax(v: Tensor) -> Tensor:
    """Numerically stable softmax of a vector."""
    if v.ndim != 1 or v.shape[0] < 1:
        raise ShapeError(f"softmax: expected a non-empty vector, got shape {v.shape}")
    shifted = np.exp(v.data - v.data.max())
    out = shifted / shifted.sum()

    def backward(g):
        return (out * (g - np.dot(g, out)),)

    return _emit("softmax", out, (v,), backward)


def l2_normalize(v: Tensor, epsilon: float = 1e-12, axis: int = 0) -> Tensor:
    """v/||v||₂ along `axis`; slices with norm below epsilon become zero.

    For a vector this is the plain normalisation; for a matrix with axis=0
    every column is normalised independently.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    norms = np.sqrt(np.sum(v.data * v.data, axis=axis, keepdims=True))
    live = norms >= epsilon
    safe = np.where(live, norms, 1.0)
    out = np.where(live, v.data / safe, 0.0)

    def backward(g):
        radial = np.sum(g * out, axis=axis, keepdims=True)
        return (np.where(live, (g - out * radial) / safe, 0.0),)

    return _emit("l2_normalize", out, (v,), backward)


def dropout(x: Tensor, rate: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout: kept units are scaled by 1/(1-rate) during training."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)

    def backward(g):
        return (g * keep,)

    return _emit("dropout", x.data * keep, (x,), backward)
