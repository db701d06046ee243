from typing import Callable, Iterable, Optional

import numpy as np

from src.numerics.tensor import GradientTape, NumericsError, Tensor
from src.utils.logging_config import setup_logger

logger = setup_logger('numerics')


class NonDeterministicLossError(NumericsError):
    """Two forward passes with identical parameters disagreed."""


def gradient_check(loss_fn: Callable[[], Tensor], params: Iterable[Tensor],
                   step: float = 1e-5, names: Optional[Iterable[str]] = None) -> float:
    """Compare tape gradients against central finite differences.

    Args:
        loss_fn: zero-argument callable returning a scalar Tensor; must be
            deterministic (dropout off)
        params: tensors to perturb; each must require grad
        step: finite-difference step h, within [1e-6, 1e-4]
        names: optional labels for the log line naming the worst parameter

    Returns:
        max over all elements of |g_tape - g_fd| / max(1, |g_fd|)
    """
    if not 1e-6 <= step <= 1e-4:
        raise ValueError(f"step must be within [1e-6, 1e-4], got {step}")
    params = list(params)
    labels = list(names) if names is not None else [p.name or f"param{i}" for i, p in enumerate(params)]

    first, second = loss_fn().item(), loss_fn().item()
    if first != second:
        raise NonDeterministicLossError(
            f"loss_fn returned {first!r} then {second!r} for identical parameters; "
            "disable dropout before checking gradients")

    for param in params:
        if not param.requires_grad:
            raise ValueError(f"parameter {param!r} does not require grad")
        param.zero_grad()
    with GradientTape() as tape:
        loss = loss_fn()
    tape.backward(loss)
    analytic = [param.grad.copy() for param in params]

    worst, worst_label = 0.0, None
    for label, param, grad in zip(labels, params, analytic):
        flat_grad = grad.reshape(-1)
        for i in range(param.size):
            original = param.data.flat[i]
            param.data.flat[i] = original + step
            plus = loss_fn().item()
            param.data.flat[i] = original - step
            minus = loss_fn().item()
            param.data.flat[i] = original
            numeric = (plus - minus) / (2.0 * step)
            error = abs(flat_grad[i] - numeric) / max(1.0, abs(numeric))
            if error > worst:
                worst, worst_label = error, f"{label}[{i}]"
        param.zero_grad()

    logger.debug(f"gradient check: max relative error {worst:.3e} at {worst_label}")
    return worst
