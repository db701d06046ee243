import numpy as np
import numpy.testing as npt
import pytest

from src.models import ParameterStore
from src.numerics import GradientTape
from src.numerics import ops
from src.schemas import ConfigError
from src.trainer import SGD, Adam, make_optimizer


def _quadratic_store():
    store = ParameterStore()
    store.add("w", np.array([3.0, -2.0]))
    return store


def _step(store, optimizer):
    with GradientTape() as tape:
        loss = ops.total(ops.square(store["w"]))
    tape.backward(loss)
    optimizer.step()
    optimizer.zero_grad()
    return loss.item()


def test_sgd_step():
    store = _quadratic_store()
    _step(store, SGD(store, lr=0.1))
    npt.assert_allclose(store["w"].data, [3.0 - 0.6, -2.0 + 0.4])
    npt.assert_array_equal(store["w"].grad, 0.0)


def test_first_adam_step_moves_each_weight_by_lr():
    store = _quadratic_store()
    _step(store, Adam(store, lr=0.01))
    npt.assert_allclose(store["w"].data, [2.99, -1.99], atol=1e-8)


def test_adam_minimises_a_quadratic():
    store = _quadratic_store()
    optimizer = Adam(store, lr=0.1)
    losses = [_step(store, optimizer) for _ in range(300)]
    assert losses[-1] < 0.01 * losses[0]


def test_adam_picks_up_parameters_added_later():
    store = _quadratic_store()
    optimizer = Adam(store, lr=0.01)
    _step(store, optimizer)
    store.add("late", np.array([1.0]))
    with GradientTape() as tape:
        loss = ops.total(ops.square(store["late"]))
    tape.backward(loss)
    optimizer.step()
    assert store["late"].data[0] < 1.0


def test_make_optimizer():
    store = _quadratic_store()
    assert isinstance(make_optimizer("adam", store, 0.1), Adam)
    assert isinstance(make_optimizer("sgd", store, 0.1), SGD)
    with pytest.raises(ConfigError):
        make_optimizer("rmsprop", store, 0.1)
