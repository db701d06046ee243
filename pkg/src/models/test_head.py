import numpy as np
import pytest

from src.models import DenseStack, LossWeights, ParameterStore, predict, rating_loss, total_loss
from src.numerics import ShapeError, Tensor
from src.schemas import ConfigError


def _stack(*layers, dropout_rate=0.0):
    return DenseStack([(Tensor(w, requires_grad=True), Tensor(np.reshape(b, (-1, 1)), requires_grad=True))
                       for w, b in layers], dropout_rate)


def test_single_linear_layer_on_zeros():
    n = 2
    stack = _stack((np.ones((1, 3 * n + 1)), [0.0]))
    assert predict(Tensor(np.zeros(3 * n + 1)), stack).item() == 0.0


def test_two_layers_by_hand():
    W0 = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    W1 = np.array([[2.0, 1.0]])
    stack = _stack((W0, [0.0, 0.0]), (W1, [0.5]))
    z = Tensor([1.5, -1.0, 7.0])
    # elu(1.5) = 1.5, elu(-1) = e^-1 - 1
    expected = 2.0 * 1.5 + (np.exp(-1.0) - 1.0) + 0.5
    assert predict(z, stack).item() == pytest.approx(expected, abs=1e-12)


def test_inference_is_deterministic():
    rng = np.random.default_rng(0)
    stack = DenseStack.create(ParameterStore(), 7, 3, 5, 0.5, rng, output_bias=3.5)
    z = Tensor(rng.normal(size=7))
    first = predict(z, stack, training=False)
    second = predict(z, stack, training=False)
    assert first.data.tobytes() == second.data.tobytes()


def test_training_dropout_uses_the_generator():
    rng = np.random.default_rng(1)
    stack = DenseStack.create(ParameterStore(), 4, 2, 16, 0.5, rng)
    z = Tensor(rng.normal(size=4))
    outputs = {predict(z, stack, training=True, rng=np.random.default_rng(s)).item() for s in range(5)}
    assert len(outputs) > 1
    with pytest.raises(ValueError):
        predict(z, stack, training=True)


def test_created_stack_shapes_and_output_bias():
    store = ParameterStore()
    stack = DenseStack.create(store, 13, 3, 8, 0.5, np.random.default_rng(2), output_bias=4.25)
    assert [w.shape for w, _ in stack.layers] == [(8, 13), (8, 8), (1, 8)]
    assert stack.layers[-1][1].data.item() == 4.25
    assert list(store)[-1] == "head.layer2.bias"


def test_wrong_representation_length():
    stack = _stack((np.ones((1, 4)), [0.0]))
    with pytest.raises(ShapeError):
        predict(Tensor(np.zeros(5)), stack)


def test_rating_loss_examples():
    assert rating_loss([3.0, 4.0], [3.0, 4.0]).item() == 0.0
    assert rating_loss([4.0], [5.0]).item() == 1.0
    assert rating_loss([4.0, 3.0], [5.0, 1.0]).item() == 2.5
    with pytest.raises(ShapeError):
        rating_loss([1.0, 2.0], [1.0])


def test_total_loss_weighting():
    trace, rating = Tensor(0.2), Tensor(1.0)
    assert total_loss(trace, rating, LossWeights(0.0)).item() == 1.0
    assert total_loss(trace, rating, LossWeights(1.0)).item() == 0.2
    assert total_loss(trace, rating, LossWeights(0.3)).item() == pytest.approx(0.76, abs=1e-12)


@pytest.mark.parametrize("alpha", [-0.1, 1.5])
def test_alpha_outside_unit_interval(alpha):
    with pytest.raises(ConfigError):
        LossWeights(alpha)
