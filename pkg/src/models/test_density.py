import numpy as np
import numpy.testing as npt
import pytest

from src.models import (
    DensityMatrix,
    ParameterStore,
    PositionDistribution,
    PositionTable,
    density_matrix,
    trace_loss,
    unit_states,
)
from src.numerics import ShapeError, Tensor, gradient_check
from src.numerics import ops


def _random_instance(rng, n, L, zero_fraction=0.0):
    C = rng.normal(size=(n, L))
    C[:, rng.random(L) < zero_fraction] = 0.0
    logits = Tensor(rng.normal(size=L), requires_grad=True)
    return Tensor(C), PositionDistribution(L, "softmax", logits)


def _rho(trace_value):
    return DensityMatrix(Tensor(np.diag([trace_value, 0.0])), "x", Tensor([1.0]))


def test_unit_states_examples():
    C = np.zeros((4, 2))
    C[:2, 0] = [3.0, 4.0]
    states = unit_states(Tensor(C)).data
    npt.assert_allclose(states[:, 0], [0.6, 0.8, 0.0, 0.0])
    npt.assert_array_equal(states[:, 1], 0.0)


def test_unit_state_columns_have_unit_norm():
    rng = np.random.default_rng(0)
    states = unit_states(Tensor(rng.normal(size=(5, 30)))).data
    npt.assert_allclose(np.linalg.norm(states, axis=0), 1.0, atol=1e-9)


def test_pure_state():
    rho = density_matrix(Tensor([[1.0], [0.0]]), Tensor([1.0]))
    npt.assert_array_equal(rho.values.data, [[1.0, 0.0], [0.0, 0.0]])
    assert np.trace(rho.values.data) == 1.0


def test_orthogonal_mixture():
    rho = density_matrix(Tensor(np.eye(2)), Tensor([0.5, 0.5]))
    npt.assert_array_equal(rho.values.data, np.diag([0.5, 0.5]))


def test_matches_outer_product_oracle():
    rng = np.random.default_rng(1)
    C, dist = _random_instance(rng, 4, 6)
    states = unit_states(C)
    rho = density_matrix(states, dist, "u1").values.data
    p = dist.probabilities().data
    S = states.data
    brute = sum(p[i] * np.outer(S[:, i], S[:, i]) for i in range(6))
    npt.assert_allclose(rho, brute, atol=1e-12)
    npt.assert_allclose(rho, rho.T, atol=1e-12)
    assert np.linalg.eigvalsh(rho).min() >= -1e-10


def test_randomized_invariants():
    rng = np.random.default_rng(2)
    for _ in range(200):
        n, L = rng.integers(1, 17), rng.integers(1, 33)
        C, dist = _random_instance(rng, n, L, zero_fraction=0.3)
        states = unit_states(C)
        rho = density_matrix(states, dist).values.data
        p = dist.probabilities().data
        live = np.linalg.norm(states.data, axis=0) > 0
        assert np.abs(rho - rho.T).max() <= 1e-8
        assert np.linalg.eigvalsh((rho + rho.T) / 2).min() >= -1e-8
        assert abs(np.trace(rho) - p[live].sum()) <= 1e-9
        if live.all():
            assert abs(np.trace(rho) - 1.0) <= 1e-6


def test_dimension_mismatch():
    with pytest.raises(ShapeError):
        density_matrix(Tensor(np.eye(3)), Tensor([0.5, 0.5]))


def test_trace_loss_examples():
    assert trace_loss([_rho(1.0)], [_rho(1.0)]).item() == 0.0
    assert trace_loss([_rho(0.5)], [_rho(1.0)]).item() == pytest.approx(0.25)
    # averaged per side
    assert trace_loss([_rho(0.5), _rho(1.0)], [_rho(1.0)]).item() == pytest.approx(0.125)


def test_trace_loss_needs_both_sides():
    with pytest.raises(ValueError):
        trace_loss([], [_rho(1.0)])


def test_softmax_mode_without_padding_has_negligible_trace_loss():
    rng = np.random.default_rng(3)
    users = [density_matrix(unit_states(C), d) for C, d in (_random_instance(rng, 4, 9) for _ in range(3))]
    items = [density_matrix(unit_states(C), d) for C, d in (_random_instance(rng, 4, 9) for _ in range(2))]
    assert trace_loss(users, items).item() < 1e-10


@pytest.mark.parametrize("mode", ["softmax", "free"])
def test_trace_loss_gradient_wrt_position_weights(mode):
    rng = np.random.default_rng(4)
    store = ParameterStore()
    table = PositionTable(store, 8, mode)
    table.register("user", ["u"])
    table.register("item", ["v"])
    store["position.user.u"].data[...] = rng.normal(scale=0.3, size=8)
    store["position.item.v"].data[...] = rng.normal(scale=0.3, size=8)
    C_u, _ = _random_instance(rng, 3, 8, zero_fraction=0.4)
    C_v, _ = _random_instance(rng, 3, 8, zero_fraction=0.4)

    def loss():
        rho_u = density_matrix(unit_states(C_u), table.get("user", "u"))
        rho_v = density_matrix(unit_states(C_v), table.get("item", "v"))
        return trace_loss([rho_u], [rho_v])

    assert gradient_check(loss, store.values()) <= 1e-4


def test_position_table_initialisation_and_cold_owners():
    store = ParameterStore()
    softmax = PositionTable(store, 4, "softmax")
    softmax.register("user", ["a", "b"])
    assert list(store) == ["position.user.a", "position.user.b"]
    npt.assert_allclose(softmax.get("user", "a").probabilities().data, [0.25] * 4)
    cold = softmax.get("item", "never-seen")
    assert cold.logits is None
    npt.assert_allclose(cold.probabilities().data, [0.25] * 4)

    free = PositionTable(ParameterStore(), 5, "free")
    free.register("item", ["x"])
    npt.assert_allclose(free.get("item", "x").probabilities().data, [0.2] * 5)

    with pytest.raises(ValueError):
        PositionTable(ParameterStore(), 4, "sparse")
