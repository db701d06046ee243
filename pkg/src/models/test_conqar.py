import numpy as np
import numpy.testing as npt
import pytest

from src.corpus import ReviewIndex, ReviewRecord, build_vocab
from src.models import ConQARModel, LossWeights, forward, rating_loss, total_loss, trace_loss
from src.numerics import gradient_check
from src.numerics import ops
from src.schemas import ConfigError, TrainConfig

TOY_REVIEWS = [
    ReviewRecord("u1", "v1", 5.0, "love this great sound", "r1"),
    ReviewRecord("u1", "v2", 2.0, "terrible cheap strings", "r2"),
    ReviewRecord("u2", "v1", 4.0, "really good value", "r3"),
    ReviewRecord("u2", "v2", 1.0, "broke after a week", "r4"),
]


def _config(**changes):
    base = dict(embedding_dim=6, n_filters=4, window_sizes=(1, 2), fc_layers=2, fc_hidden=5,
                dropout_rate=0.0, max_reviews=2, max_review_words=5, activation="elu", seed=0)
    base.update(changes)
    return TrainConfig(**base)


def _setup(**changes):
    config = _config(**changes)
    vocab = build_vocab(TOY_REVIEWS)
    index = ReviewIndex(TOY_REVIEWS, vocab, config.max_review_words, config.max_reviews)
    model = ConQARModel(config, len(vocab), training_mean=3.0)
    model.register_owners(["u1", "u2"], ["v1", "v2"])
    return model, index, vocab


def _loss(model, index):
    predictions, users, items = [], {}, {}
    for record in TOY_REVIEWS:
        user = model.encode(index.document("user", record.user_id), "user")
        item = model.encode(index.document("item", record.item_id), "item")
        users.setdefault(record.user_id, user.rho)
        items.setdefault(record.item_id, item.rho)
        predictions.append(ops.reshape(model.combine(user, item).prediction, (1,)))
    l_rating = rating_loss(ops.concat(predictions), [r.rating for r in TOY_REVIEWS])
    l_trace = trace_loss(list(users.values()), list(items.values()))
    return total_loss(l_trace, l_rating, LossWeights(model.config.alpha))


def test_full_model_gradients_match_finite_differences():
    model, index, _ = _setup()
    assert model.config.doc_length == 12
    assert gradient_check(lambda: _loss(model, index), model.parameters()) <= 1e-4


def test_all_pad_user_document_gives_zero_density_and_finite_prediction():
    model, index, _ = _setup()
    empty = index.document("user", "stranger")
    assert empty.empty
    result = model.forward(empty, index.document("item", "v1"))
    npt.assert_array_equal(result.rho_u.values.data, 0.0)
    assert result.diagnostics["trace"] == 0.0
    assert np.isfinite(result.prediction.item())


@pytest.mark.parametrize("variant, length", [("full", 13), ("conv_quant", 5), ("conv_mutual", 13)])
def test_representation_length_per_variant(variant, length):
    model, index, _ = _setup(variant=variant)
    result = model.forward(index.document("user", "u1"), index.document("item", "v2"))
    assert result.fused.length == length
    assert np.isfinite(result.prediction.item())
    assert (result.rho_u is None) == (variant == "conv_mutual")


def test_inference_is_a_deterministic_function():
    model, index, _ = _setup(dropout_rate=0.5)
    docs = index.document("user", "u2"), index.document("item", "v1")
    first = model.forward(*docs).prediction.data.tobytes()
    assert model.forward(*docs).prediction.data.tobytes() == first


def test_functional_forward_returns_intermediates():
    model, index, _ = _setup()
    y, rho_u, rho_v, M, diagnostics = forward(index.document("user", "u1"),
                                              index.document("item", "v1"), model)
    assert y.shape == ()
    assert rho_u.owner_id == "u1" and rho_v.owner_id == "v1"
    assert M.shape == (4, 4)
    assert abs(diagnostics["a_u"].sum() - 1.0) < 1e-9


def test_final_bias_starts_at_the_training_mean():
    model, _, _ = _setup()
    assert model.head.layers[-1][1].data.item() == 3.0


def test_wrong_document_length():
    model, _, vocab = _setup()
    other = ReviewIndex(TOY_REVIEWS, vocab, max_review_words=3, max_reviews=2)
    with pytest.raises(ConfigError):
        model.encode(other.document("user", "u1"), "user")


def test_checkpoint_round_trip(tmp_path):
    model, index, vocab = _setup()
    for tensor in model.parameters():
        tensor.data += 0.01
    model.save(tmp_path / "model.bin", vocab)
    loaded = ConQARModel.load(tmp_path / "model.bin", vocab)
    assert list(loaded.store) == list(model.store)
    for name, tensor in model.store.items():
        npt.assert_array_equal(loaded.store[name].data, tensor.data)
    assert loaded.config == model.config
    assert loaded.owners("user") == ["u1", "u2"]

    loaded.save(tmp_path / "again.bin", vocab)
    assert (tmp_path / "model.bin").read_bytes() == (tmp_path / "again.bin").read_bytes()

    docs = index.document("user", "u1"), index.document("item", "v2")
    assert loaded.predict_value(*docs) == model.predict_value(*docs)


def test_checkpoint_rejects_other_vocabulary(tmp_path):
    model, _, vocab = _setup()
    model.save(tmp_path / "model.bin", vocab)
    with pytest.raises(ConfigError):
        ConQARModel.load(tmp_path / "model.bin", build_vocab(TOY_REVIEWS[:1]))


def test_clipping_applies_only_when_asked():
    model, index, _ = _setup()
    model.head.layers[-1][1].data[...] = 9.0
    docs = index.document("user", "u1"), index.document("item", "v1")
    assert model.predict_value(*docs, clip=True) == 5.0
    assert model.predict_value(*docs) > 5.0
