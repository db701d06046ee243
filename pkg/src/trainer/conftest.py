import pytest

from src.corpus import ReviewRecord
from src.schemas import TrainConfig
from src.trainer import CorpusSplits


@pytest.fixture
def toy_splits() -> CorpusSplits:
    """Two users, two items; ratings are additive in a user and an item effect."""
    train = [
        ReviewRecord("u1", "v1", 5.0, "great tasty", "r1"),
        ReviewRecord("u1", "v2", 2.0, "bland dish", "r2"),
        ReviewRecord("u2", "v1", 4.0, "tasty enough", "r3"),
        ReviewRecord("u2", "v2", 1.0, "awful bland", "r4"),
    ]
    validation = [ReviewRecord("u1", "v1", 5.0, "great again", "val1")]
    test = [ReviewRecord("u2", "v1", 4.0, "tasty", "t1")]
    return CorpusSplits(train, validation, test)


@pytest.fixture
def tiny_config() -> TrainConfig:
    return TrainConfig(embedding_dim=8, n_filters=6, fc_layers=2, fc_hidden=16, dropout_rate=0.0,
                       batch_size=4, max_reviews=2, max_review_words=3, epochs=5, patience=5,
                       learning_rate=0.01, seed=7)
