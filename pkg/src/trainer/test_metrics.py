import numpy as np
import pytest

from src.corpus import ReviewIndex, ReviewRecord, build_vocab
from src.trainer import (
    evaluate,
    evaluate_mae,
    global_mean_baseline,
    mean_absolute_error,
    root_mean_squared_error,
)

RECORDS = [
    ReviewRecord("a", "x", 5.0, "fine", "1"),
    ReviewRecord("b", "x", 1.0, "poor", "2"),
    ReviewRecord("a", "y", 4.0, "good", "3"),
    ReviewRecord("b", "y", 2.0, "meh", "4"),
]


class FixedModel:
    """Predicts a fixed rating per user and records the documents it was shown."""

    def __init__(self, ratings):
        self.ratings = ratings
        self.seen = []

    def predict_value(self, user_doc, item_doc, clip=None):
        self.seen.append((user_doc.sources, item_doc.sources))
        return self.ratings[user_doc.owner_id]


def _index():
    return ReviewIndex(RECORDS, build_vocab(RECORDS), max_review_words=2, max_reviews=2)


def test_mae_examples():
    assert mean_absolute_error([3.0, 4.0], [3.0, 4.0]) == 0.0
    assert mean_absolute_error([4.0, 2.0], [5.0, 1.0]) == 1.0


def test_rmse():
    assert root_mean_squared_error([4.0, 3.0], [5.0, 1.0]) == pytest.approx(np.sqrt(2.5))


def test_empty_and_mismatched_inputs():
    with pytest.raises(ValueError):
        mean_absolute_error([], [])
    with pytest.raises(ValueError):
        mean_absolute_error([1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        evaluate(FixedModel({}), [], _index())


def test_evaluate_by_hand_and_target_exclusion():
    model = FixedModel({"a": 4.0, "b": 2.0})
    result = evaluate(model, RECORDS, _index())
    # |4-5| + |2-1| + |4-4| + |2-2|
    assert result.mae == 0.5
    assert result.rmse == pytest.approx(np.sqrt(0.5))
    assert result.count == 4
    for record, (user_sources, item_sources) in zip(RECORDS, model.seen):
        assert record.review_id not in user_sources
        assert record.review_id not in item_sources


def test_mae_invariant_under_example_order():
    model = FixedModel({"a": 3.3, "b": 1.7})
    shuffled = [RECORDS[i] for i in (2, 0, 3, 1)]
    assert evaluate_mae(model, shuffled, _index()) == pytest.approx(
        evaluate_mae(model, RECORDS, _index()), abs=1e-12)


def test_global_mean_baseline():
    # training mean is 3.0
    assert global_mean_baseline(RECORDS, RECORDS[:2]) == 2.0
    with pytest.raises(ValueError):
        global_mean_baseline([], RECORDS)
