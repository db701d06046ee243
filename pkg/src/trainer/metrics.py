"""
MAE / RMSE evaluation and the global-mean reference predictor.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.corpus.documents import ReviewIndex
from src.corpus.records import ReviewRecord


@dataclass(frozen=True)
class EvaluationResult:
    mae: float
    rmse: float
    count: int


def _errors(predictions: Sequence[float], truths: Sequence[float]) -> np.ndarray:
    predictions = np.asarray(predictions, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.float64)
    if predictions.shape != truths.shape:
        raise ValueError(f"{predictions.shape[0]} predictions for {truths.shape[0]} ratings")
    if predictions.size == 0:
        raise ValueError("cannot evaluate an empty example set")
    return predictions - truths


def mean_absolute_error(predictions: Sequence[float], truths: Sequence[float]) -> float:
    """(1/N) Σ |ŷ − y|"""
    return float(np.mean(np.abs(_errors(predictions, truths))))


def root_mean_squared_error(predictions: Sequence[float], truths: Sequence[float]) -> float:
    return float(np.sqrt(np.mean(_errors(predictions, truths) ** 2)))


def predict_examples(model, examples: Sequence[ReviewRecord], index: ReviewIndex,
                     exclude_target: bool = True, clip: Optional[bool] = None) -> np.ndarray:
    """Inference-mode predictions; each pair's documents drop the review being predicted."""
    predictions = []
    for record in examples:
        exclude = record.review_id if exclude_target else None
        user_doc = index.document("user", record.user_id, exclude=exclude)
        item_doc = index.document("item", record.item_id, exclude=exclude)
        predictions.append(model.predict_value(user_doc, item_doc, clip=clip))
    return np.asarray(predictions, dtype=np.float64)


def evaluate(model, examples: Sequence[ReviewRecord], index: ReviewIndex,
             clip: Optional[bool] = None) -> EvaluationResult:
    if not examples:
        raise ValueError("cannot evaluate an empty example set")
    predictions = predict_examples(model, examples, index, clip=clip)
    truths = [r.rating for r in examples]
    return EvaluationResult(
        mae=mean_absolute_error(predictions, truths),
        rmse=root_mean_squared_error(predictions, truths),
        count=len(examples),
    )


def evaluate_mae(model, examples: Sequence[ReviewRecord], index: ReviewIndex) -> float:
    return evaluate(model, examples, index).mae


def global_mean_baseline(train: Sequence[ReviewRecord], examples: Sequence[ReviewRecord]) -> float:
    """MAE of always predicting the mean training rating."""
    if not train:
        raise ValueError("training split is empty")
    mean = float(np.mean([r.rating for r in train]))
    return mean_absolute_error([mean] * len(examples), [r.rating for r in examples])
