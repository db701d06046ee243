"""
Mini-batch training on α·L_trace + (1 − α)·L_rating with validation-MAE early stopping.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.corpus.documents import ReviewIndex
from src.corpus.records import CorpusError, ReviewRecord, read_records
from src.corpus.vocabulary import Vocabulary, build_vocab
from src.models.conqar import ConQARModel, Encoded
from src.models.density import trace_loss
from src.models.head import LossWeights, rating_loss, total_loss
from src.numerics import GradientTape, NonFiniteError, Tensor
from src.numerics import ops
from src.schemas import EpochRecord, MetricsReport, TrainConfig
from src.trainer.metrics import evaluate, global_mean_baseline, predict_examples
from src.trainer.optim import make_optimizer
from src.utils.logging_config import setup_logger, SUCCESS_ICON, ERROR_ICON, WAIT_ICON
from src.utils.serialization import write_json, write_json_lines

logger = setup_logger('trainer')

SPLIT_FILES = {"train": "train.jsonl", "validation": "validation.jsonl", "test": "test.jsonl"}
# written next to a checkpoint; points back at the prepared data directory
DATA_SOURCE_FILE = "data.json"


class TrainingDivergedError(RuntimeError):
    """The loss or a gradient became non-finite."""

    def __init__(self, tensor_name: str, epoch: int, stage: str = "forward"):
        self.tensor_name = tensor_name
        self.epoch = epoch
        self.stage = stage
        super().__init__(
            f"training diverged in epoch {epoch}: first non-finite tensor '{tensor_name}' ({stage} pass)")


@dataclass
class CorpusSplits:
    train: List[ReviewRecord]
    validation: List[ReviewRecord]
    test: List[ReviewRecord]
    source: Optional[Path] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.train:
            raise CorpusError("training split is empty")
        seen: Dict[str, str] = {}
        for name in ("train", "validation", "test"):
            for record in getattr(self, name):
                if record.review_id in seen:
                    raise CorpusError(
                        f"review {record.review_id} appears in both {seen[record.review_id]} and {name}")
                seen[record.review_id] = name

    @classmethod
    def load(cls, data_dir: str | Path) -> "CorpusSplits":
        data_dir = Path(data_dir)
        splits = {name: read_records(data_dir / file) for name, file in SPLIT_FILES.items()}
        return cls(**splits, source=data_dir.resolve())


@dataclass
class TrainingResult:
    model: ConQARModel
    report: MetricsReport
    vocab: Vocabulary
    index: ReviewIndex
    data_dir: Optional[Path] = None


def batch_loss(model: ConQARModel, batch: Sequence[ReviewRecord], index: ReviewIndex,
               training: bool = True) -> Tuple[Tensor, Tensor, Tensor]:
    """(total, rating, trace) losses of one mini-batch.

    Each distinct user and item is encoded once per batch from its training
    document; the trace term averages over those distinct owners.
    """
    users: Dict[str, Encoded] = {}
    items: Dict[str, Encoded] = {}
    predictions = []
    for record in batch:
        if record.user_id not in users:
            users[record.user_id] = model.encode(index.document("user", record.user_id), "user")
        if record.item_id not in items:
            items[record.item_id] = model.encode(index.document("item", record.item_id), "item")
        result = model.combine(users[record.user_id], items[record.item_id], training)
        predictions.append(ops.reshape(result.prediction, (1,)))

    l_rating = rating_loss(ops.concat(predictions), [r.rating for r in batch])
    if model.uses_density:
        l_trace = trace_loss([e.rho for e in users.values()], [e.rho for e in items.values()])
    else:
        l_trace = Tensor(0.0, dtype=model.dtype)
    return total_loss(l_trace, l_rating, LossWeights(model.config.alpha)), l_rating, l_trace


class Trainer:
    """One training run for a fixed config and fixed splits."""

    def __init__(self, config: TrainConfig, splits: CorpusSplits, vocab: Optional[Vocabulary] = None):
        self.config = config
        self.splits = splits
        self.validate_inputs()
        self.vocab = vocab if vocab is not None else build_vocab(splits.train, config.min_count)
        # documents only ever see training reviews
        self.index = ReviewIndex(splits.train, self.vocab, config.max_review_words, config.max_reviews)
        self.training_mean = float(np.mean([r.rating for r in splits.train]))
        self.model = ConQARModel(config, len(self.vocab), self.training_mean)
        self.model.register_owners((r.user_id for r in splits.train), (r.item_id for r in splits.train))
        if config.embeddings_path:
            self.model.import_embeddings(config.embeddings_path, self.vocab)
        self.optimizer = make_optimizer(config.optimizer, self.model.store, config.learning_rate)
        self.shuffle_rng = np.random.default_rng([config.seed, 2])
        self.history: List[EpochRecord] = []
        self.report: Optional[MetricsReport] = None

    def validate_inputs(self) -> None:
        if not self.splits.validation:
            raise CorpusError("validation split is empty; early stopping needs it")

    def run_epoch(self, epoch: int) -> Tuple[float, float, float]:
        train = self.splits.train
        order = self.shuffle_rng.permutation(len(train))
        size = self.config.batch_size
        sums = np.zeros(3)
        for start in range(0, len(order), size):
            batch = [train[i] for i in order[start:start + size]]
            try:
                with GradientTape() as tape:
                    losses = batch_loss(self.model, batch, self.index, training=True)
                tape.backward(losses[0])
            except NonFiniteError as e:
                raise TrainingDivergedError(e.tensor_name, epoch, e.stage) from e
            self.optimizer.step()
            self.optimizer.zero_grad()
            self.model.after_step()
            sums += [loss.item() * len(batch) for loss in losses]
        total, rating, trace = sums / len(train)
        return float(total), float(rating), float(trace)

    def _validate(self, epoch: int):
        try:
            return evaluate(self.model, self.splits.validation, self.index)
        except NonFiniteError as e:
            raise TrainingDivergedError(e.tensor_name, epoch, "validation") from e

    def fit(self) -> MetricsReport:
        config = self.config
        logger.info(f"{WAIT_ICON} training {config.variant} model: {len(self.splits.train)} reviews, "
                    f"{len(self.vocab)} tokens, {len(self.model.store)} parameter tensors")
        best_mae, best_epoch, best_state, stale = np.inf, 0, None, 0
        stopped_early = False
        for epoch in range(1, config.epochs + 1):
            total, rating, trace = self.run_epoch(epoch)
            validation = self._validate(epoch)
            improved = validation.mae < best_mae
            if improved:
                best_mae, best_epoch, stale = validation.mae, epoch, 0
                best_state = self.model.store.state_dict()
            else:
                stale += 1
            self.history.append(EpochRecord(
                epoch=epoch, train_loss=total, rating_loss=rating, trace_loss=trace,
                validation_mae=validation.mae, validation_rmse=validation.rmse, improved=improved))
            logger.info(f"epoch {epoch}: loss={total:.5f} rating={rating:.5f} trace={trace:.6f} "
                        f"val_mae={validation.mae:.4f}")
            if stale >= config.patience:
                stopped_early = True
                logger.info(f"no validation improvement for {stale} epochs, stopping")
                break

        self.model.store.load_state_dict(best_state)
        train_predictions = predict_examples(self.model, self.splits.train, self.index,
                                             exclude_target=False, clip=False)
        train_mse = float(np.mean((train_predictions - [r.rating for r in self.splits.train]) ** 2))
        logger.info(f"{SUCCESS_ICON} best epoch {best_epoch}: val_mae={best_mae:.4f} train_mse={train_mse:.5f}")
        self.report = MetricsReport(config=config, epochs=list(self.history), best_epoch=best_epoch,
                                    best_validation_mae=float(best_mae), train_mse=train_mse,
                                    stopped_early=stopped_early)
        return self.report

    def test(self, report: MetricsReport) -> MetricsReport:
        """Fill the test metrics; called once, on the selected model."""
        if not self.splits.test:
            return report
        result = evaluate(self.model, self.splits.test, self.index)
        baseline = global_mean_baseline(self.splits.train, self.splits.test)
        logger.info(f"{SUCCESS_ICON} test MAE {result.mae:.4f} (global mean {baseline:.4f})")
        return report.model_copy(update={"test_mae": result.mae, "test_rmse": result.rmse,
                                         "baseline_test_mae": baseline})


def save_run(result: TrainingResult, out_dir: str | Path) -> None:
    """metrics.jsonl, summary.json, checkpoint.bin, vocab.txt and curves.png.

    data.json is added when the splits were loaded from a prepared directory.
    """
    from src.viz.curves import plot_training_curves

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json_lines(out_dir / "metrics.jsonl", result.report.epochs)
    write_json(out_dir / "summary.json", result.report)
    result.vocab.save(out_dir / "vocab.txt")
    result.model.save(out_dir / "checkpoint.bin", result.vocab)
    plot_training_curves(result.report, out_dir / "curves.png")
    if result.data_dir is not None:
        write_json(out_dir / DATA_SOURCE_FILE, {"data_dir": str(result.data_dir)})
    logger.info(f"{SUCCESS_ICON} run saved to {out_dir}")


def train(config: TrainConfig, splits: CorpusSplits, out_dir: Optional[str | Path] = None,
          vocab: Optional[Vocabulary] = None, evaluate_test: bool = True) -> TrainingResult:
    """Train one model and return it with its metrics.

    Args:
        config: training configuration
        splits: disjoint train / validation / test reviews
        out_dir: where to write metrics, summary and checkpoint (nothing written when None)
        vocab: vocabulary to use; built from the training split when None
        evaluate_test: compute test metrics now (grid search defers them to the winner)

    Returns:
        TrainingResult holding the best-validation model
    """
    trainer = Trainer(config, splits, vocab)
    try:
        report = trainer.fit()
    except TrainingDivergedError as e:
        logger.error(f"{ERROR_ICON} {e}")
        raise
    if evaluate_test:
        report = trainer.test(report)
    result = TrainingResult(trainer.model, report, trainer.vocab, trainer.index, splits.source)
    if out_dir is not None:
        save_run(result, out_dir)
    return result
