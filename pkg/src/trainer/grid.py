"""
Hyperparameter grid search: one run per combination, selection on validation MAE,
test metrics for the winner only.
"""

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple

from src.corpus.vocabulary import Vocabulary
from src.schemas import GridReport, GridSpec, GridTrial, TrainConfig
from src.trainer.training import (
    CorpusSplits,
    Trainer,
    TrainingDivergedError,
    TrainingResult,
    save_run,
)
from src.utils.logging_config import setup_logger, SUCCESS_ICON, ERROR_ICON
from src.utils.serialization import write_json

logger = setup_logger('grid')


def _run_trial(index: int, config: TrainConfig, splits: CorpusSplits,
               vocab: Optional[Vocabulary]) -> Tuple[GridTrial, Optional[Trainer]]:
    try:
        trainer = Trainer(config, splits, vocab)
        report = trainer.fit()
    except TrainingDivergedError as e:
        logger.warning(f"{ERROR_ICON} trial {index} diverged: {e}")
        return GridTrial(index=index, config=config, diverged=str(e)), None
    logger.info(f"trial {index}: val_mae={report.best_validation_mae:.4f}")
    return GridTrial(index=index, config=config, validation_mae=report.best_validation_mae), trainer


def grid_search(splits: CorpusSplits, grid: GridSpec, out_dir: Optional[str | Path] = None,
                parallel: int = 0, vocab: Optional[Vocabulary] = None) -> Tuple[TrainingResult, GridReport]:
    """Train every grid combination and keep the one with the lowest validation MAE.

    Args:
        splits: corpus splits shared by every trial
        grid: per-axis values over a base config
        out_dir: optional directory for grid.json and the winning run
        parallel: worker threads; 0 or 1 runs trials sequentially
        vocab: shared vocabulary (built from the training split when None)
    """
    configs = grid.configs()
    if not configs:
        raise ValueError("grid is empty")
    logger.info(f"grid search over {len(configs)} configurations")

    best: Tuple[float, int] = (float("inf"), -1)
    trials: List[GridTrial] = []
    winner: Optional[Trainer] = None

    def consider(trial: GridTrial, trainer: Optional[Trainer]) -> None:
        nonlocal best, winner
        trials.append(trial)
        if trainer is not None and (trial.validation_mae, trial.index) < best:
            best = (trial.validation_mae, trial.index)
            winner = trainer

    if parallel and parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            futures = [pool.submit(_run_trial, i, c, splits, vocab) for i, c in enumerate(configs)]
            for future in futures:
                consider(*future.result())
    else:
        for i, config in enumerate(configs):
            consider(*_run_trial(i, config, splits, vocab))

    if winner is None:
        raise TrainingDivergedError("every grid trial", epoch=0, stage="grid")

    report = winner.test(winner.report)
    result = TrainingResult(winner.model, report, winner.vocab, winner.index, splits.source)
    grid_report = GridReport(trials=trials, best_index=best[1], best_config=winner.config,
                             best_report=report)
    logger.info(f"{SUCCESS_ICON} best trial {best[1]}: val_mae={best[0]:.4f} test_mae={report.test_mae}")
    if out_dir is not None:
        out_dir = Path(out_dir)
        save_run(result, out_dir / "best")
        write_json(out_dir / "grid.json", grid_report)
    return result, grid_report
