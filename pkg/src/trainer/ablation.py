"""
Train the full model and its two reduced variants on identical splits and seed.
"""

from pathlib import Path
from typing import Optional, Sequence

from src.corpus.vocabulary import Vocabulary
from src.models.conqar import representation_length
from src.schemas import VARIANTS, AblationRow, AblationTable, ConfigError, TrainConfig
from src.trainer.training import CorpusSplits, train
from src.utils.logging_config import setup_logger
from src.utils.serialization import write_json

logger = setup_logger('ablation')


def run_ablation(splits: CorpusSplits, base_config: TrainConfig,
                 variants: Sequence[str] = VARIANTS, out_dir: Optional[str | Path] = None,
                 vocab: Optional[Vocabulary] = None) -> AblationTable:
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown:
        raise ConfigError(f"unknown variants {unknown}; expected some of {VARIANTS}")

    rows = []
    for variant in variants:
        config = base_config.replace(variant=variant)
        run_dir = Path(out_dir) / variant if out_dir is not None else None
        report = train(config, splits, run_dir, vocab).report
        rows.append(AblationRow(
            variant=variant,
            representation_length=representation_length(variant, config.n_filters),
            train_mse=report.train_mse,
            validation_mae=report.best_validation_mae,
            test_mae=report.test_mae,
        ))
        logger.info(f"{variant}: test_mae={report.test_mae}")

    table = AblationTable(rows=rows)
    if out_dir is not None:
        write_json(Path(out_dir) / "ablation.json", table)
    return table
