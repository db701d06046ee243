import json

import pytest

from src.schemas import ConfigError, GridSpec, TrainConfig
from src.trainer import TrainingDivergedError, grid_search


def test_single_configuration_grid(toy_splits, tiny_config):
    result, report = grid_search(toy_splits, GridSpec(base=tiny_config))
    assert len(report.trials) == 1
    assert report.best_index == 0
    assert report.best_config == tiny_config
    assert result.report.test_mae is not None


def test_diverging_configuration_is_skipped(toy_splits, tiny_config, tmp_path):
    grid = GridSpec(base=tiny_config.replace(optimizer="sgd", batch_size=1, epochs=30),
                    axes={"learning_rate": [1e6, 0.01]})
    result, report = grid_search(toy_splits, grid, out_dir=tmp_path)
    assert report.trials[0].diverged is not None
    assert report.trials[0].validation_mae is None
    assert report.best_index == 1
    assert report.best_config.learning_rate == 0.01
    saved = json.loads((tmp_path / "grid.json").read_text(encoding="utf-8"))
    assert saved["best_index"] == 1
    assert (tmp_path / "best" / "checkpoint.bin").exists()


def test_every_trial_diverging_raises(toy_splits, tiny_config):
    grid = GridSpec(base=tiny_config.replace(optimizer="sgd", batch_size=1, epochs=30),
                    axes={"learning_rate": [1e6]})
    with pytest.raises(TrainingDivergedError):
        grid_search(toy_splits, grid)


def test_parallel_trials_match_sequential(toy_splits, tiny_config):
    grid = GridSpec(base=tiny_config.replace(epochs=3), axes={"alpha": [0.1, 0.9]})
    _, sequential = grid_search(toy_splits, grid)
    _, parallel = grid_search(toy_splits, grid, parallel=2)
    assert [t.validation_mae for t in sequential.trials] == [t.validation_mae for t in parallel.trials]
    assert sequential.best_index == parallel.best_index


def test_search_grid_has_960_combinations():
    assert GridSpec.full_search().size == 960


def test_strict_grid_rejects_off_grid_values():
    grid = GridSpec(base=TrainConfig(), axes={"n_filters": [7]}, strict=True)
    with pytest.raises(ConfigError):
        grid.configs()
