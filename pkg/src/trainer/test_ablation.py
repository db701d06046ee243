import pytest

from src.schemas import ConfigError
from src.trainer import run_ablation


def test_ablation_trains_every_variant(toy_splits, tiny_config, tmp_path):
    table = run_ablation(toy_splits, tiny_config.replace(epochs=2), out_dir=tmp_path)
    assert [row.variant for row in table.rows] == ["full", "conv_quant", "conv_mutual"]
    assert [row.representation_length for row in table.rows] == [19, 7, 19]
    assert all(row.test_mae is not None for row in table.rows)
    assert (tmp_path / "ablation.json").exists()
    assert (tmp_path / "conv_quant" / "summary.json").exists()


def test_unknown_variant_is_rejected(toy_splits, tiny_config):
    with pytest.raises(ConfigError):
        run_ablation(toy_splits, tiny_config, variants=["full", "bag_of_words"])
