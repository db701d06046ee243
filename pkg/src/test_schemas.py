import json

import pytest

from src.schemas import (
    SEARCH_GRID,
    AblationRow,
    AblationTable,
    ConfigError,
    GridSpec,
    TrainConfig,
    load_grid_spec,
    load_train_config,
)


def test_defaults():
    config = TrainConfig()
    assert (config.n_filters, config.window_sizes, config.alpha) == (50, (1, 2, 3), 0.5)
    assert config.doc_length == 15 * 101
    config.check_search_grid()


@pytest.mark.parametrize("field, value", [
    ("alpha", 1.5), ("alpha", -0.1), ("dropout_rate", 1.0), ("window_sizes", (4,)),
    ("window_sizes", (1, 1)), ("variant", "conv_only"), ("n_filters", 0),
])
def test_invalid_values_are_rejected(field, value):
    with pytest.raises(ConfigError):
        TrainConfig().replace(**{field: value})


def test_configs_are_frozen():
    with pytest.raises(Exception):
        TrainConfig().alpha = 0.2


def test_off_grid_value():
    with pytest.raises(ConfigError):
        TrainConfig(learning_rate=0.05).check_search_grid()


def test_grid_expansion_order():
    grid = GridSpec(axes={"alpha": [0.1, 0.9], "fc_layers": [1, 2, 3]})
    configs = grid.configs()
    assert grid.size == len(configs) == 6
    assert [(c.alpha, c.fc_layers) for c in configs[:3]] == [(0.1, 1), (0.1, 2), (0.1, 3)]


def test_full_grid_size():
    expected = 1
    for values in SEARCH_GRID.values():
        expected *= len(values)
    assert GridSpec.full_search().size == expected == 960


def test_unknown_grid_axis():
    with pytest.raises(ValueError):
        GridSpec(axes={"momentum": [0.9]})


def test_load_toml_and_json(tmp_path):
    (tmp_path / "run.toml").write_text('n_filters = 8\nwindow_sizes = [1, 3]\nvariant = "conv_quant"\n',
                                       encoding="utf-8")
    config = load_train_config(tmp_path / "run.toml")
    assert (config.n_filters, config.window_sizes, config.variant) == (8, (1, 3), "conv_quant")

    (tmp_path / "grid.json").write_text(json.dumps({"base": {"epochs": 2}, "axes": {"alpha": [0.3]}}),
                                        encoding="utf-8")
    grid = load_grid_spec(tmp_path / "grid.json")
    assert grid.base.epochs == 2 and grid.size == 1

    (tmp_path / "bad.toml").write_text("alpha = 3.0\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_train_config(tmp_path / "bad.toml")
    with pytest.raises(ConfigError):
        load_train_config(tmp_path / "run.yaml")


def test_ablation_table_lookup():
    table = AblationTable(rows=[AblationRow(variant="full", representation_length=151, train_mse=0.1,
                                            validation_mae=0.8, test_mae=0.7)])
    assert table.test_mae() == {"full": 0.7}
