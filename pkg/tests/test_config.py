import json

import pytest

from pyage.config import DATASET_PRESETS, RunConfig
from pyage.errors import ConfigurationError


def test_defaults():
    config = RunConfig()
    assert (config.t, config.k, config.h, config.lr) == (8, "auto", 500, 0.001)
    assert config.total_updates == 40
    assert (config.mode, config.variant) == ("cluster", "age")


@pytest.mark.parametrize(
    "name, t, r_neg_ed",
    [
        pytest.param("cora", 8, 0.5, id="cora"),
        pytest.param("citeseer", 3, 0.5, id="citeseer"),
        pytest.param("Wiki", 1, 0.5, id="wiki"),
        pytest.param("pubmed", 35, 0.8, id="pubmed"),
    ],
)
def test_dataset_presets(name, t, r_neg_ed):
    config = RunConfig.for_dataset(name)
    assert config.dataset == name
    assert config.t == t
    assert config.r_neg_ed_ratio == r_neg_ed


def test_presets_are_valid_configs():
    for name in DATASET_PRESETS:
        RunConfig.for_dataset(name)


def test_unknown_dataset_keeps_defaults():
    config = RunConfig.for_dataset("mine", t=2)
    assert config.dataset == "mine"
    assert config.t == 2
    assert config.r_pos_st_ratio == RunConfig().r_pos_st_ratio


@pytest.mark.parametrize(
    "kwargs",
    [
        pytest.param({"t": -1}, id="negative_t"),
        pytest.param({"k": 0.0}, id="zero_k"),
        pytest.param({"k": True}, id="bool_k"),
        pytest.param({"k": "fast"}, id="named_k"),
        pytest.param({"h": 0}, id="zero_h"),
        pytest.param({"max_iter": 5, "update_every": 10}, id="no_boundary"),
        pytest.param({"lr": 0.0}, id="zero_lr"),
        pytest.param({"r_pos_ed_ratio": 0.0}, id="zero_ratio"),
        pytest.param({"r_neg_ed_ratio": 1.5}, id="ratio_above_one"),
        pytest.param({"r_pos_ed_ratio": 0.02}, id="r_pos_grows"),
        pytest.param({"r_neg_ed_ratio": 0.05}, id="r_neg_shrinks"),
        pytest.param({"r_pos_st_ratio": 0.2, "r_pos_ed_ratio": 0.1}, id="overlap"),
        pytest.param({"mode": "train"}, id="mode"),
        pytest.param({"variant": "gae"}, id="variant"),
        pytest.param({"nmi_average": "max"}, id="nmi_average"),
        pytest.param({"val_frac": 0.5, "test_frac": 0.5}, id="split_sum"),
        pytest.param({"val_frac": -0.1}, id="negative_split"),
    ],
)
def test_validation(kwargs):
    with pytest.raises(ConfigurationError):
        RunConfig(**kwargs)


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigurationError, match="epochs"):
        RunConfig.from_dict({"t": 2, "epochs": 3})


def test_from_dict_rejects_wrong_types():
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict({"t": "eight"})


def test_json_round_trip(tmp_path):
    config = RunConfig(dataset="cora", k=0.5, seed=3, variant="ls_rx")
    path = tmp_path / "config.json"
    path.write_text(config.to_json())
    assert RunConfig.from_json(path) == config


@pytest.mark.parametrize(
    "content, message",
    [
        pytest.param(None, "cannot read", id="missing"),
        pytest.param("{not json", "invalid JSON", id="syntax"),
        pytest.param("[1, 2]", "JSON object", id="array"),
    ],
)
def test_from_json_errors(tmp_path, content, message):
    path = tmp_path / "config.json"
    if content is not None:
        path.write_text(content)
    with pytest.raises(ConfigurationError, match=message):
        RunConfig.from_json(path)


def test_with_overrides_ignores_none():
    config = RunConfig()
    assert config.with_overrides(t=None, seed=None) is config
    changed = config.with_overrides(t=2, seed=None)
    assert changed.t == 2
    assert changed.seed == config.seed


def test_with_overrides_validates():
    with pytest.raises(ConfigurationError):
        RunConfig().with_overrides(t=-3)


def test_config_hash():
    config = RunConfig(dataset="cora")
    assert config.config_hash() == RunConfig(dataset="cora").config_hash()
    assert config.config_hash() != config.with_overrides(seed=1).config_hash()
    assert len(config.config_hash()) == 64


def test_to_dict_is_flat_json():
    doc = json.loads(RunConfig().to_json())
    assert doc["k"] == "auto"
    assert all(not isinstance(value, dict) for value in doc.values())
