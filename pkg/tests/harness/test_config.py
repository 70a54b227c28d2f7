import json
import os

import pytest

from spheremax.errors import DomainError, UnknownExperimentError
from spheremax.harness.config import DEFAULT_PRESETS, ExperimentConfig, PresetManager, default_config
from spheremax.harness.experiments import EXPERIMENTS


def test_presets_cover_every_experiment():
    assert set(DEFAULT_PRESETS) == set(EXPERIMENTS)


def test_default_config_applies_preset_and_overrides():
    config = default_config("symbol-sup-decay", j_max=6, seed=None)
    assert config.n == 2
    assert config.j_min == 4
    assert config.j_max == 6
    assert config.seed == 0
    assert list(config.j_range()) == [4, 5, 6]


def test_unknown_experiment():
    with pytest.raises(UnknownExperimentError):
        default_config("no-such-experiment")


@pytest.mark.parametrize("fields", [
    {'n': 0}, {'j_min': 5, 'j_max': 4}, {'t_ratio': 1.0}, {'seed': -1}, {'workers': 0},
])
def test_validation(fields):
    with pytest.raises(DomainError):
        ExperimentConfig("region-table", **fields)


def test_hash_ignores_run_location_and_workers():
    a = ExperimentConfig("cex-growth", out="a", workers=1)
    b = ExperimentConfig("cex-growth", out="b", workers=8, svg=True, debug=True)
    c = ExperimentConfig("cex-growth", seed=1)
    assert a.config_hash == b.config_hash
    assert a.config_hash != c.config_hash
    assert len(a.config_hash) == 64


def test_canonical_json_is_sorted():
    text = ExperimentConfig("region-table").canonical_json()
    keys = list(json.loads(text))
    assert keys == sorted(keys)
    assert "out" not in keys


def test_to_dict_from_dict():
    config = ExperimentConfig("dsigma-decay", n=2, r_min=32.0)
    assert ExperimentConfig.from_dict(config.to_dict()) == config
    with pytest.raises(DomainError):
        ExperimentConfig.from_dict({'experiment': "dsigma-decay", 'colour': "red"})


@pytest.fixture
def preset_manager(temp_config_dir, monkeypatch):
    monkeypatch.setattr(os.path, 'expanduser', lambda x: str(temp_config_dir))
    return PresetManager()


def test_preset_manager_default_location(preset_manager, temp_config_dir):
    assert preset_manager.config_file == os.path.join(str(temp_config_dir), "presets.json")
    assert preset_manager.presets == {}


def test_add_save_load_preset(preset_manager):
    preset_manager.add_preset("small", {'grid_n': 32, 'seed': None})
    preset_manager.save_presets()
    reloaded = PresetManager(preset_manager.config_file)
    assert reloaded.get_preset("small") == {'grid_n': 32}


def test_add_preset_rejects_unknown_fields(preset_manager):
    with pytest.raises(DomainError):
        preset_manager.add_preset("bad", {'colour': "red"})


def test_remove_preset(preset_manager):
    preset_manager.add_preset("small", {'grid_n': 32})
    preset_manager.remove_preset("small")
    preset_manager.remove_preset("missing")
    assert preset_manager.get_preset("small") is None


def test_corrupt_preset_file_is_ignored(tmp_path):
    path = tmp_path / "presets.json"
    path.write_text("{not json")
    assert PresetManager(path).presets == {}
    path.write_text("[1, 2]")
    assert PresetManager(path).presets == {}
