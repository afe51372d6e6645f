import json

import pytest

from fina.activity import Activity
from fina.config import ConfigError, ExperimentConfig, config_from_dict, load_config, parse_candidate_mode


def test_defaults():
    cfg = ExperimentConfig()
    assert (cfg.num_humans, cfg.samples, cfg.sampling_period, cfg.window) == (3, 3000, 360.0, 100)
    assert [h.archetype for h in cfg.human_schedules()] == ["routine", "intermediate", "random"]


def test_to_dict_roundtrip():
    doc = {
        "experiment": {"samples": 500, "master_seed": 9, "candidate_mode": "union", "weights": [1, 2, 1]},
        "fina": {"lam": 2.0, "epsilon": 0.1},
        "thermal": {"dt": 60, "outdoor": {"mode": "sinusoidal", "amplitude": 5}, "metabolic_offset": 100,
                    "breath": {"sleeping": [7, 34]}},
        "schedules": {"humans": [{"archetype": "fixed", "activity": "relaxing"},
                                 {"archetype": "random", "seed": 4}, {"archetype": "routine"}],
                      "setpoints": {"sleeping": 60}},
        "output": {"dir": "x", "format": "csv"},
    }
    cfg = config_from_dict(doc)
    assert cfg.samples == 500 and cfg.fina.lam == 2.0 and cfg.thermal.dt == 60
    assert cfg.setpoints[Activity.SLEEPING] == 60 and cfg.setpoints[Activity.RELAXING] == 77
    assert cfg.occupants.breath[Activity.SLEEPING].rmv_l_per_min == 7
    assert config_from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


@pytest.mark.parametrize("doc", [
    {"bogus": {}},
    {"experiment": {"sample": 10}},
    {"fina": {"gamma": 1}},
    {"thermal": {"outdoor": {"phase": 1}}},
    {"schedules": {"humans": [{"archetype": "routine", "x": 1}] * 3}},
    {"output": {"path": "x"}},
])
def test_unknown_keys_rejected(doc):
    with pytest.raises(ConfigError, match="unknown key"):
        config_from_dict(doc)


@pytest.mark.parametrize("doc", [
    {"experiment": {"samples": 50}},
    {"experiment": {"sampling_period": 0}},
    {"experiment": {"strategy": "best"}},
    {"experiment": {"candidate_mode": "grid:-1"}},
    {"experiment": {"weights": [0, 0, 0]}},
    {"experiment": {"weights": [1, 1]}},
    {"fina": {"lam": -1}},
    {"fina": {"budget_history": "x"}},
    {"thermal": {"dt": 7}},
    {"thermal": {"heater_flow_temp": 0}},
    {"schedules": {"humans": [{"archetype": "fixed"}] * 3}},
    {"schedules": {"humans": [{"archetype": "chaotic"}] * 3}},
    {"schedules": {"humans": [{"archetype": "routine"}]}},
    {"schedules": {"setpoints": {"napping": 70}}},
    {"output": {"format": "xml"}},
    {"experiment": []},
])
def test_invalid_values_rejected(doc):
    with pytest.raises(ConfigError):
        config_from_dict(doc)


def test_candidate_modes():
    assert parse_candidate_mode("union") is None
    assert parse_candidate_mode("grid:0.5") == 0.5
    assert parse_candidate_mode("grid") == 1.0
    with pytest.raises(ConfigError):
        parse_candidate_mode("grid:abc")
    with pytest.raises(ConfigError):
        parse_candidate_mode("all")


def test_load_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"experiment": {"samples": 200}}')
    assert load_config(p).samples == 200
    p.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(p)
    with pytest.raises(OSError):
        load_config(tmp_path / "missing.json")


def test_overrides():
    cfg = ExperimentConfig().with_overrides(master_seed=3, samples=None)
    assert cfg.master_seed == 3 and cfg.samples == 3000
    with pytest.raises(ConfigError):
        ExperimentConfig().with_overrides(samples=10)
