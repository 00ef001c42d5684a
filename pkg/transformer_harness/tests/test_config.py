import json

import pytest

from transformer_harness.config import FinetuneConfig, load_config
from transformer_harness.errors import HarnessError


def test_published_defaults():
    c = FinetuneConfig()
    assert c.mode == "full"
    assert c.learning_rate == 3e-5
    assert c.batch_size == 32
    assert c.epochs == 10
    assert c.lora_rank == 8
    assert c.lora_alpha == 16


@pytest.mark.parametrize(
    "kwargs",
    [
        {"mode": "adapter"},
        {"model_id": ""},
        {"learning_rate": 0.0},
        {"batch_size": 0},
        {"epochs": -1},
        {"lora_rank": 0},
        {"lora_alpha": 0},
    ],
)
def test_invalid_values_rejected(kwargs):
    with pytest.raises(HarnessError):
        FinetuneConfig(**kwargs)


def test_dict_round_trip():
    c = FinetuneConfig(mode="lora", model_id="local/path", seed=3)
    assert FinetuneConfig.from_dict(c.to_dict()) == c


def test_unknown_field_rejected():
    with pytest.raises(HarnessError, match="unknown"):
        FinetuneConfig.from_dict({"rank": 8})


def test_load_config_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"mode": "lora", "epochs": 2}), encoding="utf-8")
    c = load_config(path)
    assert c.mode == "lora" and c.epochs == 2


def test_load_config_bad_json(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(HarnessError):
        load_config(path)
