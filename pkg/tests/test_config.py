import pytest

from src.config import load_config
from src.errors import ModelInputError


def test_defaults(monkeypatch):
    for name in ("PLAUSIKIT_SEED", "PLAUSIKIT_PAIR_CAP", "PLAUSIKIT_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    config = load_config()
    assert config.seed == 20240601
    assert config.pair_cap == 4096
    assert config.log_level == "WARNING"


def test_environment_strings_are_coerced(monkeypatch):
    monkeypatch.setenv("PLAUSIKIT_SEED", "17")
    monkeypatch.setenv("PLAUSIKIT_PAIR_CAP", "64")
    config = load_config()
    assert config.seed == 17
    assert config.pair_cap == 64


@pytest.mark.parametrize("name, value", [
    ("PLAUSIKIT_SEED", "abc"),
    ("PLAUSIKIT_PAIR_CAP", "lots"),
    ("PLAUSIKIT_PAIR_CAP", "0"),
])
def test_bad_values_are_input_errors(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ModelInputError, match=name):
        load_config()
