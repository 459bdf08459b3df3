import pytest

from src.config import load_config, load_experiment_config, parse_config_text
from src.errors import ConfigError


def test_parse_lifts_experiment_and_seed():
    cfg = parse_config_text("experiment = rank-vs-m\nseed = 7\nM = 10, 20\n")
    assert cfg.experiment == "rank-vs-m"
    assert cfg.seed == 7
    assert cfg.parameters == {"M": "10, 20"}


def test_parse_skips_comments_and_blank_lines():
    text = "# header\n\nexperiment = sigma-sq  # trailing\nD = 0, 50\n"
    cfg = parse_config_text(text)
    assert cfg.experiment == "sigma-sq"
    assert cfg.seed == 0
    assert cfg.parameters == {"D": "0, 50"}


def test_parse_missing_experiment():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("M = 10\n")
    assert exc.value.key == "experiment"


def test_parse_duplicate_key():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("experiment = x\nM = 1\nM = 2\n")
    assert exc.value.key == "M"


def test_parse_bad_seed():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("experiment = x\nseed = abc\n")
    assert exc.value.key == "seed"


def test_parse_line_without_equals():
    with pytest.raises(ConfigError, match="key = value"):
        parse_config_text("experiment = x\njust words\n")


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_experiment_config(tmp_path / "nope.conf")


def test_load_config_defaults(cli_env):
    config = load_config()
    assert config.threads == 1
    assert config.rank_threshold == 1e-5
    assert config.log_level == "INFO"
    assert config.verbose_errors is False
    assert config.results_dir == str(cli_env / "results")


def test_load_config_reads_env(cli_env, monkeypatch):
    monkeypatch.setenv("SIM_THREADS", "4")
    monkeypatch.setenv("RANK_THRESHOLD", "1e-6")
    monkeypatch.setenv("LOG_LEVEL", "debug")
    monkeypatch.setenv("VERBOSE_ERRORS", "yes")
    config = load_config()
    assert config.threads == 4
    assert config.rank_threshold == 1e-6
    assert config.log_level == "DEBUG"
    assert config.verbose_errors is True


@pytest.mark.parametrize("key, value", [
    ("SIM_THREADS", "0"),
    ("SIM_THREADS", "many"),
    ("RANK_THRESHOLD", "2"),
    ("RANK_THRESHOLD", "small"),
])
def test_load_config_rejects_bad_values(cli_env, monkeypatch, key, value):
    monkeypatch.setenv(key, value)
    with pytest.raises(ValueError, match=key):
        load_config()
