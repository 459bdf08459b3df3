import numpy as np
import pytest

from src.scenario import ClusterSet, make_ula

WAVELENGTH = 0.15


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ula():
    """32-antenna half-wavelength ULA."""
    return make_ula(32, WAVELENGTH / 2, WAVELENGTH)


@pytest.fixture
def disjoint_clusters():
    return ClusterSet.from_degrees((45.0, 75.0)), ClusterSet.from_degrees((105.0, 135.0))


@pytest.fixture
def cli_env(tmp_path, monkeypatch):
    """Isolated log and results directories, default process settings."""
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("RESULTS_DIR", str(tmp_path / "results"))
    for key in ("SIM_THREADS", "RANK_THRESHOLD", "LOG_LEVEL", "VERBOSE_ERRORS"):
        monkeypatch.delenv(key, raising=False)
    return tmp_path


@pytest.fixture
def write_config(tmp_path):
    """Write a flat key = value config and return its path."""
    def write(name: str, **values) -> str:
        path = tmp_path / f"{name}.conf"
        path.write_text("".join(f"{k} = {v}\n" for k, v in values.items()), encoding="utf-8")
        return str(path)
    return write
