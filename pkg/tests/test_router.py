import pytest

from src.config import ExperimentConfig
from src.errors import ConfigError
from src.experiments.router import Param, Registry, Router, RunContext, format_param
from src.results import ResultTable


def make_router() -> Router:
    router = Router(name="demo")

    @router.experiment("echo", "Echo parameters back", n=Param("int"), xs=Param("floats", [1.0]),
                       flag=Param("bool", False))
    def echo(p, ctx: RunContext) -> ResultTable:
        table = ResultTable(columns=["n", "seed"])
        table.add_row(n=p["n"], seed=ctx.seed)
        return table

    return router


def test_param_parsing():
    assert Param("ints").parse("M", "1, 2,3") == [1, 2, 3]
    assert Param("floats").parse("r", "1.5") == [1.5]
    assert Param("bool").parse("x", "Yes") is True
    assert Param("bool").parse("x", "0") is False
    assert Param("str").parse("x", "  ula ") == "ula"
    with pytest.raises(ConfigError) as exc:
        Param("int").parse("M", "ten")
    assert exc.value.key == "M"
    with pytest.raises(ConfigError):
        Param("ints").parse("M", " , ")


def test_resolve_fills_defaults():
    exp = make_router().experiments["echo"]
    assert exp.required_keys == ["n"]
    assert exp.resolve({"n": "4"}) == {"n": 4, "xs": [1.0], "flag": False}


def test_resolve_rejects_unknown_and_missing():
    exp = make_router().experiments["echo"]
    with pytest.raises(ConfigError) as exc:
        exp.resolve({"n": "1", "bogus": "2"})
    assert exc.value.key == "bogus"
    with pytest.raises(ConfigError) as exc:
        exp.resolve({"xs": "1"})
    assert exc.value.key == "n"
    assert "n" in str(exc.value)


def test_registry_dispatch():
    registry = Registry()
    registry.include_router(make_router())
    assert registry.names() == ["echo"]
    exp, params = registry.resolve(ExperimentConfig("echo", {"n": "2"}, seed=5))
    table = exp.pipeline(params, RunContext(seed=5))
    assert table.rows == [[2, 5]]
    with pytest.raises(ConfigError) as exc:
        registry.get("missing")
    assert exc.value.key == "experiment"


def test_duplicate_registration():
    registry = Registry()
    registry.include_router(make_router())
    with pytest.raises(ValueError):
        registry.include_router(make_router())
    router = make_router()
    with pytest.raises(ValueError):
        router.experiment("echo", "again")(lambda p, ctx: ResultTable(columns=[]))


def test_format_param():
    assert format_param([1.5, 2.0]) == "1.5,2"
    assert format_param(True) == "true"
    assert format_param(0.1) == "0.10000000000000001"
    assert format_param(7) == "7"
    assert format_param("ula") == "ula"
