import pytest
from ruamel.yaml import YAML

from holoretina.core.config import (
    RESOLVED_CONFIG,
    RunConfig,
    default_config_text,
    load_config,
    parse_config,
    write_resolved_config,
)
from holoretina.errors import ConfigError


def test_defaults():
    config = load_config(None)
    assert config == RunConfig()
    assert config.pitch == pytest.approx(500e-6 / 2048)
    assert config.element().eta_conv == pytest.approx(1.0)
    assert config.geometry().pixels == 10
    assert config.eye().f == 0.017
    axes = config.sweep_axes()
    assert axes["thicknesses"][0] == pytest.approx(100e-9)
    assert len(axes["thicknesses"]) == 31


def test_parse_values_and_comments():
    config = parse_config(
        """
        # bench reproduction
        grid_n = 512   # smaller grid
        analyzer = on
        t_tm = -0.9+0.1i
        mode = full_gs
        thickness_nm = 150,155
        """
    )
    assert config.grid_n == 512
    assert config.analyzer is True
    assert config.t_tm == complex(-0.9, 0.1)
    assert config.mode == "full_gs"
    assert config.sweep_axes()["thicknesses"] == pytest.approx([150e-9, 155e-9])


@pytest.mark.parametrize(
    "text",
    [
        "no_such_key = 1",
        "grid_n = 512\ngrid_n = 1024",
        "grid_n = 511",
        "grid_n",
        "levels = 1",
        "analyzer = maybe",
        "mode = random",
        "aperture_m = -1",
        "layout_formats = json,gds",
        "thickness_nm = 250:100:5",
        "accommodation_steps = 5",
        "seed = -1",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_overrides():
    config = RunConfig().with_overrides(seed=7, analyzer=None)
    assert config.seed == 7 and config.analyzer is False
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(colour="red")


def test_default_text_parses_back():
    assert parse_config(default_config_text()) == RunConfig()


def test_resolved_config_yaml(tmp_path):
    config = RunConfig(seed=3, t_tm=-0.8 + 0.1j)
    path = write_resolved_config(config, tmp_path, "design")
    assert path.name == RESOLVED_CONFIG
    data = YAML(typ="safe").load(path.read_text())
    assert data["command"] == "design"
    assert data["seed"] == 3
    assert complex(data["t_tm"]) == -0.8 + 0.1j
    assert set(config.to_dict()) <= set(data)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.conf")
