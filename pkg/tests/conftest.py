import numpy as np
import pytest

from holoretina.core.design import SystemGeometry
from holoretina.core.dispersion import bundled_dispersion_path, load_dispersion
from holoretina.core.pb import PBElement


@pytest.fixture
def geom():
    """Default 10 x 10 display over a 500 um aperture."""
    return SystemGeometry()


@pytest.fixture
def single_cell_geom():
    return SystemGeometry(pixels=1)


@pytest.fixture
def ideal():
    return PBElement.ideal()


@pytest.fixture(scope="session")
def silicon():
    return load_dispersion(bundled_dispersion_path())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def write_file(tmp_path):
    def _write(name: str, text: str):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
