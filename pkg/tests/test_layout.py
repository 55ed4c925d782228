import json

import numpy as np
import pytest

from holoretina.core.field import PhaseMap, level_values
from holoretina.core.layout import (
    CSV_HEADER,
    NanobeamLayout,
    decimation_step,
    export_layout,
    generate_layout,
    load_layout_json,
)
from holoretina.errors import LayoutError

NM = 1e-9


def quarter_map():
    values = np.array([[0.0, np.pi / 2], [-np.pi, -np.pi / 2]])
    return PhaseMap(values, 230 * NM, 8)


def test_orientation_is_half_the_phase():
    layout = generate_layout(quarter_map())
    assert layout.cells_per_side == 2
    np.testing.assert_allclose(layout.theta, [0.0, np.pi / 4, -np.pi / 2, -np.pi / 4])
    np.testing.assert_allclose(layout.x, [-115 * NM, 115 * NM, -115 * NM, 115 * NM])
    np.testing.assert_allclose(layout.y, [-115 * NM, -115 * NM, 115 * NM, 115 * NM])


def test_eight_levels_give_eight_orientations(rng):
    values = rng.choice(level_values(8), size=(64, 64))
    layout = generate_layout(PhaseMap(values, 460 * NM, 8))
    orientations = layout.orientations()
    assert orientations.size <= 8
    steps = np.diff(orientations) / (np.pi / 8)
    np.testing.assert_allclose(steps, np.round(steps), atol=1e-9)
    assert orientations.min() >= -np.pi / 2 and orientations.max() < np.pi / 2


def test_cell_count_over_full_aperture():
    phase = PhaseMap(np.zeros((2, 2)), 250e-6, 8)
    layout = generate_layout(phase)
    assert layout.cells_per_side == 2173
    assert layout.count == 2173**2


def test_unquantized_map_is_rejected():
    with pytest.raises(LayoutError):
        generate_layout(PhaseMap(np.zeros((4, 4)), 230 * NM, 0))


def test_oversized_beam(caplog):
    with pytest.raises(LayoutError) as e:
        generate_layout(quarter_map(), beam_length=300 * NM)
    assert "unit cell" in str(e.value)
    layout = generate_layout(quarter_map(), beam_length=300 * NM, clip_policy="clip")
    assert layout.count == 4
    assert "overlap" in caplog.text


def test_empty_layout_exports(tmp_path):
    empty = NanobeamLayout.empty()
    data = json.loads(export_layout(empty, "json", tmp_path / "l.json").read_text())
    assert data["beams"] == []
    assert export_layout(empty, "csv", tmp_path / "l.csv").read_text() == CSV_HEADER + "\n"
    svg = export_layout(empty, "svg", tmp_path / "l.svg").read_text()
    assert "<rect" not in svg and svg.rstrip().endswith("</svg>")
    assert load_layout_json(tmp_path / "l.json").count == 0


def test_small_aperture_gives_empty_layout():
    layout = generate_layout(PhaseMap(np.zeros((2, 2)), 100 * NM, 8))
    assert layout.count == 0


def test_svg_rotation_attribute(tmp_path):
    single = NanobeamLayout(
        230 * NM,
        70 * NM,
        180 * NM,
        1,
        np.zeros(1),
        np.zeros(1),
        np.array([np.pi / 4]),
        (-115 * NM, -115 * NM, 115 * NM, 115 * NM),
    )
    svg = export_layout(single, "svg", tmp_path / "one.svg").read_text()
    assert 'transform="rotate(45 0 0)"' in svg
    assert 'viewBox="-115 -115 230 230"' in svg


def test_svg_decimation(tmp_path):
    layout = generate_layout(PhaseMap(np.zeros((2, 2)), 11.5e-6, 8))
    assert layout.count == 10000
    assert decimation_step(layout, 100) == 10
    svg = export_layout(layout, "svg", tmp_path / "big.svg", svg_max_beams=100).read_text()
    assert svg.count("<rect") == 100


def test_json_and_csv_round_trip(tmp_path):
    layout = generate_layout(quarter_map())
    loaded = load_layout_json(export_layout(layout, "JSON", tmp_path / "q.json"))
    assert np.array_equal(loaded.theta, layout.theta)
    assert np.array_equal(loaded.x, layout.x)
    assert loaded.bounds == layout.bounds
    rows = export_layout(layout, "csv", tmp_path / "q.csv").read_text().splitlines()
    assert rows[0] == CSV_HEADER
    assert rows[2].split(",")[:3] == ["115.0000", "-115.0000", f"{np.pi / 4:.12f}"]


def test_unknown_format(tmp_path):
    with pytest.raises(LayoutError):
        export_layout(NanobeamLayout.empty(), "gds", tmp_path / "x.gds")
    (tmp_path / "bad.json").write_text('{"schema": "other"}')
    with pytest.raises(LayoutError):
        load_layout_json(tmp_path / "bad.json")
