import numpy as np
import pytest

from holoretina.core.design import (
    ApertureGrid,
    DisplayPattern,
    SystemGeometry,
    assemble_hologram,
    cell_phase,
    gs_retrieve,
    lattice_target,
    levels_efficiency,
    ramp_order_efficiency,
)
from holoretina.core.field import level_values, wrap_phase
from holoretina.core.patterns import letter_f
from holoretina.core.propagation import fraunhofer_pair
from holoretina.errors import GridMismatchError, InputError, SamplingError

PITCH_512 = 500e-6 / 512


def test_geometry_defaults(geom):
    assert geom.pixel_size == pytest.approx(50e-6)
    assert geom.conjugate_side == pytest.approx(0.05)
    assert geom.virtual_point(0, 0) == pytest.approx((-22.5e-3, -22.5e-3))
    # row index selects y, column index selects x
    x, y = geom.virtual_point(0, 9)
    assert x == pytest.approx(22.5e-3) and y == pytest.approx(-22.5e-3)
    with pytest.raises(InputError):
        SystemGeometry(pixels=0)


def test_aperture_grid_owns_every_sample(geom):
    grid = ApertureGrid(geom, 512)
    sizes = [s.stop - s.start for s in grid.slices]
    assert sum(sizes) == 512
    assert min(sizes) >= 51 and max(sizes) <= 52
    with pytest.raises(SamplingError):
        ApertureGrid(geom, 8)


def test_from_pitch_requires_even_tiling(geom):
    assert ApertureGrid.from_pitch(geom, PITCH_512).n == 512
    with pytest.raises(GridMismatchError):
        ApertureGrid.from_pitch(geom, 500e-6 / 251)


def test_on_axis_cell_phase_is_spherical(single_cell_geom):
    phase = cell_phase(0, 0, single_cell_geom, PITCH_512)
    values = phase.values
    c = 256
    assert values[c, c] == 0.0
    np.testing.assert_array_equal(values[c, c:], values[c:, c])
    # phase grows away from the axis for a wave diverging from behind the aperture
    assert values[c, c + 20] > values[c, c + 10] > 0


def test_corner_cell_is_a_steep_ramp(geom):
    # rays from the virtual point 22.5 mm off axis: sin(theta) ~ 0.089, period ~ 6.1 um
    phase = cell_phase(0, 0, geom, PITCH_512)
    values = phase.values
    along_x = np.unwrap(values[values.shape[0] // 2, :])
    along_y = np.unwrap(values[:, values.shape[1] // 2])
    for profile in (along_x, along_y):
        slope = (profile[-1] - profile[0]) / ((profile.size - 1) * PITCH_512)
        assert slope > 0
        assert 2 * np.pi / slope == pytest.approx(6.09e-6, rel=0.02)


def test_cell_phase_undersampling_reports_required_pitch(geom):
    with pytest.raises(SamplingError) as e:
        cell_phase(0, 0, geom, 500e-6 / 250)
    assert "required pitch" in str(e.value)
    with pytest.raises(InputError):
        cell_phase(10, 0, geom, PITCH_512)


def test_per_cell_assembly_is_quantized(geom):
    phase = assemble_hologram(geom, "per_cell", PITCH_512, levels=8)
    assert phase.shape == (512, 512)
    assert phase.levels == 8
    assert set(np.unique(phase.values)) <= set(level_values(8))
    again = assemble_hologram(geom, "per_cell", PITCH_512, levels=8)
    assert np.array_equal(phase.values, again.values)


def test_per_cell_blocks_match_cell_phase(geom):
    phase = assemble_hologram(geom, "per_cell", PITCH_512)
    grid = ApertureGrid(geom, 512)
    for i, j in ((0, 0), (3, 7), (9, 9)):
        rows, cols = grid.block(i, j)
        np.testing.assert_array_equal(phase.values[rows, cols], cell_phase(i, j, geom, PITCH_512).values)


def test_unknown_mode(geom):
    with pytest.raises(InputError):
        assemble_hologram(geom, "iterative", PITCH_512)


def test_gs_error_is_non_increasing_for_random_targets():
    for seed in range(10):
        target = np.random.default_rng(seed).uniform(0, 1, size=(32, 32))
        result = gs_retrieve(target, 20, fraunhofer_pair(), seed=seed)
        assert result.errors.shape == (20,)
        assert np.all(np.diff(result.errors) <= 1e-12)


def test_gs_on_axis_delta_gives_constant_phase():
    target = np.zeros((64, 64))
    target[32, 32] = 1.0
    result = gs_retrieve(target, 1, fraunhofer_pair(), seed=5)
    assert result.errors[0] < 1e-12
    values = result.phase.values
    assert np.max(np.abs(wrap_phase(values - values[0, 0]))) < 1e-9


def test_gs_off_axis_delta_gives_linear_ramp():
    target = np.zeros((64, 64))
    target[32, 37] = 1.0
    result = gs_retrieve(target, 1, fraunhofer_pair(), seed=5)
    assert result.errors[0] < 1e-12
    # five cycles across the aperture along x
    ramp = 2 * np.pi * 5 * np.arange(64)[np.newaxis, :] / 64
    residual = wrap_phase(result.phase.values - ramp)
    assert np.max(np.abs(wrap_phase(residual - residual[0, 0]))) < 1e-9


def test_gs_letter_f_spot_array():
    target = np.zeros((64, 64))
    spots = 12 + 4 * np.arange(10)
    target[np.ix_(spots, spots)] = letter_f(10, 500e-6).mask
    result = gs_retrieve(target, 50, fraunhofer_pair(), seed=0)
    assert np.all(np.diff(result.errors) <= 1e-12)
    assert result.errors[-1] < 0.75
    assert result.errors[-1] < result.errors[0]
    again = gs_retrieve(target, 50, fraunhofer_pair(), seed=0)
    assert np.array_equal(result.errors, again.errors)


def test_gs_is_seeded():
    target = np.ones((16, 16))
    a = gs_retrieve(target, 3, fraunhofer_pair(), seed=7)
    b = gs_retrieve(target, 3, fraunhofer_pair(), seed=7)
    assert np.array_equal(a.phase.values, b.phase.values)
    with pytest.raises(InputError):
        gs_retrieve(np.zeros((16, 16)), 3, fraunhofer_pair())
    with pytest.raises(InputError):
        gs_retrieve(target, 0, fraunhofer_pair())


def test_full_gs_mode(geom):
    grid = ApertureGrid(geom, 512)
    target, transform = lattice_target(grid)
    assert int(target.sum()) == 100
    assert transform.out_pitch == pytest.approx(543e-9 * 0.25 / 500e-6)
    phase = assemble_hologram(geom, "full_gs", PITCH_512, levels=8, n_iter=3, seed=1)
    assert phase.shape == (512, 512) and phase.levels == 8


def test_display_pattern_rasterize(geom):
    mask = np.zeros((10, 10), dtype=bool)
    mask[0, 9] = True
    pattern = DisplayPattern(mask, geom.pixel_size)
    assert pattern.lit() == [(0, 9)]
    grid = ApertureGrid(geom, 512)
    raster = pattern.rasterize(grid)
    rows, cols = grid.block(0, 9)
    assert raster[rows, cols].all()
    assert raster.sum() == (rows.stop - rows.start) * (cols.stop - cols.start)
    with pytest.raises(GridMismatchError):
        DisplayPattern(np.ones((5, 5), dtype=bool), 100e-6).rasterize(grid)
    with pytest.raises(InputError):
        DisplayPattern(np.ones((2, 3), dtype=bool), 1e-6)


def test_eight_level_efficiency():
    assert levels_efficiency(8) == pytest.approx(0.9496, abs=1e-4)
    assert levels_efficiency(2) == pytest.approx(0.405, abs=1e-3)
    assert ramp_order_efficiency(8) == pytest.approx(levels_efficiency(8), rel=0.01)
    with pytest.raises(InputError):
        levels_efficiency(1)
