import numpy as np
import pytest

from holoretina.core.field import (
    ComplexField,
    PhaseMap,
    level_values,
    quantization_error,
    quantize_phase,
    wrap_phase,
)
from holoretina.errors import InputError


def test_wrap_phase_half_open_interval():
    assert wrap_phase(np.pi) == -np.pi
    assert wrap_phase(-np.pi) == -np.pi
    assert wrap_phase(3 * np.pi / 2) == pytest.approx(-np.pi / 2)
    assert wrap_phase(0.25) == 0.25


def test_wrap_phase_is_idempotent(rng):
    x = rng.uniform(-50, 50, size=10000)
    once = wrap_phase(x)
    assert np.all(once >= -np.pi) and np.all(once < np.pi)
    assert np.array_equal(wrap_phase(once), once)


def test_wrap_phase_rejects_non_finite():
    with pytest.raises(InputError):
        wrap_phase(np.array([0.0, np.nan]))


def _map(values, levels=0):
    return PhaseMap(np.asarray(values, dtype=float).reshape(1, -1), 1e-6, levels)


def test_quantize_examples():
    q = quantize_phase(_map([0.0, np.pi / 2, np.pi - 0.4, -np.pi]), 8)
    np.testing.assert_allclose(q.values[0, :2], [0.0, np.pi / 2], atol=1e-15)
    assert q.values[0, 2] == pytest.approx(3 * np.pi / 4)
    assert q.values[0, 3] == -np.pi


def test_quantize_wraps_to_nearest_level_on_circle():
    # pi - eps is closer to -pi than to 3pi/4 on the phase circle
    q = quantize_phase(_map([np.pi - 1e-3]), 8)
    assert q.values[0, 0] == -np.pi


def test_quantize_tie_goes_to_lower_level():
    # -pi/2 is exactly halfway between the binary levels -pi and 0
    q = quantize_phase(_map([-np.pi / 2]), 2)
    assert q.values[0, 0] == -np.pi


def test_quantize_error_bound_and_idempotence(rng):
    phase = PhaseMap(rng.uniform(-np.pi, np.pi, size=(64, 64)), 1e-6)
    for levels in (2, 4, 8, 16):
        q = quantize_phase(phase, levels)
        err = quantization_error(phase, q)
        assert np.max(np.abs(err)) <= np.pi / levels + 1e-12
        assert np.array_equal(quantize_phase(q, levels).values, q.values)
        assert set(np.unique(q.values)) <= set(level_values(levels))


def test_quantize_rejects_single_level():
    with pytest.raises(InputError):
        quantize_phase(_map([0.0]), 1)


def test_phase_map_validation():
    with pytest.raises(InputError):
        _map([np.pi])
    with pytest.raises(InputError):
        _map([0.1], levels=8)
    with pytest.raises(InputError):
        PhaseMap(np.zeros((2, 2)), 0.0)


def test_complex_field_grid_rules():
    with pytest.raises(InputError):
        ComplexField(np.ones((3, 3)), 1e-6, 500e-9)
    with pytest.raises(InputError):
        ComplexField(np.ones((4, 2)), 1e-6, 500e-9)
    field = ComplexField(np.ones((4, 4)), 2.0, 500e-9)
    assert field.power() == pytest.approx(64.0)
    x, y = field.axes()
    np.testing.assert_allclose(x, [-4.0, -2.0, 0.0, 2.0])
    assert field.radius_squared()[2, 2] == 0.0
