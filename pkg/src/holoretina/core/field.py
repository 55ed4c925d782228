"""
Sampled optical fields and wrapped phase maps.

Grid convention: an even side count N with sample n at (n - N/2) * pitch + origin,
so the centre sample coincides with the zero frequency of a centred FFT.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Tuple, Union

import numpy as np

from holoretina.errors import InputError

TWO_PI = 2.0 * np.pi

ArrayLike = Union[float, np.ndarray]


def grid_axis(n: int, pitch: float, origin: float = 0.0) -> np.ndarray:
    """1D sample coordinates of an n-sample centred grid."""
    return (np.arange(n) - n // 2) * pitch + origin


def _check_square_even(samples: np.ndarray, what: str) -> None:
    if samples.ndim != 2 or samples.shape[0] != samples.shape[1]:
        raise InputError(f"{what} must be a square 2D grid, got shape {samples.shape}")
    n = samples.shape[0]
    if n < 2 or n % 2:
        raise InputError(f"{what} side count must be even and >= 2, got {n}")


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Scalar complex amplitude on a square grid (SI units)."""

    samples: np.ndarray
    pitch: float
    wavelength: float
    origin: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        _check_square_even(samples, "ComplexField")
        if not self.pitch > 0:
            raise InputError(f"pitch must be positive, got {self.pitch}")
        if not self.wavelength > 0:
            raise InputError(f"wavelength must be positive, got {self.wavelength}")
        object.__setattr__(self, "samples", samples)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def extent(self) -> float:
        return self.n * self.pitch

    @property
    def k(self) -> float:
        return TWO_PI / self.wavelength

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        """(x, y) sample coordinates; rows run along y, columns along x."""
        return (
            grid_axis(self.n, self.pitch, self.origin[0]),
            grid_axis(self.n, self.pitch, self.origin[1]),
        )

    def radius_squared(self) -> np.ndarray:
        x, y = self.axes()
        return x[np.newaxis, :] ** 2 + y[:, np.newaxis] ** 2

    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def power(self) -> float:
        """Sum of |U|^2 * pitch^2."""
        total = float(np.sum(self.intensity()) * self.pitch**2)
        if not np.isfinite(total):
            raise InputError("field power is not finite")
        return total

    def with_samples(self, samples: np.ndarray, pitch: float | None = None) -> "ComplexField":
        return replace(self, samples=samples, pitch=self.pitch if pitch is None else pitch)


def wrap_phase(x: ArrayLike) -> ArrayLike:
    """Wrap to the half-open interval [-pi, pi). Values already inside are returned unchanged."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError("wrap_phase: non-finite input")
    wrapped = np.mod(arr + np.pi, TWO_PI) - np.pi
    # mod can round up to exactly 2*pi for tiny negative offsets
    wrapped = np.where(wrapped >= np.pi, wrapped - TWO_PI, wrapped)
    out = np.where((arr >= -np.pi) & (arr < np.pi), arr, wrapped)
    if out.ndim == 0:
        return float(out)
    return out


def level_values(levels: int) -> np.ndarray:
    """The L phase levels -pi + k * 2pi/L."""
    return -np.pi + np.arange(levels) * (TWO_PI / levels)


@dataclass(frozen=True, eq=False)
class PhaseMap:
    """Wrapped phase over the aperture. levels == 0 means continuous."""

    values: np.ndarray
    pitch: float
    levels: int = 0
    wavelength: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InputError(f"PhaseMap must be 2D, got shape {values.shape}")
        if not self.pitch > 0:
            raise InputError(f"pitch must be positive, got {self.pitch}")
        if self.levels < 0 or self.levels == 1:
            raise InputError(f"levels must be 0 or >= 2, got {self.levels}")
        if not np.all(np.isfinite(values)):
            raise InputError("PhaseMap contains non-finite values")
        if np.any(values < -np.pi) or np.any(values >= np.pi):
            raise InputError("PhaseMap values must lie in [-pi, pi)")
        if self.levels:
            step = TWO_PI / self.levels
            k = np.rint((values + np.pi) / step)
            if np.any(np.abs(values - (-np.pi + k * step)) > 1e-9):
                raise InputError(f"PhaseMap values are not on the {self.levels}-level grid")
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def is_quantized(self) -> bool:
        return self.levels > 0

    def block(self, rows: slice, cols: slice) -> "PhaseMap":
        return replace(self, values=self.values[rows, cols])


def quantize_phase(phase_map: PhaseMap, levels: int) -> PhaseMap:
    """Snap every value to the nearest of L levels -pi + k*2pi/L.

    Nearest is measured on the phase circle, so values just below pi snap to -pi.
    Exact ties go to the lower level.
    """
    if levels < 2:
        raise InputError(f"quantize_phase: level count must be >= 2, got {levels}")
    step = TWO_PI / levels
    u = (phase_map.values + np.pi) / step
    k = np.mod(np.ceil(u - 0.5), levels)
    values = -np.pi + k * step
    return replace(phase_map, values=values, levels=levels)


def quantization_error(original: PhaseMap, quantized: PhaseMap) -> np.ndarray:
    """Elementwise circular error quantized - original."""
    return wrap_phase(quantized.values - original.values)


__all__ = [
    "ComplexField",
    "PhaseMap",
    "TWO_PI",
    "grid_axis",
    "level_values",
    "quantization_error",
    "quantize_phase",
    "wrap_phase",
]
