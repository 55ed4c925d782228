"""
Hologram synthesis: per-cell virtual-point phase, Gerchberg-Saxton retrieval,
full-aperture assembly and quantization.

Display cell (i, j) is row i (y) and column j (x). Its light is meant to appear
to come from the virtual point (Mag * x_c, Mag * y_c, -d_c), so the eye sees the
display pixel upright and magnified on the conjugate plane.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from holoretina.core.field import TWO_PI, PhaseMap, grid_axis, quantize_phase, wrap_phase
from holoretina.core.propagation import FresnelTransform, PropagatorPair
from holoretina.errors import GridMismatchError, InputError, NumericalError, SamplingError

logger = logging.getLogger(__name__)

# Minimum samples per 2*pi period of the local phase ramp
MIN_SAMPLES_PER_PERIOD = 4

MODES = ("per_cell", "full_gs")


@dataclass(frozen=True)
class SystemGeometry:
    aperture: float = 500e-6
    pixels: int = 10
    conjugate_distance: float = 0.25
    magnification: float = 100.0
    wavelength: float = 543e-9

    def __post_init__(self):
        if not self.aperture > 0:
            raise InputError(f"aperture must be positive, got {self.aperture}")
        if int(self.pixels) != self.pixels or self.pixels < 1:
            raise InputError(f"pixel count must be a positive integer, got {self.pixels}")
        if not self.conjugate_distance > 0:
            raise InputError(f"conjugate distance must be positive, got {self.conjugate_distance}")
        if not self.magnification > 0:
            raise InputError(f"magnification must be positive, got {self.magnification}")
        if not self.wavelength > 0:
            raise InputError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def pixel_size(self) -> float:
        return self.aperture / self.pixels

    @property
    def k(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def conjugate_side(self) -> float:
        return self.magnification * self.aperture

    def cell_centers(self) -> np.ndarray:
        """Centre coordinate of each cell along one axis (index 0 at -aperture/2)."""
        return (np.arange(self.pixels) + 0.5) * self.pixel_size - self.aperture / 2

    def virtual_point(self, i: int, j: int) -> Tuple[float, float]:
        centers = self.cell_centers()
        return self.magnification * centers[j], self.magnification * centers[i]


class ApertureGrid:
    """Sampling of the square aperture and the sample blocks owned by each display cell."""

    def __init__(self, geom: SystemGeometry, n: int):
        if n < 2 or n % 2:
            raise InputError(f"grid side count must be even and >= 2, got {n}")
        self.geom = geom
        self.n = n
        self.pitch = geom.aperture / n
        self.axis = grid_axis(n, self.pitch)
        owner = np.floor((self.axis + geom.aperture / 2) / geom.pixel_size).astype(int)
        owner = np.clip(owner, 0, geom.pixels - 1)
        bounds = np.searchsorted(owner, np.arange(geom.pixels + 1), side="left")
        self.slices: List[slice] = [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]
        if any(s.stop <= s.start for s in self.slices):
            raise SamplingError(
                f"{n} samples cannot resolve {geom.pixels} cells across {geom.aperture:.4g} m"
            )
        self.owner = owner

    @classmethod
    def from_pitch(cls, geom: SystemGeometry, pitch: float) -> "ApertureGrid":
        if not pitch > 0:
            raise InputError(f"pitch must be positive, got {pitch}")
        n = int(round(geom.aperture / pitch))
        if abs(n * pitch - geom.aperture) > pitch or n % 2:
            raise GridMismatchError(
                f"pitch {pitch:.6g} m does not tile the {geom.aperture:.6g} m aperture into an even grid"
            )
        return cls(geom, n)

    def block(self, i: int, j: int) -> Tuple[slice, slice]:
        return self.slices[i], self.slices[j]


@dataclass(frozen=True, eq=False)
class DisplayPattern:
    """Which display pixels are lit. Row i, column j as in a text rendering."""

    mask: np.ndarray
    pixel_size: float

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.ndim != 2 or min(mask.shape) < 1:
            raise InputError(f"display pattern must be a non-empty 2D grid, got shape {mask.shape}")
        if mask.shape[0] != mask.shape[1]:
            raise InputError(f"display pattern must be square, got {mask.shape[0]}x{mask.shape[1]}")
        if not self.pixel_size > 0:
            raise InputError(f"pixel size must be positive, got {self.pixel_size}")
        object.__setattr__(self, "mask", mask)

    @property
    def pixels(self) -> int:
        return self.mask.shape[0]

    @property
    def side(self) -> float:
        return self.pixels * self.pixel_size

    def lit(self) -> List[Tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.mask))]

    def single(self, i: int, j: int) -> "DisplayPattern":
        mask = np.zeros_like(self.mask)
        mask[i, j] = True
        return DisplayPattern(mask, self.pixel_size)

    def rasterize(self, grid: ApertureGrid) -> np.ndarray:
        """Boolean amplitude mask on the aperture grid."""
        if self.pixels != grid.geom.pixels or abs(self.side - grid.geom.aperture) > grid.pitch:
            raise GridMismatchError(
                f"{self.pixels}x{self.pixels} pattern over {self.side:.6g} m does not match "
                f"{grid.geom.pixels}x{grid.geom.pixels} cells over {grid.geom.aperture:.6g} m"
            )
        return self.mask[np.ix_(grid.owner, grid.owner)]

    @classmethod
    def full(cls, geom: SystemGeometry) -> "DisplayPattern":
        return cls(np.ones((geom.pixels, geom.pixels), dtype=bool), geom.pixel_size)


def _spherical_phase(x: np.ndarray, y: np.ndarray, px: float, py: float, d: float, k: float) -> np.ndarray:
    rho2 = (x[np.newaxis, :] - px) ** 2 + (y[:, np.newaxis] - py) ** 2
    # k*(sqrt(rho^2 + d^2) - d) without cancellation at large d
    return k * rho2 / (np.sqrt(rho2 + d * d) + d)


def required_pitch(
    geom: SystemGeometry, grid_axis_x: np.ndarray, grid_axis_y: np.ndarray, px: float, py: float
) -> float:
    """Coarsest pitch that keeps MIN_SAMPLES_PER_PERIOD samples per local 2*pi ramp."""
    dx = np.max(np.abs(grid_axis_x[[0, -1]] - px))
    dy = np.max(np.abs(grid_axis_y[[0, -1]] - py))
    rho = np.hypot(dx, dy)
    if rho == 0:
        return np.inf
    period = geom.wavelength * np.hypot(rho, geom.conjugate_distance) / rho
    return period / MIN_SAMPLES_PER_PERIOD


def _cell_phase(grid: ApertureGrid, i: int, j: int) -> np.ndarray:
    geom = grid.geom
    rows, cols = grid.block(i, j)
    x, y = grid.axis[cols], grid.axis[rows]
    px, py = geom.virtual_point(i, j)
    needed = required_pitch(geom, x, y, px, py)
    if grid.pitch > needed:
        raise SamplingError(
            f"cell ({i}, {j}) is undersampled at pitch {grid.pitch:.4g} m; required pitch <= {needed:.4g} m"
        )
    return wrap_phase(_spherical_phase(x, y, px, py, geom.conjugate_distance, geom.k))


def cell_phase(i: int, j: int, geom: SystemGeometry, pitch: float) -> PhaseMap:
    """Phase of cell (i, j): a spherical wave diverging from its magnified virtual point."""
    if not (0 <= i < geom.pixels and 0 <= j < geom.pixels):
        raise InputError(f"cell ({i}, {j}) outside the {geom.pixels}x{geom.pixels} grid")
    grid = ApertureGrid.from_pitch(geom, pitch)
    return PhaseMap(_cell_phase(grid, i, j), grid.pitch, 0, geom.wavelength)


class GSResult(NamedTuple):
    phase: PhaseMap
    errors: np.ndarray


def _image_error(image: np.ndarray, target: np.ndarray, target_norm: float) -> float:
    return float(np.sqrt(np.sum((np.abs(image) - target) ** 2)) / target_norm)


def gs_retrieve(
    target_amp: np.ndarray,
    n_iter: int,
    propagator: PropagatorPair,
    seed: int = 0,
    source_amp: Optional[np.ndarray] = None,
    wavelength: float = 0.0,
) -> GSResult:
    """Gerchberg-Saxton phase retrieval between the aperture and the target plane.

    errors[k] is the normalised image-domain amplitude error after round k + 1;
    the sequence is non-increasing for a unitary propagator pair.
    """
    target = np.asarray(target_amp, dtype=float)
    if target.ndim != 2:
        raise InputError("target amplitude must be 2D")
    if np.any(target < 0) or not np.all(np.isfinite(target)):
        raise InputError("target amplitude must be finite and nonnegative")
    if not np.any(target > 0):
        raise InputError("target amplitude is all zero")
    if n_iter < 1:
        raise InputError(f"n_iter must be >= 1, got {n_iter}")
    source = np.ones_like(target) if source_amp is None else np.asarray(source_amp, dtype=float)

    rng = np.random.default_rng(seed)
    phase = rng.uniform(-np.pi, np.pi, size=target.shape)

    image = propagator.forward(source * np.exp(1j * phase))
    # match target power to the power that reaches the image plane
    target = target * np.sqrt(np.sum(np.abs(image) ** 2) / np.sum(target**2))
    target_norm = float(np.sqrt(np.sum(target**2)))

    errors = np.empty(n_iter)
    for it in range(n_iter):
        constrained = target * np.exp(1j * np.angle(image))
        back = propagator.backward(constrained)
        phase = np.angle(back)
        image = propagator.forward(source * np.exp(1j * phase))
        errors[it] = _image_error(image, target, target_norm)
        if not np.isfinite(errors[it]):
            raise NumericalError(f"Gerchberg-Saxton diverged at iteration {it + 1}")
    logger.debug("GS: %d iterations, error %.4g -> %.4g", n_iter, errors[0], errors[-1])
    return GSResult(PhaseMap(wrap_phase(phase), propagator.source_pitch, 0, wavelength), errors)


def lattice_target(grid: ApertureGrid) -> Tuple[np.ndarray, FresnelTransform]:
    """Unit spots at every magnified cell centre on the conjugate plane."""
    geom = grid.geom
    transform = FresnelTransform(grid.n, grid.pitch, geom.wavelength, -geom.conjugate_distance)
    target = np.zeros((grid.n, grid.n))
    idx = np.rint(geom.magnification * geom.cell_centers() / transform.out_pitch).astype(int) + grid.n // 2
    if idx.min() < 0 or idx.max() >= grid.n:
        raise SamplingError(
            f"conjugate lattice of {geom.conjugate_side:.4g} m does not fit the "
            f"{grid.n * transform.out_pitch:.4g} m reconstruction window"
        )
    target[np.ix_(idx, idx)] = 1.0
    return target, transform


def assemble_hologram(
    geom: SystemGeometry,
    mode: str,
    pitch: float,
    levels: int = 0,
    *,
    n_iter: int = 50,
    seed: int = 0,
) -> PhaseMap:
    """Full-aperture phase map, optionally quantized to ``levels``."""
    if mode not in MODES:
        raise InputError(f"unknown design mode {mode!r}; expected one of {MODES}")
    grid = ApertureGrid.from_pitch(geom, pitch)
    if mode == "per_cell":
        values = np.empty((grid.n, grid.n))
        for i in range(geom.pixels):
            for j in range(geom.pixels):
                rows, cols = grid.block(i, j)
                values[rows, cols] = _cell_phase(grid, i, j)
        phase = PhaseMap(values, grid.pitch, 0, geom.wavelength)
    else:
        target, transform = lattice_target(grid)
        pair = PropagatorPair(transform.forward, transform.inverse, grid.pitch)
        phase = gs_retrieve(target, n_iter, pair, seed=seed, wavelength=geom.wavelength).phase
    logger.info("assembled %s hologram: %dx%d samples at %.4g m", mode, grid.n, grid.n, grid.pitch)
    if levels:
        phase = quantize_phase(phase, levels)
    return phase


def levels_efficiency(levels: int) -> float:
    """Design-order efficiency of an L-level staircase relative to the continuous ramp."""
    if levels < 2:
        raise InputError(f"level count must be >= 2, got {levels}")
    return float(np.sinc(1.0 / levels) ** 2)


def ramp_order_efficiency(
    levels: int,
    samples_per_level: int = 8,
    periods: int = 4,
    wavelength: float = 543e-9,
    pitch: float = 1e-6,
    focal_length: float = 0.1,
) -> float:
    """Measure the quantized-ramp design-order efficiency through a lens focal plane.

    Returns the fraction of focal-plane power in the design order for the L-level
    ramp divided by the same fraction for the continuous ramp.
    """
    period = levels * samples_per_level
    n = period * periods
    if n % 2:
        n *= 2
    x = np.arange(n)
    ramp = -np.pi + TWO_PI * np.mod(x, period) / period
    continuous = PhaseMap(np.tile(ramp, (n, 1)), pitch, 0, wavelength)
    quantized = quantize_phase(continuous, levels)
    transform = FresnelTransform(n, pitch, wavelength, focal_length, focal_length=focal_length)

    def order_fraction(phase: PhaseMap) -> float:
        focal = np.abs(transform.forward(np.exp(1j * phase.values))) ** 2
        return float(focal.max() / focal.sum())

    return order_fraction(quantized) / order_fraction(continuous)


__all__ = [
    "ApertureGrid",
    "DisplayPattern",
    "GSResult",
    "MODES",
    "SystemGeometry",
    "assemble_hologram",
    "cell_phase",
    "gs_retrieve",
    "lattice_target",
    "levels_efficiency",
    "ramp_order_efficiency",
    "required_pitch",
]
