"""
End-to-end eye simulation: metasurface -> thin eye lens -> retina, and the
backward reconstruction of the virtual (conjugate) plane.

The aperture field of every lit display pixel is split into the converted
(geometric-phase) channel and the unconverted zeroth order. The two channels are
orthogonal circular polarizations, so their intensities add. Display pixels are
mutually incoherent by default.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Tuple

import numpy as np

from holoretina.core.design import ApertureGrid, DisplayPattern, SystemGeometry
from holoretina.core.field import ComplexField, PhaseMap
from holoretina.core.metrics import cell_peaks, retina_lattice
from holoretina.core.pb import Helicity, PBElement, pb_cross_field
from holoretina.core.propagation import FresnelTransform
from holoretina.errors import GridMismatchError, InputError

logger = logging.getLogger(__name__)

PLANES = ("retina", "conjugate")


@dataclass(frozen=True)
class EyeGeometry:
    focal_length: float = 0.017
    retina_distance: float = 0.025
    accommodation: Optional[float] = None

    def __post_init__(self):
        if not self.focal_length > 0:
            raise InputError(f"eye focal length must be positive, got {self.focal_length}")
        if not self.retina_distance > 0:
            raise InputError(f"retina distance must be positive, got {self.retina_distance}")
        if self.accommodation is not None and not self.accommodation > 0:
            raise InputError(f"accommodation focal length must be positive, got {self.accommodation}")

    @property
    def f(self) -> float:
        return self.accommodation if self.accommodation is not None else self.focal_length

    def accommodate(self, f: float) -> "EyeGeometry":
        return replace(self, accommodation=f)

    @classmethod
    def bench(cls) -> "EyeGeometry":
        """The mock-eye bench: 17 mm eye lens, 25 mm to the retina camera."""
        return cls(0.017, 0.025)

    @classmethod
    def focused_at(cls, object_distance: float, retina_distance: float = 0.025) -> "EyeGeometry":
        """Eye accommodated so that a point at object_distance focuses on the retina."""
        return cls(1.0 / (1.0 / object_distance + 1.0 / retina_distance), retina_distance)


@dataclass(frozen=True, eq=False)
class RetinaImage:
    intensity: np.ndarray
    pitch: float
    plane: str
    input_power: float = 0.0
    co_power: float = 0.0

    def __post_init__(self):
        if self.plane not in PLANES:
            raise InputError(f"plane must be one of {PLANES}, got {self.plane!r}")
        if np.any(self.intensity < 0):
            raise InputError("intensity must be nonnegative")

    @property
    def total_power(self) -> float:
        return float(self.intensity.sum() * self.pitch**2)

    @property
    def zeroth_order_fraction(self) -> float:
        total = self.total_power
        return self.co_power / total if total > 0 else 0.0


def registered_grid(phase: PhaseMap, pattern: DisplayPattern, wavelength: Optional[float] = None) -> ApertureGrid:
    """Aperture grid shared by a phase map and a display pattern, or GridMismatchError."""
    n_rows, n_cols = phase.shape
    if n_rows != n_cols:
        raise GridMismatchError(f"phase map must be square, got {n_rows}x{n_cols}")
    aperture = n_rows * phase.pitch
    if abs(pattern.side - aperture) > phase.pitch:
        raise GridMismatchError(
            f"display pattern spans {pattern.side:.6g} m but the phase map spans {aperture:.6g} m"
        )
    wl = wavelength or phase.wavelength
    if not wl or wl <= 0:
        raise InputError("wavelength unknown: phase map carries none and none was given")
    geom = SystemGeometry(aperture=aperture, pixels=pattern.pixels, wavelength=wl)
    return ApertureGrid(geom, n_rows)


class _Renderer:
    """Propagates per-pixel aperture fields through one Fresnel leg."""

    def __init__(
        self,
        phase: PhaseMap,
        pattern: DisplayPattern,
        elem: PBElement,
        helicity: Helicity,
        analyzer: bool,
        wavelength: Optional[float],
    ):
        self.grid = registered_grid(phase, pattern, wavelength)
        self.pattern = pattern
        self.cross = pb_cross_field(elem, phase.values, helicity)
        self.co = 0j if analyzer else elem.co_amplitude
        self.wavelength = self.grid.geom.wavelength

    def fields(self, transform: FresnelTransform, pixels) -> Tuple[np.ndarray, np.ndarray]:
        """Coherent cross and co fields of the given set of pixels."""
        mask = np.zeros(self.pattern.mask.shape, dtype=bool)
        for i, j in pixels:
            mask[i, j] = True
        raster = DisplayPattern(mask, self.pattern.pixel_size).rasterize(self.grid)
        cross = transform.forward(np.where(raster, self.cross, 0))
        co = transform.forward(raster * self.co) if self.co != 0 else np.zeros_like(cross)
        return cross, co

    def render(self, transform: FresnelTransform, coherent: bool, plane: str, with_co: bool = True) -> RetinaImage:
        lit = self.pattern.lit()
        n = self.grid.n
        cross_i = np.zeros((n, n))
        co_i = np.zeros((n, n))
        groups = [lit] if coherent else [[p] for p in lit]
        buffer = np.zeros((n, n), dtype=complex)
        for group in groups:
            if not group:
                continue
            buffer[:] = 0
            for i, j in group:
                rows, cols = self.grid.block(i, j)
                buffer[rows, cols] = self.cross[rows, cols]
            cross_i += np.abs(transform.forward(buffer)) ** 2
            if with_co and self.co != 0:
                buffer[:] = 0
                for i, j in group:
                    rows, cols = self.grid.block(i, j)
                    buffer[rows, cols] = self.co
                co_i += np.abs(transform.forward(buffer)) ** 2
        raster = self.pattern.rasterize(self.grid)
        input_power = float(raster.sum() * self.grid.pitch**2)
        co_power = float(co_i.sum() * transform.out_pitch**2)
        mode = "coherent" if coherent else "incoherent"
        logger.debug("rendered %d pixels on the %s plane (%s)", len(lit), plane, mode)
        return RetinaImage(cross_i + co_i, transform.out_pitch, plane, input_power, co_power)


def _retina_transform(grid: ApertureGrid, eye: EyeGeometry) -> FresnelTransform:
    return FresnelTransform(grid.n, grid.pitch, grid.geom.wavelength, eye.retina_distance, focal_length=eye.f)


def eye_simulate(
    phase: PhaseMap,
    mask: DisplayPattern,
    eye: EyeGeometry,
    elem: PBElement,
    *,
    analyzer: bool = False,
    coherent: bool = False,
    helicity: "Helicity | str" = Helicity.R,
    wavelength: Optional[float] = None,
) -> RetinaImage:
    """Retina-plane intensity for a displayed pattern seen through the metasurface."""
    renderer = _Renderer(phase, mask, elem, Helicity.parse(helicity), analyzer, wavelength)
    transform = _retina_transform(renderer.grid, eye)
    return renderer.render(transform, coherent, "retina")


class RetinaFields(NamedTuple):
    cross: ComplexField
    co: ComplexField


def retina_fields(
    phase: PhaseMap,
    mask: DisplayPattern,
    eye: EyeGeometry,
    elem: PBElement,
    *,
    analyzer: bool = False,
    helicity: "Helicity | str" = Helicity.R,
    wavelength: Optional[float] = None,
) -> RetinaFields:
    """Coherent retina fields of all lit pixels, per polarization channel."""
    renderer = _Renderer(phase, mask, elem, Helicity.parse(helicity), analyzer, wavelength)
    transform = _retina_transform(renderer.grid, eye)
    cross, co = renderer.fields(transform, mask.lit())
    wl = renderer.wavelength
    return RetinaFields(ComplexField(cross, transform.out_pitch, wl), ComplexField(co, transform.out_pitch, wl))


def conjugate_reconstruct(
    phase: PhaseMap,
    mask: DisplayPattern,
    conjugate_distance: float = 0.25,
    *,
    elem: Optional[PBElement] = None,
    coherent: bool = False,
    helicity: "Helicity | str" = Helicity.R,
    wavelength: Optional[float] = None,
) -> RetinaImage:
    """Back-propagate the converted channel to the virtual plane at -conjugate_distance."""
    if not conjugate_distance > 0:
        raise InputError(f"conjugate distance must be positive, got {conjugate_distance}")
    renderer = _Renderer(phase, mask, elem or PBElement.ideal(), Helicity.parse(helicity), True, wavelength)
    grid = renderer.grid
    transform = FresnelTransform(grid.n, grid.pitch, grid.geom.wavelength, -conjugate_distance)
    return renderer.render(transform, coherent, "conjugate", with_co=False)


class AccommodationSweep(NamedTuple):
    best_f: float
    focal_lengths: np.ndarray
    sharpness: np.ndarray
    # defocus blur across the range over the diffraction spot of one display cell
    defocus_ratio: float = 0.0
    at_edge: bool = False

    @property
    def resolved(self) -> bool:
        """True when the sweep can locate a focus: the cue exceeds the spot and the peak is interior."""
        return self.defocus_ratio >= 1.0 and not self.at_edge


def defocus_ratio(
    cell_side: float, wavelength: float, f_range: Tuple[float, float], retina_distance: float
) -> float:
    """Defocus blur a*d*|1/f_min - 1/f_max| of one cell over its diffraction spot lambda*d/a.

    Below 1 the cell beam is narrower than its own depth of focus and every
    focal length in the range gives the same spot.
    """
    f_min, f_max = f_range
    blur = cell_side * retina_distance * abs(1.0 / f_min - 1.0 / f_max)
    spot = wavelength * retina_distance / cell_side
    return blur / spot


def sharpness(image: RetinaImage, geom: SystemGeometry, eye: EyeGeometry, pattern: DisplayPattern) -> float:
    """Sum over lit target cells of the peak intensity, over the total intensity."""
    lattice = retina_lattice(geom, eye.f, eye.retina_distance)
    peaks = cell_peaks(image.intensity, image.pitch, lattice)
    return float(peaks[pattern.mask].sum() / image.intensity.sum())


def accommodation_sweep(
    phase: PhaseMap,
    mask: DisplayPattern,
    eye: EyeGeometry,
    f_range: Tuple[float, float],
    steps: int,
    *,
    geom: Optional[SystemGeometry] = None,
    elem: Optional[PBElement] = None,
    analyzer: bool = True,
    coherent: bool = False,
    helicity: "Helicity | str" = Helicity.R,
) -> AccommodationSweep:
    """Scan the eye-lens focal length and return the sharpest setting."""
    f_min, f_max = f_range
    if not (0 < f_min < f_max):
        raise InputError(f"accommodation range must satisfy 0 < f_min < f_max, got {f_range}")
    if steps < 3:
        raise InputError(f"accommodation sweep needs >= 3 steps, got {steps}")
    elem = elem or PBElement.ideal()
    renderer = _Renderer(phase, mask, elem, Helicity.parse(helicity), analyzer, geom.wavelength if geom else None)
    if geom is None:
        geom = renderer.grid.geom
    focal_lengths = np.linspace(f_min, f_max, steps)
    values = np.empty(steps)
    for n, f in enumerate(focal_lengths):
        focused = eye.accommodate(float(f))
        image = renderer.render(_retina_transform(renderer.grid, focused), coherent, "retina")
        values[n] = sharpness(image, geom, focused, mask)
    peak = int(np.argmax(values))
    best = float(focal_lengths[peak])
    ratio = defocus_ratio(mask.pixel_size, renderer.wavelength, f_range, eye.retina_distance)
    sweep = AccommodationSweep(best, focal_lengths, values, ratio, peak in (0, steps - 1))
    if not sweep.resolved:
        logger.warning(
            "accommodation sweep cannot locate a focus (defocus ratio %.3g, peak %s); %.4g m is not a best focus",
            ratio, "on the range edge" if sweep.at_edge else "interior", best,
        )
    else:
        logger.info("accommodation sweep: best f = %.4g m over %d steps", best, steps)
    return sweep


__all__ = [
    "AccommodationSweep",
    "EyeGeometry",
    "PLANES",
    "RetinaFields",
    "RetinaImage",
    "accommodation_sweep",
    "conjugate_reconstruct",
    "defocus_ratio",
    "eye_simulate",
    "registered_grid",
    "retina_fields",
    "sharpness",
]
