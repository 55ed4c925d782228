"""
Target lattices and image metrics on the retina and conjugate planes.

A lattice maps display index k (per axis) to the physical centre of its spot;
the retina lattice is inverted relative to the display.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from holoretina.core.design import DisplayPattern, SystemGeometry
from holoretina.core.field import grid_axis
from holoretina.errors import InputError

logger = logging.getLogger(__name__)

# Pupil diameter used for the fill-ratio report
PUPIL_DIAMETER = 5e-3


@dataclass(frozen=True)
class TargetLattice:
    centers: np.ndarray  # signed spot centre per display index, meters
    spacing: float  # cell side on the target plane, meters
    plane: str

    @property
    def pixels(self) -> int:
        return self.centers.size

    @property
    def step(self) -> float:
        """Signed centre-to-centre step per display index."""
        if self.pixels > 1:
            return float(self.centers[1] - self.centers[0])
        return self.spacing


def retina_scale(geom: SystemGeometry, focal_length: float, retina_distance: float) -> float:
    """Retina position per unit display coordinate, through the chief ray of each cell."""
    d_c, d_r = geom.conjugate_distance, retina_distance
    return 1.0 + d_r / d_c - d_r / focal_length - geom.magnification * d_r / d_c


def retina_lattice(geom: SystemGeometry, focal_length: float, retina_distance: float) -> TargetLattice:
    scale = retina_scale(geom, focal_length, retina_distance)
    if abs(scale) < 1e-9:
        raise InputError("retina lattice collapses to a point for this focal length")
    return TargetLattice(scale * geom.cell_centers(), abs(scale) * geom.pixel_size, "retina")


def conjugate_lattice(geom: SystemGeometry) -> TargetLattice:
    return TargetLattice(
        geom.magnification * geom.cell_centers(), geom.magnification * geom.pixel_size, "conjugate"
    )


def _axis_slices(n: int, pitch: float, lattice: TargetLattice) -> List[slice]:
    coords = grid_axis(n, pitch)
    idx = np.floor((coords - lattice.centers[0]) / lattice.step + 0.5).astype(int)
    slices = []
    for k in range(lattice.pixels):
        hits = np.nonzero(idx == k)[0]
        slices.append(slice(int(hits[0]), int(hits[-1]) + 1) if hits.size else slice(0, 0))
    return slices


def cell_regions(intensity: np.ndarray, pitch: float, lattice: TargetLattice) -> List[Tuple[slice, slice]]:
    """Image regions of every target cell, in display (row, col) order."""
    slices = _axis_slices(intensity.shape[0], pitch, lattice)
    return [(slices[i], slices[j]) for i in range(lattice.pixels) for j in range(lattice.pixels)]


def cell_energies(intensity: np.ndarray, pitch: float, lattice: TargetLattice) -> np.ndarray:
    """Fraction of total image energy inside each target cell (M x M)."""
    total = float(intensity.sum())
    if total <= 0:
        raise InputError("image carries no energy")
    m = lattice.pixels
    out = np.array([intensity[r, c].sum() for r, c in cell_regions(intensity, pitch, lattice)])
    return out.reshape(m, m) / total


def cell_peaks(intensity: np.ndarray, pitch: float, lattice: TargetLattice) -> np.ndarray:
    m = lattice.pixels
    out = [intensity[r, c].max() if intensity[r, c].size else 0.0 for r, c in cell_regions(intensity, pitch, lattice)]
    return np.array(out).reshape(m, m)


def cell_centroids(intensity: np.ndarray, pitch: float, lattice: TargetLattice) -> np.ndarray:
    """Intensity centroid (x, y) of each target cell, NaN for empty cells; shape (M, M, 2)."""
    m = lattice.pixels
    axis = grid_axis(intensity.shape[0], pitch)
    out = np.full((m * m, 2), np.nan)
    for n, (r, c) in enumerate(cell_regions(intensity, pitch, lattice)):
        block = intensity[r, c]
        weight = block.sum()
        if weight > 0:
            out[n, 0] = float((block.sum(axis=0) * axis[c]).sum() / weight)
            out[n, 1] = float((block.sum(axis=1) * axis[r]).sum() / weight)
    return out.reshape(m, m, 2)


def lattice_span(centroids: np.ndarray) -> Tuple[float, float]:
    """Full lattice extent (x, y): centroid range scaled by M / (M - 1)."""
    m = centroids.shape[0]
    if m < 2:
        raise InputError("lattice span needs at least 2 x 2 cells")
    xs, ys = centroids[..., 0], centroids[..., 1]
    scale = m / (m - 1)
    return (
        float((np.nanmax(xs) - np.nanmin(xs)) * scale),
        float((np.nanmax(ys) - np.nanmin(ys)) * scale),
    )


def identify_lit(energies: np.ndarray, rel_threshold: float = 0.5) -> np.ndarray:
    peak = energies.max()
    if peak <= 0:
        return np.zeros_like(energies, dtype=bool)
    return energies >= rel_threshold * peak


def find_spots(intensity: np.ndarray, spacing_px: float, rel_threshold: float = 0.3) -> np.ndarray:
    """Local maxima above rel_threshold * max, at least ~half a lattice step apart. Returns (K, 2) row/col."""
    size = max(3, int(round(0.6 * spacing_px)) | 1)
    local_max = ndimage.maximum_filter(intensity, size=size, mode="constant") == intensity
    strong = intensity >= rel_threshold * intensity.max()
    return np.argwhere(local_max & strong)


def central_core_fraction(intensity: np.ndarray, pitch: float, half_width: float) -> float:
    """Energy fraction inside the centred square |x|, |y| <= half_width."""
    axis = grid_axis(intensity.shape[0], pitch)
    inside = np.abs(axis) <= half_width
    return float(intensity[np.ix_(inside, inside)].sum() / intensity.sum())


def diffraction_blur(geom: SystemGeometry, retina_distance: float) -> float:
    """First-zero radius on the retina of the spot from one display cell."""
    return geom.wavelength * retina_distance / geom.pixel_size


def pupil_fill_ratio(geom: SystemGeometry, pupil_diameter: float = PUPIL_DIAMETER) -> float:
    return geom.aperture**2 / (np.pi * (pupil_diameter / 2) ** 2)


@dataclass
class SimulationMetrics:
    plane: str
    energies: np.ndarray
    lit_expected: np.ndarray
    lit_identified: np.ndarray
    contrast: float
    zeroth_order_fraction: float
    spot_count: int
    span: Optional[Tuple[float, float]] = None
    blur: float = 0.0
    cell_spacing: float = 0.0
    extra: Dict[str, float] = field(default_factory=dict)

    @property
    def identification_accuracy(self) -> float:
        """Fraction of all cells, lit and dark, classified correctly."""
        return float(np.mean(self.lit_expected == self.lit_identified))

    @property
    def lit_recall(self) -> float:
        """Fraction of the lit display cells found lit on the image."""
        expected = int(self.lit_expected.sum())
        if expected == 0:
            return 1.0
        return float((self.lit_expected & self.lit_identified).sum() / expected)

    @property
    def lit_precision(self) -> float:
        identified = int(self.lit_identified.sum())
        if identified == 0:
            return 1.0 if not self.lit_expected.any() else 0.0
        return float((self.lit_expected & self.lit_identified).sum() / identified)

    @property
    def resolvable(self) -> bool:
        return self.blur <= self.cell_spacing


def compute_metrics(
    intensity: np.ndarray,
    pitch: float,
    pattern: DisplayPattern,
    lattice: TargetLattice,
    *,
    co_power_fraction: float = 0.0,
    blur: float = 0.0,
) -> SimulationMetrics:
    energies = cell_energies(intensity, pitch, lattice)
    identified = identify_lit(energies)
    lit = pattern.mask
    lit_mean = float(energies[lit].mean()) if lit.any() else 0.0
    dark_mean = float(energies[~lit].mean()) if (~lit).any() else 0.0
    contrast = lit_mean / dark_mean if dark_mean > 0 else float("inf")
    spots = find_spots(intensity, lattice.spacing / pitch)
    span = None
    if lattice.pixels > 1 and lit.all():
        span = lattice_span(cell_centroids(intensity, pitch, lattice))
    if blur > lattice.spacing:
        logger.warning(
            "cell diffraction blur %.3g m exceeds the %s cell spacing %.3g m; pixels will not be resolved",
            blur,
            lattice.plane,
            lattice.spacing,
        )
    return SimulationMetrics(
        plane=lattice.plane,
        energies=energies,
        lit_expected=lit.copy(),
        lit_identified=identified,
        contrast=contrast,
        zeroth_order_fraction=co_power_fraction,
        spot_count=int(len(spots)),
        span=span,
        blur=blur,
        cell_spacing=lattice.spacing,
    )


def format_report(metrics: SimulationMetrics) -> str:
    """Plain-text metrics report; stable formatting for byte-identical reruns."""
    m = metrics.energies.shape[0]
    lines = [
        f"plane = {metrics.plane}",
        f"cells = {m}x{m}",
        f"contrast = {metrics.contrast:.6g}",
        f"zeroth_order_fraction = {metrics.zeroth_order_fraction:.6g}",
        f"spot_count = {metrics.spot_count}",
        f"identification_accuracy = {metrics.identification_accuracy:.6g}",
        f"lit_recall = {metrics.lit_recall:.6g}",
        f"lit_precision = {metrics.lit_precision:.6g}",
        f"cell_spacing_m = {metrics.cell_spacing:.6g}",
        f"diffraction_blur_m = {metrics.blur:.6g}",
        f"resolvable = {'yes' if metrics.resolvable else 'no'}",
    ]
    if metrics.span is not None:
        lines.append(f"lattice_span_m = {metrics.span[0]:.6g} {metrics.span[1]:.6g}")
    for key in sorted(metrics.extra):
        lines.append(f"{key} = {metrics.extra[key]:.6g}")
    lit = [f"{i},{j}" for i, j in zip(*np.nonzero(metrics.lit_identified))]
    lines.append(f"lit_cells = {' '.join(lit)}")
    lines.append("# energy fraction per display cell (row i, column j)")
    for row in metrics.energies:
        lines.append(" ".join(f"{v:.6f}" for v in row))
    return "\n".join(lines) + "\n"


__all__ = [
    "SimulationMetrics",
    "TargetLattice",
    "cell_centroids",
    "cell_energies",
    "cell_peaks",
    "cell_regions",
    "central_core_fraction",
    "compute_metrics",
    "conjugate_lattice",
    "diffraction_blur",
    "find_spots",
    "format_report",
    "identify_lit",
    "lattice_span",
    "pupil_fill_ratio",
    "retina_lattice",
    "retina_scale",
]
