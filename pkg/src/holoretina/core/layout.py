"""
Oriented-nanobeam placement from a quantized phase map, and layout artifacts.

Every unit cell inside the aperture carries one beam centred in the cell and
rotated by theta = phi / 2, phi being the phase sample that covers the cell
centre. All lengths are meters in memory and nanometers in CSV/SVG.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple, Tuple, Union

import numpy as np

from holoretina.core.field import PhaseMap
from holoretina.errors import InputError, LayoutError

logger = logging.getLogger(__name__)

NM = 1e-9
SCHEMA = "holoretina.nanobeam-layout"
SCHEMA_VERSION = 1
FORMATS = ("json", "csv", "svg")
CLIP_POLICIES = ("strict", "clip")
CSV_HEADER = "x_nm,y_nm,theta_rad,w_nm,l_nm"


class Nanobeam(NamedTuple):
    x: float
    y: float
    theta: float
    width: float
    length: float


@dataclass(frozen=True, eq=False)
class NanobeamLayout:
    """Beams stored column-wise, in row-major cell order (y outer, x inner)."""

    unit_cell: float
    beam_width: float
    beam_length: float
    cells_per_side: int
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    bounds: Tuple[float, float, float, float]

    def __post_init__(self):
        if not (self.x.shape == self.y.shape == self.theta.shape):
            raise LayoutError("beam coordinate arrays differ in length")
        if self.theta.size and (self.theta.min() < -np.pi / 2 or self.theta.max() >= np.pi / 2):
            raise LayoutError("beam orientations must lie in [-pi/2, pi/2)")

    @property
    def count(self) -> int:
        return int(self.x.size)

    def beams(self) -> Iterator[Nanobeam]:
        for x, y, t in zip(self.x.tolist(), self.y.tolist(), self.theta.tolist()):
            yield Nanobeam(x, y, t, self.beam_width, self.beam_length)

    def orientations(self) -> np.ndarray:
        return np.unique(self.theta)

    @classmethod
    def empty(
        cls, unit_cell: float = 230e-9, beam_width: float = 70e-9, beam_length: float = 180e-9
    ) -> "NanobeamLayout":
        none = np.zeros(0)
        return cls(unit_cell, beam_width, beam_length, 0, none, none.copy(), none.copy(), (0.0, 0.0, 0.0, 0.0))


def rotated_extent(theta: np.ndarray, width: float, length: float) -> Tuple[np.ndarray, np.ndarray]:
    """Full x and y extent of a width x length rectangle rotated by theta."""
    c, s = np.abs(np.cos(theta)), np.abs(np.sin(theta))
    return length * c + width * s, length * s + width * c


def generate_layout(
    phase: PhaseMap,
    unit_cell: float = 230e-9,
    beam_width: float = 70e-9,
    beam_length: float = 180e-9,
    clip_policy: str = "strict",
) -> NanobeamLayout:
    if not phase.is_quantized:
        raise LayoutError("layout needs a quantized phase map (levels > 0)")
    if not (unit_cell > 0 and beam_width > 0 and beam_length > 0):
        raise LayoutError("unit cell, beam width and beam length must be positive")
    if clip_policy not in CLIP_POLICIES:
        raise InputError(f"clip policy must be one of {CLIP_POLICIES}, got {clip_policy!r}")

    n_rows, n_cols = phase.shape
    if n_rows != n_cols:
        raise LayoutError(f"phase map must be square, got {n_rows}x{n_cols}")
    aperture = n_rows * phase.pitch
    cells = int(math.floor(aperture / unit_cell + 1e-9))
    half = aperture / 2
    if cells == 0:
        logger.warning("aperture %.4g m is smaller than one %.4g m unit cell; layout is empty", aperture, unit_cell)
        empty = np.zeros(0)
        return NanobeamLayout(unit_cell, beam_width, beam_length, 0, empty, empty, empty, (-half, -half, half, half))

    centers = (np.arange(cells) - (cells - 1) / 2) * unit_cell
    # sample n covers [x_n, x_n + p), as in ApertureGrid
    idx = np.clip(np.floor(centers / phase.pitch).astype(int) + n_rows // 2, 0, n_rows - 1)
    theta_grid = phase.values[np.ix_(idx, idx)] / 2.0

    present = np.unique(theta_grid)
    ext_x, ext_y = rotated_extent(present, beam_width, beam_length)
    worst = float(max(ext_x.max(), ext_y.max()))
    if worst > unit_cell * (1 + 1e-12):
        message = (
            f"beam {beam_length / NM:.4g} x {beam_width / NM:.4g} nm spans {worst / NM:.4g} nm after rotation, "
            f"more than the {unit_cell / NM:.4g} nm unit cell"
        )
        if clip_policy == "strict":
            raise LayoutError(message + "; shorten the beam or choose clip_policy = clip")
        logger.warning("%s; beams will overlap cell boundaries", message)

    xs, ys = np.meshgrid(centers, centers)
    logger.info("layout: %d x %d cells, %d orientation(s)", cells, cells, present.size)
    return NanobeamLayout(
        unit_cell,
        beam_width,
        beam_length,
        cells,
        xs.ravel(),
        ys.ravel(),
        theta_grid.ravel(),
        (-half, -half, half, half),
    )


def _write_json(layout: NanobeamLayout, fh) -> None:
    header = {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "units": "m",
        "unit_cell": layout.unit_cell,
        "cells_per_side": layout.cells_per_side,
        "beam_width": layout.beam_width,
        "beam_length": layout.beam_length,
        "bounds": list(layout.bounds),
    }
    head = json.dumps(header)
    fh.write(head[:-1] + ', "beams": [')
    for n, beam in enumerate(layout.beams()):
        fh.write(",\n" if n else "\n")
        fh.write(json.dumps(beam._asdict()))
    fh.write("\n]}\n" if layout.count else "]}\n")


def _write_csv(layout: NanobeamLayout, fh) -> None:
    fh.write(CSV_HEADER + "\n")
    if not layout.count:
        return
    table = np.column_stack(
        [
            layout.x / NM,
            layout.y / NM,
            layout.theta,
            np.full(layout.count, layout.beam_width / NM),
            np.full(layout.count, layout.beam_length / NM),
        ]
    )
    np.savetxt(fh, table, fmt=["%.4f", "%.4f", "%.12f", "%.4f", "%.4f"], delimiter=",")


def decimation_step(layout: NanobeamLayout, max_beams: int) -> int:
    if max_beams < 1:
        raise InputError(f"svg_max_beams must be >= 1, got {max_beams}")
    if layout.count <= max_beams:
        return 1
    return int(math.ceil(math.sqrt(layout.count / max_beams)))


def _write_svg(layout: NanobeamLayout, fh, max_beams: int) -> None:
    x0, y0, x1, y1 = (v / NM for v in layout.bounds)
    w, l = layout.beam_width / NM, layout.beam_length / NM
    step = decimation_step(layout, max_beams)
    fh.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    fh.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:g} {y0:g} {x1 - x0:g} {y1 - y0:g}" '
        f'width="{x1 - x0:g}" height="{y1 - y0:g}">\n'
    )
    if step > 1:
        fh.write(f"<!-- every {step}th cell per axis -->\n")
    fh.write('<g fill="#1f3b73">\n')
    side = max(layout.cells_per_side, 1)
    for n, beam in enumerate(layout.beams()):
        row, col = divmod(n, side)
        if row % step or col % step:
            continue
        cx, cy = beam.x / NM, beam.y / NM
        deg = math.degrees(beam.theta)
        fh.write(
            f'<rect x="{cx - l / 2:.6g}" y="{cy - w / 2:.6g}" width="{l:.6g}" height="{w:.6g}" '
            f'transform="rotate({deg:.6g} {cx:.6g} {cy:.6g})"/>\n'
        )
    fh.write("</g>\n</svg>\n")


def export_layout(layout: NanobeamLayout, fmt: str, path: Union[str, Path], *, svg_max_beams: int = 20000) -> Path:
    """Write one layout artifact; returns the path written."""
    fmt = fmt.lower().strip()
    if fmt not in FORMATS:
        raise LayoutError(f"unknown layout format {fmt!r}; choose from {', '.join(FORMATS)}")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if fmt == "json":
            _write_json(layout, fh)
        elif fmt == "csv":
            _write_csv(layout, fh)
        else:
            _write_svg(layout, fh, svg_max_beams)
    logger.info("wrote %s layout with %d beams to %s", fmt, layout.count, path)
    return path


def load_layout_json(path: Union[str, Path]) -> NanobeamLayout:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise LayoutError(f"cannot read layout {path}: {e}") from e
    if data.get("schema") != SCHEMA or data.get("version") != SCHEMA_VERSION:
        raise LayoutError(f"{path}: not a {SCHEMA} v{SCHEMA_VERSION} document")
    beams = data.get("beams", [])
    width, length = data["beam_width"], data["beam_length"]
    if any(b["width"] != width or b["length"] != length for b in beams):
        raise LayoutError(f"{path}: beams of mixed size are not supported")
    return NanobeamLayout(
        data["unit_cell"],
        width,
        length,
        int(data["cells_per_side"]),
        np.array([b["x"] for b in beams], dtype=float),
        np.array([b["y"] for b in beams], dtype=float),
        np.array([b["theta"] for b in beams], dtype=float),
        tuple(data["bounds"]),
    )


__all__ = [
    "CLIP_POLICIES",
    "FORMATS",
    "Nanobeam",
    "NanobeamLayout",
    "decimation_step",
    "export_layout",
    "generate_layout",
    "load_layout_json",
    "rotated_extent",
]
