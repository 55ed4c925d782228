"""
Material dispersion tables: (wavelength, n, k) rows with linear interpolation.

Text format: one row per line, ``wavelength_nm n k``; lines starting with '#'
and blank lines are ignored.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Tuple, Union

import numpy as np

from holoretina import dist_root
from holoretina.errors import DispersionRangeError, InputError

logger = logging.getLogger(__name__)

NM = 1e-9

BUNDLED_SILICON = "silicon_literature.txt"


@dataclass(frozen=True, eq=False)
class DispersionTable:
    wavelengths: np.ndarray  # meters
    n: np.ndarray
    k: np.ndarray
    name: str = ""

    def __post_init__(self):
        wl = np.asarray(self.wavelengths, dtype=float)
        n = np.asarray(self.n, dtype=float)
        k = np.asarray(self.k, dtype=float)
        if wl.ndim != 1 or wl.shape != n.shape or wl.shape != k.shape:
            raise InputError("dispersion columns must be 1D and of equal length")
        if wl.size < 2:
            raise InputError(f"dispersion table needs >= 2 rows, got {wl.size}")
        if np.any(np.diff(wl) <= 0):
            raise InputError("dispersion wavelengths must be strictly increasing")
        if np.any(n <= 0) or np.any(k < 0):
            raise InputError("dispersion table requires n > 0 and k >= 0")
        object.__setattr__(self, "wavelengths", wl)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)

    @property
    def range(self) -> Tuple[float, float]:
        return float(self.wavelengths[0]), float(self.wavelengths[-1])

    def covers(self, wavelength: float) -> bool:
        lo, hi = self.range
        return lo <= wavelength <= hi


def parse_dispersion(lines: Iterable[str], name: str = "") -> DispersionTable:
    rows = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 3:
            raise InputError(f"{name or 'dispersion'}:{lineno}: expected 3 fields, got {len(fields)}")
        try:
            rows.append(tuple(float(v) for v in fields))
        except ValueError:
            raise InputError(f"{name or 'dispersion'}:{lineno}: non-numeric field in {line!r}") from None
    if not rows:
        raise InputError(f"{name or 'dispersion'}: no data rows")
    data = np.array(rows)
    return DispersionTable(data[:, 0] * NM, data[:, 1], data[:, 2], name=name)


def load_dispersion(path: Union[str, Path]) -> DispersionTable:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read dispersion table {path}: {e}") from e
    table = parse_dispersion(text.splitlines(), name=path.name)
    logger.debug("loaded %d dispersion rows from %s", table.wavelengths.size, path)
    return table


def bundled_dispersion_path(name: str = BUNDLED_SILICON) -> Path:
    return dist_root / "catalog" / name


def interpolate(table: DispersionTable, wavelength: float) -> complex:
    """Complex index n - i*k at the given wavelength (meters); no extrapolation."""
    if not np.isfinite(wavelength) or not table.covers(wavelength):
        lo, hi = table.range
        raise DispersionRangeError(
            f"wavelength {wavelength / NM:.3f} nm outside table range "
            f"[{lo / NM:.3f}, {hi / NM:.3f}] nm{f' ({table.name})' if table.name else ''}"
        )
    n = float(np.interp(wavelength, table.wavelengths, table.n))
    k = float(np.interp(wavelength, table.wavelengths, table.k))
    return complex(n, -k)


Material = Union[DispersionTable, complex, float]


def refractive_index(material: Material, wavelength: float) -> complex:
    """Index of a table or a constant; constants use the same n - i*k sign convention."""
    if isinstance(material, DispersionTable):
        return interpolate(material, wavelength)
    return complex(material)


__all__ = [
    "DispersionTable",
    "Material",
    "bundled_dispersion_path",
    "interpolate",
    "load_dispersion",
    "parse_dispersion",
    "refractive_index",
]
