"""
Geometry sweeps of the nanobeam grating and the half-waveplate design search.
"""

from __future__ import annotations

import csv
import itertools
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, TextIO, Union

import numpy as np

from holoretina.core.dispersion import Material
from holoretina.core.field import wrap_phase
from holoretina.core.grating import DEFAULT_HARMONICS, GratingGeometry, solve_grating
from holoretina.errors import InputError

logger = logging.getLogger(__name__)

NM = 1e-9

# 155 nm film of the fabricated 230 nm / 70 nm device; compared against found crossings
REFERENCE_THICKNESS = 155 * NM
REFERENCE_TOLERANCE = 0.15

CSV_HEADER = (
    "lambda_nm",
    "period_nm",
    "width_nm",
    "thickness_nm",
    "pol",
    "t_abs",
    "t_phase_rad",
    "dphi_rad",
    "sum_eff",
)

ProgressCallback = Callable[[int, int], None]


@dataclass(frozen=True)
class SweepPoint:
    """One evaluated (lambda, period, width, thickness) point, lengths in meters."""

    wavelength: float
    period: float
    width: float
    thickness: float
    t_te: complex
    t_tm: complex
    dphi: float
    sum_te: float
    sum_tm: float
    objective: float

    def rows(self) -> List[tuple]:
        lengths = (self.wavelength / NM, self.period / NM, self.width / NM, self.thickness / NM)
        out = []
        for pol, t, total in (("TE", self.t_te, self.sum_te), ("TM", self.t_tm, self.sum_tm)):
            out.append(lengths + (pol, abs(t), wrap_phase(np.angle(t)), self.dphi, total))
        return out


@dataclass(frozen=True)
class SweepResult:
    points: List[SweepPoint]
    skipped: int = 0

    @property
    def ranked(self) -> List[SweepPoint]:
        """Candidates by ascending objective; ties keep grid order."""
        return sorted(self.points, key=lambda p: p.objective)

    @property
    def best(self) -> SweepPoint:
        return self.ranked[0]


def objective(
    t_te: complex, t_tm: complex, dphi: float, weight_amplitude: float = 1.0, weight_phase: float = 1.0
) -> float:
    """Distance from the half-waveplate condition |t_TE| = |t_TM|, dphi = pi."""
    return weight_amplitude * abs(abs(t_te) - abs(t_tm)) + weight_phase * abs(wrap_phase(dphi - np.pi))


def is_subwavelength(period: float, wavelength: float, cover_index: float, substrate_index: float) -> bool:
    return period < wavelength / max(cover_index, substrate_index)


def design_sweep(
    wavelengths: Sequence[float],
    periods: Sequence[float],
    widths: Sequence[float],
    thicknesses: Sequence[float],
    *,
    beam: Material,
    gap: Material = 1.0,
    substrate_index: float = 1.46,
    cover_index: float = 1.0,
    n_harmonics: int = DEFAULT_HARMONICS,
    weight_amplitude: float = 1.0,
    weight_phase: float = 1.0,
    subwavelength_only: bool = True,
    workers: int = 1,
    progress: Optional[ProgressCallback] = None,
) -> SweepResult:
    """Evaluate the solver on the lexicographic grid (lambda, period, width, thickness)."""
    axes = (("wavelength", wavelengths), ("period", periods), ("width", widths), ("thickness", thicknesses))
    for name, values in axes:
        if len(values) == 0:
            raise InputError(f"sweep range for {name} is empty")

    feasible = []
    skipped = 0
    for wl, period, width, thickness in itertools.product(wavelengths, periods, widths, thicknesses):
        if not 0 < width < period:
            skipped += 1
            continue
        if subwavelength_only and not is_subwavelength(period, wl, cover_index, substrate_index):
            skipped += 1
            continue
        feasible.append((wl, period, width, thickness))
    if not feasible:
        raise InputError(
            f"empty feasible set: all {skipped} sweep points violate 0 < width < period"
            + (" or the sub-wavelength limit" if subwavelength_only else "")
        )
    logger.info("design sweep: %d feasible points, %d skipped, %d worker(s)", len(feasible), skipped, workers)

    done = [0]
    lock = threading.Lock()

    def evaluate(point) -> SweepPoint:
        wl, period, width, thickness = point
        geom = GratingGeometry(period, width, thickness, beam, gap, substrate_index, cover_index)
        result = solve_grating(geom, wl, n_harmonics)
        te, tm = result.te, result.tm
        dphi = result.delta_phi
        out = SweepPoint(
            wl, period, width, thickness, te.t, tm.t, dphi, te.total_efficiency, tm.total_efficiency,
            objective(te.t, tm.t, dphi, weight_amplitude, weight_phase),
        )
        if progress is not None:
            with lock:
                done[0] += 1
                progress(done[0], len(feasible))
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(evaluate, feasible))
    else:
        points = [evaluate(p) for p in feasible]
    return SweepResult(points, skipped)


def write_sweep_csv(result: SweepResult, out: Union[str, Path, TextIO]) -> None:
    """Full sweep table, two rows (TE, TM) per point in grid order."""
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_sweep_csv(result, fh)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for point in result.points:
        for row in point.rows():
            writer.writerow([f"{v:.6g}" for v in row[:4]] + [row[4]] + [f"{v:.9g}" for v in row[5:]])


def find_halfwave_crossing(thicknesses: Sequence[float], dphi: Sequence[float]) -> Optional[float]:
    """First thickness where the retardance passes through pi, linearly interpolated.

    ``dphi`` is wrapped; jumps across the -pi/pi seam are not crossings.
    """
    t = np.asarray(thicknesses, dtype=float)
    g = wrap_phase(np.asarray(dphi, dtype=float) - np.pi)
    if t.size != g.size:
        raise InputError("thickness and retardance sequences differ in length")
    for n in range(t.size - 1):
        a, b = g[n], g[n + 1]
        if a == 0:
            return float(t[n])
        if np.sign(a) != np.sign(b) and abs(b - a) < np.pi:
            return float(t[n] + (t[n + 1] - t[n]) * (-a) / (b - a))
    if g.size and g[-1] == 0:
        return float(t[-1])
    return None


def _same(a: float, b: float) -> bool:
    return bool(np.isclose(a, b, rtol=1e-9, atol=0.0))


def thickness_curve(result: SweepResult, wavelength: float, period: float, width: float) -> tuple:
    """(thicknesses, dphi) of the sweep points at one (lambda, period, width)."""
    pts = [
        p for p in result.points
        if _same(p.wavelength, wavelength) and _same(p.period, period) and _same(p.width, width)
    ]
    return np.array([p.thickness for p in pts]), np.array([p.dphi for p in pts])


def parse_range(text: str) -> List[float]:
    """``value``, ``a,b,c`` or inclusive ``start:stop:step``."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise InputError(f"range {text!r} needs step > 0 and stop >= start")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [float(v) for v in start + step * np.arange(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except InputError:
        raise
    except ValueError as e:
        raise InputError(f"cannot parse range {text!r}: {e}") from e


def format_design_report(result: SweepResult, crossings: Iterable[tuple] = ()) -> str:
    best = result.best
    lines = [
        f"points = {len(result.points)}",
        f"skipped = {result.skipped}",
        f"best_lambda_nm = {best.wavelength / NM:.6g}",
        f"best_period_nm = {best.period / NM:.6g}",
        f"best_width_nm = {best.width / NM:.6g}",
        f"best_thickness_nm = {best.thickness / NM:.6g}",
        f"best_t_te_abs = {abs(best.t_te):.6g}",
        f"best_t_tm_abs = {abs(best.t_tm):.6g}",
        f"best_dphi_rad = {best.dphi:.6g}",
        f"best_objective = {best.objective:.6g}",
    ]
    for (wl, period, width), thickness in crossings:
        tag = f"[{wl / NM:.6g},{period / NM:.6g},{width / NM:.6g}]"
        if thickness is None:
            lines.append(f"halfwave_thickness_nm{tag} = none")
            continue
        near = abs(REFERENCE_THICKNESS - thickness) <= REFERENCE_TOLERANCE * thickness
        lines.append(f"halfwave_thickness_nm{tag} = {thickness / NM:.6g}")
        lines.append(f"reference_155nm_within_15pct{tag} = {'yes' if near else 'no'}")
    return "\n".join(lines) + "\n"


__all__ = [
    "CSV_HEADER",
    "SweepPoint",
    "SweepResult",
    "design_sweep",
    "find_halfwave_crossing",
    "format_design_report",
    "is_subwavelength",
    "objective",
    "parse_range",
    "thickness_curve",
    "write_sweep_csv",
]
