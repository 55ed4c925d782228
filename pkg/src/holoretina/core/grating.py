"""
Rigorous 1D lamellar grating solver (Fourier modal method) at normal incidence.

Conventions follow the Moharam formulation: time dependence exp(+j*w*t), complex
index n - j*k, a forward wave decays as exp(-q*z') with z' = k0*z. TE solves for
E_y with the Laurent rule, TM for H_y with the inverse rule. Layers are joined by
Redheffer star products of interface and propagation S-matrices, so no growing
exponential ever appears.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np
from scipy import linalg

from holoretina.core.dispersion import Material, refractive_index
from holoretina.core.field import wrap_phase
from holoretina.errors import InputError, NumericalError

logger = logging.getLogger(__name__)

MIN_HARMONICS = 5
DEFAULT_HARMONICS = 15


class Polarization(str, enum.Enum):
    TE = "TE"
    TM = "TM"


@dataclass(frozen=True)
class GratingGeometry:
    """Lamellar nanobeam grating. Fill factors 0 and 1 are allowed as slab limits."""

    period: float
    width: float
    thickness: float
    beam: Material = 4.08 - 0.041j
    gap: Material = 1.0
    substrate_index: float = 1.46
    cover_index: float = 1.0

    def __post_init__(self):
        if not self.period > 0:
            raise InputError(f"grating period must be positive, got {self.period}")
        if not 0 <= self.width <= self.period:
            raise InputError(f"beam width {self.width} must lie within [0, period={self.period}]")
        if not self.thickness > 0:
            raise InputError(f"grating thickness must be positive, got {self.thickness}")
        if not (self.substrate_index > 0 and self.cover_index > 0):
            raise InputError("cover and substrate indices must be positive")

    @property
    def fill_factor(self) -> float:
        return self.width / self.period

    def describe(self) -> str:
        return (
            f"period={self.period * 1e9:.4g} nm, width={self.width * 1e9:.4g} nm, "
            f"thickness={self.thickness * 1e9:.4g} nm"
        )


@dataclass(frozen=True, eq=False)
class DiffractionChannel:
    """Order-resolved response for one polarization.

    ``t`` and ``r`` are zeroth-order E-field amplitude ratios; efficiencies are
    power fractions per order, indexed like ``orders``.
    """

    polarization: Polarization
    wavelength: float
    orders: np.ndarray
    t: complex
    r: complex
    transmitted: np.ndarray
    reflected: np.ndarray

    @property
    def t_abs(self) -> float:
        return abs(self.t)

    @property
    def t_phase(self) -> float:
        return wrap_phase(np.angle(self.t))

    @property
    def total_efficiency(self) -> float:
        return float(self.transmitted.sum() + self.reflected.sum())

    @property
    def zeroth_transmission(self) -> float:
        return float(self.transmitted[self.orders == 0][0])


@dataclass(frozen=True, eq=False)
class DiffractionResult:
    te: DiffractionChannel
    tm: DiffractionChannel

    @property
    def delta_phi(self) -> float:
        """arg(t_TM) - arg(t_TE) wrapped to [-pi, pi)."""
        return wrap_phase(np.angle(self.tm.t) - np.angle(self.te.t))


def _forward_root(q2: np.ndarray) -> np.ndarray:
    """sqrt with Re(q) >= 0, and Im(q) > 0 on the lossless (Re(q) = 0) branch."""
    q = np.sqrt(np.asarray(q2, dtype=complex))
    flip = (np.abs(q.real) <= 1e-12 * np.maximum(np.abs(q), 1.0)) & (q.imag < 0)
    return np.where(flip, -q, q)


def fourier_coefficients(inside: complex, outside: complex, fill: float, max_order: int) -> np.ndarray:
    """Coefficients h = -max_order..max_order of a centred lamellar profile."""
    h = np.arange(-max_order, max_order + 1)
    coeffs = (inside - outside) * fill * np.sinc(h * fill).astype(complex)
    coeffs[max_order] += outside
    return coeffs


def toeplitz_operator(coeffs: np.ndarray, n_harmonics: int) -> np.ndarray:
    """[[f]]_{mn} = f_{m-n} for m, n in -N..N; coeffs run over -2N..2N."""
    centre = 2 * n_harmonics
    column = coeffs[centre:]
    row = coeffs[centre::-1]
    return linalg.toeplitz(column, row)


class _Region(NamedTuple):
    w: np.ndarray
    v: np.ndarray
    q: np.ndarray


def _homogeneous_region(eps: complex, kx: np.ndarray, pol: Polarization) -> _Region:
    q = _forward_root(kx**2 - eps)
    size = kx.size
    scale = 1.0 if pol is Polarization.TE else 1.0 / eps
    return _Region(np.eye(size, dtype=complex), np.diag(q * scale), q)


def _grating_region(
    eps_beam: complex, eps_gap: complex, fill: float, kx: np.ndarray, n: int, pol: Polarization
) -> _Region:
    size = kx.size
    eye = np.eye(size)
    kx_mat = np.diag(kx)
    e_mat = toeplitz_operator(fourier_coefficients(eps_beam, eps_gap, fill, 2 * n), n)
    if pol is Polarization.TE:
        omega = kx_mat @ kx_mat - e_mat
        coupling = eye
    else:
        p_mat = toeplitz_operator(fourier_coefficients(1.0 / eps_beam, 1.0 / eps_gap, fill, 2 * n), n)
        omega = linalg.solve(p_mat, kx_mat @ linalg.solve(e_mat, kx_mat) - eye)
        coupling = p_mat
    q2, w = linalg.eig(omega)
    q = _forward_root(q2)
    return _Region(w, coupling @ w @ np.diag(q), q)


SMatrix = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def interface_smatrix(left: _Region, right: _Region) -> SMatrix:
    """Scattering matrix of the plane between two regions, amplitudes referenced at the plane."""
    size = left.w.shape[0]
    lhs = np.block([[left.w, -right.w], [left.v, right.v]])
    rhs = np.block([[-left.w, right.w], [left.v, right.v]])
    s = linalg.solve(lhs, rhs)
    return s[:size, :size], s[:size, size:], s[size:, :size], s[size:, size:]


def propagation_smatrix(region: _Region, k0_thickness: float) -> SMatrix:
    x = np.diag(np.exp(-region.q * k0_thickness))
    zero = np.zeros_like(x)
    return zero, x, x, zero


def redheffer_star(a: SMatrix, b: SMatrix) -> SMatrix:
    """Cascade a (left) with b (right)."""
    a11, a12, a21, a22 = a
    b11, b12, b21, b22 = b
    eye = np.eye(a11.shape[0])
    left = linalg.solve((eye - b11 @ a22).T, a12.T).T  # a12 (I - b11 a22)^-1
    right = linalg.solve((eye - a22 @ b11).T, b21.T).T  # b21 (I - a22 b11)^-1
    return (
        a11 + left @ b11 @ a21,
        left @ b12,
        right @ a21,
        b22 + right @ a22 @ b12,
    )


def rcwa_1d(
    geom: GratingGeometry,
    wavelength: float,
    pol: "Polarization | str",
    n_harmonics: int = DEFAULT_HARMONICS,
) -> DiffractionChannel:
    """Fourier modal solution with 2N+1 harmonics for one polarization."""
    try:
        pol = Polarization(pol)
    except ValueError:
        raise InputError(f"polarization must be TE or TM, got {pol!r}") from None
    if n_harmonics < MIN_HARMONICS:
        raise InputError(f"harmonic half-count must be >= {MIN_HARMONICS}, got {n_harmonics}")
    if not wavelength > 0:
        raise InputError(f"wavelength must be positive, got {wavelength}")

    n_beam = refractive_index(geom.beam, wavelength)
    n_gap = refractive_index(geom.gap, wavelength)
    eps_cover, eps_sub = geom.cover_index**2, geom.substrate_index**2
    orders = np.arange(-n_harmonics, n_harmonics + 1)
    kx = orders * wavelength / geom.period
    k0 = 2.0 * np.pi / wavelength

    try:
        cover = _homogeneous_region(eps_cover, kx, pol)
        substrate = _homogeneous_region(eps_sub, kx, pol)
        layer = _grating_region(n_beam**2, n_gap**2, geom.fill_factor, kx, n_harmonics, pol)
        s = redheffer_star(
            redheffer_star(interface_smatrix(cover, layer), propagation_smatrix(layer, k0 * geom.thickness)),
            interface_smatrix(layer, substrate),
        )
    except (linalg.LinAlgError, ValueError) as e:
        raise NumericalError(
            f"modal solver failed ({pol.value}, N={n_harmonics}, {geom.describe()}, "
            f"lambda={wavelength * 1e9:.4g} nm): {e}"
        ) from e

    incident = (orders == 0).astype(complex)
    r_amp = s[0] @ incident
    t_amp = s[2] @ incident
    if not (np.all(np.isfinite(r_amp)) and np.all(np.isfinite(t_amp))):
        raise NumericalError(
            f"modal solver produced non-finite amplitudes ({pol.value}, N={n_harmonics}, {geom.describe()})"
        )

    # Re(kz)/k0 = Im(q) for every order
    kz_in = cover.q[orders == 0][0].imag
    if pol is Polarization.TE:
        transmitted = np.abs(t_amp) ** 2 * substrate.q.imag / kz_in
        reflected = np.abs(r_amp) ** 2 * cover.q.imag / kz_in
        t0, r0 = t_amp[orders == 0][0], r_amp[orders == 0][0]
    else:
        transmitted = np.abs(t_amp) ** 2 * (substrate.q.imag / eps_sub) / (kz_in / eps_cover)
        reflected = np.abs(r_amp) ** 2 * cover.q.imag / kz_in
        # H_y ratio -> E-field ratio
        t0 = t_amp[orders == 0][0] * geom.cover_index / geom.substrate_index
        r0 = r_amp[orders == 0][0]
    transmitted = np.clip(transmitted, 0.0, None)
    reflected = np.clip(reflected, 0.0, None)

    logger.debug(
        "rcwa %s N=%d %s: |t0|=%.6f sum=%.9f", pol.value, n_harmonics, geom.describe(), abs(t0),
        transmitted.sum() + reflected.sum(),
    )
    return DiffractionChannel(pol, wavelength, orders, complex(t0), complex(r0), transmitted, reflected)


def solve_grating(geom: GratingGeometry, wavelength: float, n_harmonics: int = DEFAULT_HARMONICS) -> DiffractionResult:
    return DiffractionResult(
        rcwa_1d(geom, wavelength, Polarization.TE, n_harmonics),
        rcwa_1d(geom, wavelength, Polarization.TM, n_harmonics),
    )


def propagating_orders(
    index: float, wavelength: float, period: float, n_harmonics: int = DEFAULT_HARMONICS
) -> List[int]:
    """Diffraction orders that propagate in a medium of the given index at normal incidence."""
    orders = np.arange(-n_harmonics, n_harmonics + 1)
    return [int(m) for m in orders if abs(m * wavelength / period) < index]


def tmm_slab(
    n_slab: complex, t: float, wavelength: float, n_cover: complex = 1.0, n_substrate: complex = 1.46
) -> complex:
    """Normal-incidence E-field transmission of a homogeneous slab (Airy summation)."""
    if t < 0:
        raise InputError(f"slab thickness must be >= 0, got {t}")
    n1, n2, n3 = complex(n_cover), complex(n_slab), complex(n_substrate)
    r12 = (n1 - n2) / (n1 + n2)
    r23 = (n2 - n3) / (n2 + n3)
    t12 = 2 * n1 / (n1 + n2)
    t23 = 2 * n2 / (n2 + n3)
    phase = np.exp(-1j * 2.0 * np.pi * n2 * t / wavelength)
    return complex(t12 * t23 * phase / (1 + r12 * r23 * phase**2))


def emt_indices(fill: float, n_beam: complex, n_gap: complex) -> Tuple[complex, complex]:
    """Zeroth-order effective indices (n_TE, n_TM) of a sub-wavelength lamellar grating."""
    if not 0 <= fill <= 1:
        raise InputError(f"fill factor must lie in [0, 1], got {fill}")
    eb, eg = complex(n_beam) ** 2, complex(n_gap) ** 2
    n_te = np.sqrt(fill * eb + (1 - fill) * eg)
    n_tm = (fill / eb + (1 - fill) / eg) ** -0.5
    return complex(n_te), complex(n_tm)


def emt_delta_phi(geom: GratingGeometry, wavelength: float) -> float:
    """Retardance predicted by EMT indices in a homogeneous-slab model."""
    n_te, n_tm = emt_indices(
        geom.fill_factor, refractive_index(geom.beam, wavelength), refractive_index(geom.gap, wavelength)
    )
    t_te = tmm_slab(n_te, geom.thickness, wavelength, geom.cover_index, geom.substrate_index)
    t_tm = tmm_slab(n_tm, geom.thickness, wavelength, geom.cover_index, geom.substrate_index)
    return wrap_phase(np.angle(t_tm) - np.angle(t_te))


__all__ = [
    "DEFAULT_HARMONICS",
    "DiffractionChannel",
    "DiffractionResult",
    "GratingGeometry",
    "Polarization",
    "emt_delta_phi",
    "emt_indices",
    "fourier_coefficients",
    "interface_smatrix",
    "propagating_orders",
    "propagation_smatrix",
    "rcwa_1d",
    "redheffer_star",
    "solve_grating",
    "tmm_slab",
    "toeplitz_operator",
]
