"""
Scalar diffraction: band-limited angular spectrum, single-transform Fresnel, thin lens.

Time dependence exp(-i*w*t): a forward plane wave is exp(+i*k*z).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import fft

from holoretina.core.field import TWO_PI, ComplexField, grid_axis
from holoretina.errors import InputError, SamplingError

logger = logging.getLogger(__name__)

FFT_WORKERS = -1

# Fewer passing frequency samples than this and the band limit leaves nothing to propagate
MIN_PASSBAND_SAMPLES = 2


def centered_fft2(a: np.ndarray) -> np.ndarray:
    return fft.fftshift(fft.fft2(fft.ifftshift(a), workers=FFT_WORKERS))


def centered_ifft2(a: np.ndarray) -> np.ndarray:
    return fft.fftshift(fft.ifft2(fft.ifftshift(a), workers=FFT_WORKERS))


def _radius_squared(n: int, pitch: float) -> np.ndarray:
    x = grid_axis(n, pitch)
    return x[np.newaxis, :] ** 2 + x[:, np.newaxis] ** 2


def band_limit(n_padded: int, pitch: float, wavelength: float, dz: float) -> float:
    """Largest alias-free spatial frequency of the transfer function for a throw dz."""
    du = 1.0 / (n_padded * pitch)
    return 1.0 / (wavelength * np.sqrt((2.0 * du * dz) ** 2 + 1.0))


def angular_spectrum(field: ComplexField, dz: float, pad: int = 2) -> ComplexField:
    """Propagate by dz (negative = backwards) with the exact scalar transfer function.

    The field is zero padded by ``pad`` (at least 2 for backward legs), evanescent
    components are dropped and frequencies beyond the alias-free band limit are clamped.
    """
    if not np.isfinite(dz):
        raise InputError(f"angular_spectrum: dz must be finite, got {dz}")
    if dz == 0:
        return field.with_samples(field.samples.copy())
    if pad < 1:
        raise InputError(f"pad must be >= 1, got {pad}")
    if dz < 0 and pad < 2:
        logger.debug("backward angular-spectrum leg: padding raised from %d to 2", pad)
        pad = 2

    n = field.n
    m = n * pad
    du = 1.0 / (m * field.pitch)
    u_max = band_limit(m, field.pitch, field.wavelength, dz)
    if u_max < MIN_PASSBAND_SAMPLES * du:
        # required padding so that the band limit passes MIN_PASSBAND_SAMPLES bins
        needed = int(np.ceil(np.sqrt(2.0 * MIN_PASSBAND_SAMPLES * field.wavelength * abs(dz)) / (n * field.pitch)))
        raise SamplingError(
            f"angular spectrum over {dz:.4g} m aliases on a {n}x{n} grid at pitch "
            f"{field.pitch:.4g} m; use fresnel_single or pad by at least {max(needed, pad + 1)}"
        )

    offset = (m - n) // 2
    padded = np.zeros((m, m), dtype=complex)
    padded[offset : offset + n, offset : offset + n] = field.samples

    u = fft.fftfreq(m, d=field.pitch)
    uu, vv = u[np.newaxis, :], u[:, np.newaxis]
    arg = 1.0 / field.wavelength**2 - uu**2 - vv**2
    passband = (arg > 0) & (np.abs(uu) <= u_max) & (np.abs(vv) <= u_max)
    kz = np.sqrt(np.where(passband, arg, 0.0))
    transfer = np.where(passband, np.exp(1j * TWO_PI * dz * kz), 0.0)

    out = fft.ifft2(fft.fft2(padded, workers=FFT_WORKERS) * transfer, workers=FFT_WORKERS)
    logger.debug("angular spectrum: n=%d pad=%d dz=%.4g band limit=%.4g 1/m", n, pad, dz, u_max)
    return field.with_samples(out[offset : offset + n, offset : offset + n])


def fresnel_output_pitch(n: int, pitch: float, wavelength: float, dz: float) -> float:
    return wavelength * abs(dz) / (n * pitch)


def check_fresnel_sampling(n: int, pitch: float, wavelength: float, dz: float) -> None:
    """The input chirp exp(i k x^2 / 2dz) must stay below Nyquist over the window."""
    dz_min = n * pitch**2 / wavelength
    if abs(dz) < dz_min:
        raise SamplingError(
            f"Fresnel transform over {abs(dz):.4g} m is undersampled on a {n}x{n} grid at "
            f"pitch {pitch:.4g} m (needs |dz| >= {dz_min:.4g} m); use angular_spectrum"
        )


class FresnelTransform:
    """Single-transform Fresnel diffraction with cached chirps.

    Maps an n x n input at ``pitch`` to an n x n output at lambda*|dz|/(n*pitch).
    A thin lens of focal length ``focal_length`` directly in front of the input
    plane is folded into the input chirp. Negative dz runs the same integral
    backwards, which is the exact inverse of the forward transform.
    """

    def __init__(
        self,
        n: int,
        pitch: float,
        wavelength: float,
        dz: float,
        focal_length: Optional[float] = None,
    ):
        if dz == 0 or not np.isfinite(dz):
            raise InputError(f"Fresnel transform needs a finite non-zero dz, got {dz}")
        check_fresnel_sampling(n, pitch, wavelength, dz)
        self.n = n
        self.pitch = pitch
        self.wavelength = wavelength
        self.dz = dz
        self.out_pitch = fresnel_output_pitch(n, pitch, wavelength, dz)
        k = TWO_PI / wavelength

        chirp_phase = k * _radius_squared(n, pitch) / (2.0 * dz)
        if focal_length is not None:
            chirp_phase = chirp_phase - k * _radius_squared(n, pitch) / (2.0 * focal_length)
        self._in = np.exp(1j * chirp_phase)
        const = np.exp(1j * k * dz) / (1j * wavelength * dz) * pitch**2
        self._out = const * np.exp(1j * k * _radius_squared(n, self.out_pitch) / (2.0 * dz))

    def forward(self, samples: np.ndarray) -> np.ndarray:
        a = samples * self._in
        if self.dz > 0:
            spectrum = centered_fft2(a)
        else:
            spectrum = centered_ifft2(a) * (self.n * self.n)
        return self._out * spectrum

    def inverse(self, samples: np.ndarray) -> np.ndarray:
        spectrum = samples / self._out
        if self.dz > 0:
            a = centered_ifft2(spectrum)
        else:
            a = centered_fft2(spectrum) / (self.n * self.n)
        return a / self._in

    def __call__(self, field: ComplexField) -> ComplexField:
        if field.n != self.n or not np.isclose(field.pitch, self.pitch, rtol=1e-12, atol=0.0):
            raise InputError("field grid does not match the Fresnel transform grid")
        return ComplexField(self.forward(field.samples), self.out_pitch, field.wavelength)


def fresnel_transform(field: ComplexField, dz: float) -> ComplexField:
    """Signed single-transform Fresnel leg (dz < 0 reconstructs virtual planes)."""
    return FresnelTransform(field.n, field.pitch, field.wavelength, dz)(field)


def fresnel_single(field: ComplexField, dz: float) -> ComplexField:
    """Forward single-transform Fresnel diffraction; output pitch lambda*dz/(N*pitch)."""
    if not dz > 0:
        raise InputError(f"fresnel_single requires dz > 0 (got {dz}); use angular_spectrum for inverse legs")
    return fresnel_transform(field, dz)


def thin_lens(field: ComplexField, f: float) -> ComplexField:
    """Multiply by exp(-i k r^2 / 2f)."""
    if f == 0 or not np.isfinite(f):
        raise InputError(f"thin_lens: focal length must be finite and non-zero, got {f}")
    return field.with_samples(field.samples * np.exp(-1j * field.k * field.radius_squared() / (2.0 * f)))


@dataclass(frozen=True)
class PropagatorPair:
    """Forward/backward array operators between two planes plus the source-plane pitch."""

    forward: Callable[[np.ndarray], np.ndarray]
    backward: Callable[[np.ndarray], np.ndarray]
    source_pitch: float


def fraunhofer_pair(pitch: float = 1.0) -> PropagatorPair:
    """Unitary centred FFT (far field / focal plane of a lens)."""
    return PropagatorPair(
        forward=lambda a: fft.fftshift(fft.fft2(fft.ifftshift(a), norm="ortho", workers=FFT_WORKERS)),
        backward=lambda a: fft.fftshift(fft.ifft2(fft.ifftshift(a), norm="ortho", workers=FFT_WORKERS)),
        source_pitch=pitch,
    )


__all__ = [
    "FresnelTransform",
    "PropagatorPair",
    "angular_spectrum",
    "band_limit",
    "check_fresnel_sampling",
    "fraunhofer_pair",
    "fresnel_output_pitch",
    "fresnel_single",
    "fresnel_transform",
    "thin_lens",
]
