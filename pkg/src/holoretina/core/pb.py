"""
Pancharatnam-Berry element model in the helicity basis.

A rotated birefringent element with complex transmissions t_TE (field along the
beam) and t_TM (across it) splits circular input into a helicity-preserving
channel (t_TE + t_TM)/2 and a converted channel (t_TE - t_TM)/2 that carries
the geometric phase exp(+-i*2*theta).
"""

from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from holoretina.core.field import wrap_phase
from holoretina.errors import InputError

# Magnitudes above 1 by less than this are accepted as rounding noise
PASSIVITY_TOLERANCE = 1e-9


class Helicity(str, enum.Enum):
    R = "R"
    L = "L"

    @property
    def sign(self) -> int:
        return 1 if self is Helicity.R else -1

    @classmethod
    def parse(cls, value: "str | Helicity") -> "Helicity":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise InputError(f"input helicity must be R or L, got {value!r}") from None


@dataclass(frozen=True)
class PBElement:
    t_te: complex
    t_tm: complex
    theta: float = 0.0

    def __post_init__(self):
        for name in ("t_te", "t_tm"):
            value = complex(getattr(self, name))
            if not cmath.isfinite(value):
                raise InputError(f"{name} must be finite")
            if abs(value) > 1.0 + PASSIVITY_TOLERANCE:
                raise InputError(f"{name} = {value} violates passivity (|t| <= 1)")
            object.__setattr__(self, name, value)

    @property
    def delta_phi(self) -> float:
        """arg(t_TM) - arg(t_TE), wrapped to [-pi, pi)."""
        return wrap_phase(cmath.phase(self.t_tm) - cmath.phase(self.t_te))

    @property
    def co_amplitude(self) -> complex:
        return (self.t_te + self.t_tm) / 2

    @property
    def conversion_amplitude(self) -> complex:
        """Converted-channel amplitude before the geometric phase factor."""
        return (self.t_te - self.t_tm) / 2

    @property
    def eta_e(self) -> float:
        return abs(self.co_amplitude) ** 2

    @property
    def eta_conv(self) -> float:
        return abs(self.conversion_amplitude) ** 2

    def rotated(self, theta: float) -> "PBElement":
        return PBElement(self.t_te, self.t_tm, theta)

    @classmethod
    def ideal(cls, theta: float = 0.0) -> "PBElement":
        """Perfect half-wave element: full conversion, no zeroth order."""
        return cls(1.0 + 0j, -1.0 + 0j, theta)

    @classmethod
    def from_transmission(
        cls,
        t_te: complex,
        t_tm: complex,
        n_cover: float,
        n_substrate: float,
        *,
        time_convention: str = "engineering",
    ) -> "PBElement":
        """Build an element from zeroth-order E-field transmissions of the grating solver.

        The amplitudes are flux normalised (scaled by sqrt(n_substrate / n_cover)) so
        |t|^2 is the transmitted power fraction. The solver works with exp(+j w t);
        the propagation engine uses exp(-i w t), hence the conjugation.
        """
        scale = np.sqrt(n_substrate / n_cover)
        te, tm = complex(t_te) * scale, complex(t_tm) * scale
        if time_convention == "engineering":
            te, tm = te.conjugate(), tm.conjugate()
        elif time_convention != "physics":
            raise InputError(f"unknown time convention {time_convention!r}")
        return cls(te, tm)


class PBOutput(NamedTuple):
    co_amp: complex
    cross_amp: complex
    cross_phase_sign: int


def pb_output(elem: PBElement, input_helicity: "Helicity | str") -> PBOutput:
    """Helicity-basis response of one element for a unit circular input."""
    helicity = Helicity.parse(input_helicity)
    sign = helicity.sign
    cross = elem.conversion_amplitude * cmath.exp(1j * sign * 2.0 * elem.theta)
    return PBOutput(elem.co_amplitude, cross, sign)


def pb_cross_field(elem: PBElement, phase: np.ndarray, input_helicity: "Helicity | str") -> np.ndarray:
    """Converted channel over a phase map, with theta = phase / 2 at every sample."""
    sign = Helicity.parse(input_helicity).sign
    return elem.conversion_amplitude * np.exp(1j * sign * phase)


__all__ = ["Helicity", "PBElement", "PBOutput", "pb_cross_field", "pb_output"]
