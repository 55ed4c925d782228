"""
holoretina error hierarchy
--------------------------
InputError covers contract violations (exit code 2 at the CLI),
NumericalError covers solver failures (exit code 3).
"""


class HoloError(Exception):
    """Base class for all holoretina errors."""


class InputError(HoloError, ValueError):
    """Invalid parameters, files, or grid combinations."""


class NumericalError(HoloError, ArithmeticError):
    """A numerical routine failed to produce a usable result."""


class SamplingError(InputError):
    """Grid too coarse (or too small) for the requested operation."""


class DispersionRangeError(InputError):
    """Wavelength outside the tabulated dispersion range."""


class PatternParseError(InputError):
    """Display pattern file could not be parsed."""


class ConfigError(InputError):
    """Unknown key, bad value, or missing required setting."""


class GridMismatchError(InputError):
    """Phase map and display pattern are not registered to the same aperture."""


class LayoutError(InputError):
    """Nanobeam layout cannot be generated or exported as requested."""
