"""Built-in display patterns: letter F, moving bars, all-on, seeded random."""

from __future__ import annotations

import numpy as np

from holoretina.core.design import DisplayPattern
from holoretina.errors import InputError

# 10 x 10 glyph; row 0 is the top row of the display
_LETTER_F = (
    "0000000000",
    "0011111100",
    "0011111100",
    "0011000000",
    "0011111000",
    "0011111000",
    "0011000000",
    "0011000000",
    "0011000000",
    "0000000000",
)


def letter_f(pixels: int, aperture: float) -> DisplayPattern:
    """The letter F, resampled (nearest) onto an M x M display."""
    glyph = np.array([[c == "1" for c in row] for row in _LETTER_F])
    idx = (np.arange(pixels) * glyph.shape[0]) // pixels
    return DisplayPattern(glyph[np.ix_(idx, idx)], aperture / pixels)


def bar(pixels: int, aperture: float, column: int = 0, width: int = 1) -> DisplayPattern:
    """Vertical bar starting at ``column``; stepping the column gives the moving-bar sequence."""
    if not 0 <= column < pixels or width < 1:
        raise InputError(f"bar column must lie in [0, {pixels}) and width >= 1")
    mask = np.zeros((pixels, pixels), dtype=bool)
    mask[:, column : column + width] = True
    return DisplayPattern(mask, aperture / pixels)


def all_on(pixels: int, aperture: float) -> DisplayPattern:
    return DisplayPattern(np.ones((pixels, pixels), dtype=bool), aperture / pixels)


def random_mask(pixels: int, aperture: float, count: int, seed: int = 0) -> DisplayPattern:
    """Exactly ``count`` lit pixels drawn without replacement."""
    total = pixels * pixels
    if not 0 <= count <= total:
        raise InputError(f"random mask needs 0 <= count <= {total}, got {count}")
    rng = np.random.default_rng(seed)
    mask = np.zeros(total, dtype=bool)
    mask[rng.choice(total, size=count, replace=False)] = True
    return DisplayPattern(mask.reshape(pixels, pixels), aperture / pixels)
