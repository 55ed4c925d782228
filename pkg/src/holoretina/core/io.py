"""
File formats: 16-bit PGM phase maps and retina images with ``key = value``
sidecars, display pattern files, optional PNG previews.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from holoretina.core.design import DisplayPattern
from holoretina.core.eye import RetinaImage
from holoretina.core.field import TWO_PI, PhaseMap, quantize_phase
from holoretina.errors import InputError, PatternParseError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
PHASE_CODES = 65536
SIDECAR_SUFFIX = ".meta.txt"


def sidecar_path(path: PathLike) -> Path:
    """phase.pgm -> phase.meta.txt; never collides with a pattern file of the same stem."""
    path = Path(path)
    return path.with_name(path.stem + SIDECAR_SUFFIX)


def write_sidecar(path: PathLike, values: Dict[str, object]) -> Path:
    out = sidecar_path(path)
    lines = []
    for key, value in values.items():
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def read_sidecar(path: PathLike) -> Dict[str, str]:
    side = sidecar_path(path)
    if not side.is_file():
        raise InputError(f"missing sidecar {side} for {path}")
    values: Dict[str, str] = {}
    for number, line in enumerate(side.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{side}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def write_pgm(path: PathLike, data: np.ndarray, maxval: int) -> None:
    """Binary P5 PGM; 16-bit samples are big-endian."""
    if data.ndim != 2:
        raise InputError("PGM data must be 2D")
    rows, cols = data.shape
    dtype = ">u2" if maxval > 255 else "u1"
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n{maxval}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(data, dtype=dtype).tobytes())


def _header_tokens(raw: bytes, count: int) -> Tuple[List[bytes], int]:
    tokens: List[bytes] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise InputError("truncated PGM header")
        tokens.append(raw[start:pos])
    return tokens, pos + 1


def read_pgm(path: PathLike) -> Tuple[np.ndarray, int]:
    """Read P5 (binary) or P2 (ASCII) PGM; returns (samples, maxval)."""
    raw = Path(path).read_bytes()
    try:
        tokens, offset = _header_tokens(raw, 4)
        magic = tokens[0]
        cols, rows, maxval = (int(t) for t in tokens[1:])
    except (ValueError, IndexError) as e:
        raise InputError(f"{path}: malformed PGM header") from e
    if not (0 < maxval < 65536) or cols <= 0 or rows <= 0:
        raise InputError(f"{path}: unsupported PGM geometry {cols}x{rows} maxval {maxval}")
    if magic == b"P5":
        dtype = ">u2" if maxval > 255 else "u1"
        expected = rows * cols * np.dtype(dtype).itemsize
        body = raw[offset : offset + expected]
        if len(body) != expected:
            raise InputError(f"{path}: PGM body holds {len(body)} bytes, expected {expected}")
        data = np.frombuffer(body, dtype=dtype).reshape(rows, cols).astype(np.int64)
    elif magic == b"P2":
        values = raw[offset:].split()
        if len(values) != rows * cols:
            raise InputError(f"{path}: PGM body holds {len(values)} samples, expected {rows * cols}")
        data = np.array([int(v) for v in values], dtype=np.int64).reshape(rows, cols)
    else:
        raise InputError(f"{path}: not a PGM file (magic {magic!r})")
    return data, maxval


def encode_phase(values: np.ndarray) -> np.ndarray:
    return np.mod(np.rint((values + np.pi) * (PHASE_CODES / TWO_PI)), PHASE_CODES).astype(np.uint16)


def decode_phase(codes: np.ndarray) -> np.ndarray:
    return -np.pi + codes.astype(float) * (TWO_PI / PHASE_CODES)


def save_phase_map(phase: PhaseMap, path: PathLike, extra: Dict[str, object] | None = None) -> Path:
    """Write the map as a 16-bit PGM plus its sidecar (pitch, levels, wavelength)."""
    path = Path(path)
    write_pgm(path, encode_phase(phase.values), PHASE_CODES - 1)
    meta: Dict[str, object] = {
        "kind": "phase_map",
        "pitch_m": float(phase.pitch),
        "levels": int(phase.levels),
        "wavelength_m": float(phase.wavelength),
        "encoding": "v = round((phi + pi) * 65536 / 2pi) mod 65536",
    }
    meta.update(extra or {})
    write_sidecar(path, meta)
    logger.info("wrote %dx%d phase map to %s", *phase.shape, path)
    return path


def load_phase_map(path: PathLike) -> PhaseMap:
    codes, maxval = read_pgm(path)
    if maxval != PHASE_CODES - 1:
        raise InputError(f"{path}: phase maps are 16-bit PGM with maxval {PHASE_CODES - 1}, got {maxval}")
    meta = read_sidecar(path)
    try:
        pitch = float(meta["pitch_m"])
        levels = int(meta.get("levels", "0"))
        wavelength = float(meta.get("wavelength_m", "0"))
    except (KeyError, ValueError) as e:
        raise InputError(f"{sidecar_path(path)}: bad phase map sidecar ({e})") from e
    phase = PhaseMap(decode_phase(codes), pitch, 0, wavelength)
    # snap back onto the level grid for level counts that do not divide the code range
    return quantize_phase(phase, levels) if levels else phase


def save_retina_image(image: RetinaImage, path: PathLike, extra: Dict[str, object] | None = None) -> Path:
    """Max-normalised 16-bit intensity PGM; absolute scale lives in the sidecar."""
    path = Path(path)
    peak = float(image.intensity.max())
    scaled = np.rint(image.intensity / peak * 65535) if peak > 0 else np.zeros(image.intensity.shape)
    write_pgm(path, scaled.astype(np.uint16), 65535)
    meta: Dict[str, object] = {
        "kind": "intensity",
        "plane": image.plane,
        "pitch_m": float(image.pitch),
        "peak_intensity": peak,
        "total_power": image.total_power,
        "input_power": float(image.input_power),
        "zeroth_order_fraction": float(image.zeroth_order_fraction),
    }
    meta.update(extra or {})
    write_sidecar(path, meta)
    return path


def save_png(intensity: np.ndarray, path: PathLike, cmap: str = "inferno") -> Path:
    try:
        import matplotlib

        matplotlib.use("Agg")
        from matplotlib import pyplot as plt
    except ImportError as e:
        raise InputError("PNG export needs matplotlib; install holoretina[plot]") from e
    peak = float(intensity.max())
    plt.imsave(str(path), intensity / peak if peak > 0 else intensity, cmap=cmap, origin="lower", vmin=0.0, vmax=1.0)
    return Path(path)


def parse_pattern_text(text: str, aperture: float, source: str = "<pattern>") -> DisplayPattern:
    """ASCII grid of 0/1, one row per line; '#' starts a comment."""
    rows: List[List[bool]] = []
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        cells = line.replace(" ", "")
        bad = set(cells) - {"0", "1"}
        if bad:
            raise PatternParseError(f"{source}:{number}: unexpected character(s) {''.join(sorted(bad))!r}")
        rows.append([c == "1" for c in cells])
    if not rows:
        raise PatternParseError(f"{source}: empty pattern")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise PatternParseError(f"{source}: ragged rows (lengths {sorted(widths)})")
    mask = np.array(rows, dtype=bool)
    if mask.shape[0] != mask.shape[1]:
        raise PatternParseError(f"{source}: pattern must be square, got {mask.shape[0]}x{mask.shape[1]}")
    return DisplayPattern(mask, aperture / mask.shape[0])


def load_pattern(path: PathLike, aperture: float) -> DisplayPattern:
    """ASCII 0/1 grid or 8-bit PGM thresholded at 128."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise PatternParseError(f"cannot read pattern {path}: {e}") from e
    if raw[:2] in (b"P5", b"P2"):
        try:
            data, maxval = read_pgm(path)
        except InputError as e:
            raise PatternParseError(str(e)) from e
        if maxval > 255:
            raise PatternParseError(f"{path}: pattern PGM must be 8-bit, got maxval {maxval}")
        if data.shape[0] != data.shape[1]:
            raise PatternParseError(f"{path}: pattern must be square, got {data.shape[0]}x{data.shape[1]}")
        return DisplayPattern(data >= 128, aperture / data.shape[0])
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as e:
        raise PatternParseError(f"{path}: pattern file is neither PGM nor ASCII") from e
    return parse_pattern_text(text, aperture, str(path))


def write_pattern(pattern: DisplayPattern, path: PathLike) -> Path:
    path = Path(path)
    rows = ["".join("1" if v else "0" for v in row) for row in pattern.mask]
    path.write_text("\n".join(rows) + "\n", encoding="ascii")
    return path


__all__ = [
    "decode_phase",
    "encode_phase",
    "load_pattern",
    "load_phase_map",
    "parse_pattern_text",
    "read_pgm",
    "read_sidecar",
    "save_phase_map",
    "save_png",
    "save_retina_image",
    "sidecar_path",
    "write_pattern",
    "write_pgm",
    "write_sidecar",
]
