import numpy as np
import pytest

from holoretina.core.eye import RetinaImage
from holoretina.core.field import PhaseMap, quantize_phase, wrap_phase
from holoretina.core.io import (
    load_pattern,
    load_phase_map,
    parse_pattern_text,
    read_pgm,
    read_sidecar,
    save_phase_map,
    save_retina_image,
    write_pattern,
    write_pgm,
)
from holoretina.core.patterns import letter_f
from holoretina.errors import InputError, PatternParseError


def test_quantized_phase_map_round_trip(tmp_path, rng):
    phase = quantize_phase(PhaseMap(rng.uniform(-np.pi, np.pi, size=(32, 32)), 1e-6, 0, 543e-9), 8)
    path = save_phase_map(phase, tmp_path / "phase.pgm")
    loaded = load_phase_map(path)
    assert np.array_equal(loaded.values, phase.values)
    assert loaded.levels == 8
    assert loaded.pitch == phase.pitch
    assert loaded.wavelength == 543e-9
    meta = read_sidecar(path)
    assert meta["kind"] == "phase_map"
    assert meta["pitch_m"] == "1e-06"


def test_continuous_phase_map_within_half_code(tmp_path, rng):
    phase = PhaseMap(rng.uniform(-np.pi, np.pi, size=(16, 16)), 2e-6)
    loaded = load_phase_map(save_phase_map(phase, tmp_path / "phase.pgm"))
    err = wrap_phase(loaded.values - phase.values)
    assert np.max(np.abs(err)) <= np.pi / 65536 + 1e-12
    assert loaded.levels == 0


def test_sidecar_does_not_clobber_pattern_of_same_stem(tmp_path):
    pattern = letter_f(10, 500e-6)
    pattern_path = write_pattern(pattern, tmp_path / "f.txt")
    before = pattern_path.read_bytes()
    phase = save_phase_map(PhaseMap(np.zeros((8, 8)), 1e-6), tmp_path / "f.pgm")
    assert pattern_path.read_bytes() == before
    assert (tmp_path / "f.meta.txt").is_file()
    assert read_sidecar(phase)["kind"] == "phase_map"
    assert np.array_equal(load_pattern(pattern_path, 500e-6).mask, pattern.mask)


def test_phase_map_needs_sidecar(tmp_path):
    write_pgm(tmp_path / "bare.pgm", np.zeros((4, 4), dtype=np.uint16), 65535)
    with pytest.raises(InputError):
        load_phase_map(tmp_path / "bare.pgm")


def test_pgm_ascii_and_header_comments(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P2\n# made by hand\n3 2\n255\n0 1 2\n3 4 5\n")
    data, maxval = read_pgm(path)
    assert maxval == 255
    assert data.tolist() == [[0, 1, 2], [3, 4, 5]]
    path.write_bytes(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(InputError):
        read_pgm(path)


def test_retina_image_sidecar(tmp_path):
    intensity = np.zeros((4, 4))
    intensity[1, 2] = 2.0
    image = RetinaImage(intensity, 1e-5, "retina", input_power=1e-9)
    path = save_retina_image(image, tmp_path / "retina.pgm", {"best_focal_length_m": 0.0227})
    data, maxval = read_pgm(path)
    assert data[1, 2] == 65535 and data.sum() == 65535
    meta = read_sidecar(path)
    assert meta["plane"] == "retina"
    assert float(meta["peak_intensity"]) == 2.0
    assert float(meta["total_power"]) == pytest.approx(2.0 * 1e-10)
    assert meta["best_focal_length_m"] == "0.0227"


def test_ascii_pattern():
    pattern = parse_pattern_text("# corner\n10\n0 1\n", 500e-6)
    assert pattern.lit() == [(0, 0), (1, 1)]
    assert pattern.pixel_size == pytest.approx(250e-6)


@pytest.mark.parametrize(
    "text",
    ["", "# nothing\n", "101\n01\n", "102\n010\n111\n", "11\n11\n11\n"],
)
def test_malformed_patterns(text):
    with pytest.raises(PatternParseError):
        parse_pattern_text(text, 500e-6)


def test_pgm_pattern_is_thresholded(tmp_path):
    path = tmp_path / "mask.pgm"
    write_pgm(path, np.array([[0, 200], [127, 128]]), 255)
    pattern = load_pattern(path, 500e-6)
    assert pattern.mask.tolist() == [[False, True], [False, True]]
    write_pgm(path, np.zeros((2, 3)), 255)
    with pytest.raises(PatternParseError):
        load_pattern(path, 500e-6)


def test_pattern_file_round_trip(tmp_path):
    pattern = letter_f(10, 500e-6)
    loaded = load_pattern(write_pattern(pattern, tmp_path / "f.txt"), 500e-6)
    assert np.array_equal(loaded.mask, pattern.mask)
    with pytest.raises(PatternParseError):
        load_pattern(tmp_path / "missing.txt", 500e-6)
