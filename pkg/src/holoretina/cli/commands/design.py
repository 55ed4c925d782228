"""
holoretina design: pattern -> full-aperture phase map (PGM + sidecar).
"""

import logging
from dataclasses import replace

import numpy as np
from rich.markup import escape

from holoretina.cli.commands.base import prepare_output, resolve_config, write_report
from holoretina.core.design import assemble_hologram, levels_efficiency
from holoretina.core.io import load_pattern, save_phase_map, save_png
from holoretina.core.metrics import pupil_fill_ratio

logger = logging.getLogger("holoretina.cli")

PHASE_FILE = "phase.pgm"
REPORT_FILE = "design_report.txt"


def handle_design_command(args, console) -> int:
    config = resolve_config(args)
    if args.pattern:
        # the pattern fixes the display format (M x M cells)
        pattern = load_pattern(args.pattern, config.aperture_m)
        if pattern.pixels != config.pixels:
            logger.info("pattern is %dx%d; overriding pixels = %d", pattern.pixels, pattern.pixels, config.pixels)
            config = replace(config, pixels=pattern.pixels)
    out = prepare_output(args, config, "design")
    geom = config.geometry()

    console.print(
        f"Designing [bold]{config.mode}[/bold] hologram: {geom.pixels}x{geom.pixels} cells, "
        f"{config.grid_n}x{config.grid_n} samples at {config.pitch * 1e9:.4g} nm"
    )
    phase = assemble_hologram(
        geom, config.mode, config.pitch, config.levels, n_iter=config.gs_iterations, seed=config.seed
    )
    path = save_phase_map(phase, out / PHASE_FILE, {"cells": geom.pixels})
    if config.png:
        save_png(phase.values + np.pi, out / "phase.png", cmap="twilight")

    lines = [
        f"mode = {config.mode}",
        f"cells = {geom.pixels}x{geom.pixels}",
        f"grid = {phase.shape[0]}x{phase.shape[1]}",
        f"pitch_m = {phase.pitch:.9g}",
        f"levels = {phase.levels}",
        f"expected_level_efficiency = {levels_efficiency(phase.levels) if phase.levels else 1.0:.6g}",
        f"conjugate_side_m = {geom.conjugate_side:.6g}",
        f"pupil_fill_ratio = {pupil_fill_ratio(geom):.6g}",
    ]
    write_report(out / REPORT_FILE, "\n".join(lines) + "\n")
    console.print(f"[green]Wrote[/green] {escape(str(path))}")
    return 0
