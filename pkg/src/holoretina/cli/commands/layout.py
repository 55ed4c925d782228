"""
holoretina layout: quantized phase map -> oriented-nanobeam layout files.
"""

import logging

import numpy as np
from rich.markup import escape

from holoretina.cli.commands.base import prepare_output, resolve_config, write_report
from holoretina.core.io import load_phase_map
from holoretina.core.layout import export_layout, generate_layout

logger = logging.getLogger("holoretina.cli")

NM = 1e-9
REPORT_FILE = "layout_report.txt"


def handle_layout_command(args, console) -> int:
    config = resolve_config(args)
    phase = load_phase_map(args.phase)
    out = prepare_output(args, config, "layout")

    layout = generate_layout(
        phase,
        unit_cell=config.unit_cell_nm * NM,
        beam_width=config.beam_width_nm * NM,
        beam_length=config.beam_length_nm * NM,
        clip_policy=config.clip_policy,
    )
    written = [
        export_layout(layout, fmt, out / f"layout.{fmt}", svg_max_beams=config.svg_max_beams)
        for fmt in config.formats
    ]

    angles = " ".join(f"{np.degrees(t):.6g}" for t in layout.orientations())
    lines = [
        f"cells_per_side = {layout.cells_per_side}",
        f"beams = {layout.count}",
        f"unit_cell_nm = {config.unit_cell_nm:.6g}",
        f"beam_width_nm = {config.beam_width_nm:.6g}",
        f"beam_length_nm = {config.beam_length_nm:.6g}",
        f"orientations_deg = {angles}",
    ]
    write_report(out / REPORT_FILE, "\n".join(lines) + "\n")
    console.print(f"Placed [bold]{layout.count}[/bold] nanobeams ({layout.cells_per_side} per side)")
    for path in written:
        console.print(f"[green]Wrote[/green] {escape(str(path))}")
    return 0
