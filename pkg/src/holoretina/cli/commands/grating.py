"""
holoretina grating: nanobeam geometry sweep -> sweep CSV + best design report.
"""

import logging

from rich.markup import escape
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn

from holoretina.cli.commands.base import prepare_output, resolve_config, write_report
from holoretina.core.pb import PBElement
from holoretina.core.sweep import (
    design_sweep,
    find_halfwave_crossing,
    format_design_report,
    thickness_curve,
    write_sweep_csv,
)

logger = logging.getLogger("holoretina.cli")

CSV_FILE = "sweep.csv"
REPORT_FILE = "grating_report.txt"


def handle_grating_command(args, console) -> int:
    config = resolve_config(args)
    out = prepare_output(args, config, "grating")
    axes = config.sweep_axes()
    beam = config.beam_material()
    console.print(f"Sweeping nanobeam gratings ([dim]{escape(beam.name or 'dispersion table')}[/dim])")

    with Progress(
        TextColumn("[cyan]rcwa[/cyan]"), BarColumn(), MofNCompleteColumn(), console=console, transient=True
    ) as progress:
        task = progress.add_task("sweep", total=None)

        def advance(done: int, total: int) -> None:
            progress.update(task, completed=done, total=total)

        result = design_sweep(
            axes["wavelengths"], axes["periods"], axes["widths"], axes["thicknesses"],
            beam=beam, gap=config.gap_index, substrate_index=config.substrate_index,
            cover_index=config.cover_index, n_harmonics=config.harmonics,
            weight_amplitude=config.weight_amplitude, weight_phase=config.weight_phase,
            subwavelength_only=config.subwavelength_only, workers=config.workers, progress=advance,
        )

    write_sweep_csv(result, out / CSV_FILE)

    crossings = []
    if len(axes["thicknesses"]) > 1:
        seen = []
        for p in result.points:
            key = (p.wavelength, p.period, p.width)
            if key not in seen:
                seen.append(key)
        for key in seen:
            thicknesses, dphi = thickness_curve(result, *key)
            crossings.append((key, find_halfwave_crossing(thicknesses, dphi)))

    best = result.best
    elem = PBElement.from_transmission(best.t_te, best.t_tm, config.cover_index, config.substrate_index)
    report = format_design_report(result, crossings)
    report += f"best_conversion_efficiency = {elem.eta_conv:.6g}\n"
    report += f"best_zeroth_order_efficiency = {elem.eta_e:.6g}\n"
    write_report(out / REPORT_FILE, report)

    console.print(
        f"Best: thickness [bold]{best.thickness * 1e9:.4g} nm[/bold], dphi = {best.dphi:.4g} rad, "
        f"|t_TE| = {abs(best.t_te):.4g}, |t_TM| = {abs(best.t_tm):.4g}"
    )
    console.print(f"[green]Wrote[/green] {escape(str(out / CSV_FILE))}")
    return 0
