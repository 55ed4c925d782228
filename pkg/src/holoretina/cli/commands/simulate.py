"""
holoretina simulate: phase map + display mask -> retina or conjugate-plane image
and a metrics report.
"""

import logging

from rich.markup import escape
from rich.table import Table

from holoretina.cli.commands.base import prepare_output, resolve_config, write_report
from holoretina.core.design import SystemGeometry
from holoretina.core.eye import accommodation_sweep, conjugate_reconstruct, eye_simulate
from holoretina.core.io import load_pattern, load_phase_map, read_sidecar, save_png, save_retina_image
from holoretina.core.metrics import (
    compute_metrics,
    conjugate_lattice,
    diffraction_blur,
    format_report,
    pupil_fill_ratio,
    retina_lattice,
)
from holoretina.errors import GridMismatchError

logger = logging.getLogger("holoretina.cli")

REPORT_FILE = "metrics.txt"


def handle_simulate_command(args, console) -> int:
    config = resolve_config(args)
    phase = load_phase_map(args.phase)
    aperture = phase.shape[0] * phase.pitch
    pattern = load_pattern(args.mask, aperture)
    cells = read_sidecar(args.phase).get("cells")
    if cells is not None and int(cells) != pattern.pixels:
        raise GridMismatchError(
            f"{args.mask} is a {pattern.pixels}x{pattern.pixels} display "
            f"but {args.phase} was designed for {cells}x{cells}"
        )
    wavelength = phase.wavelength or config.wavelength_m
    geom = SystemGeometry(aperture, pattern.pixels, config.conjugate_distance_m, config.magnification, wavelength)
    elem = config.element()
    out = prepare_output(args, config, "simulate")
    extra = {"pupil_fill_ratio": pupil_fill_ratio(geom)}

    if config.plane == "conjugate":
        image = conjugate_reconstruct(
            phase, pattern, config.conjugate_distance_m, elem=elem, coherent=config.coherent,
            helicity=config.helicity(), wavelength=wavelength,
        )
        lattice = conjugate_lattice(geom)
        blur = wavelength * config.conjugate_distance_m / geom.pixel_size
    else:
        eye = config.eye()
        if config.accommodation_steps:
            sweep = accommodation_sweep(
                phase, pattern, eye, (config.accommodation_min_m, config.accommodation_max_m),
                config.accommodation_steps, geom=geom, elem=elem, analyzer=config.analyzer,
                coherent=config.coherent, helicity=config.helicity(),
            )
            extra["accommodation_defocus_ratio"] = sweep.defocus_ratio
            if sweep.resolved:
                eye = eye.accommodate(sweep.best_f)
                extra["best_focal_length_m"] = sweep.best_f
                console.print(f"Best accommodation: f = [bold]{sweep.best_f * 1e3:.4g} mm[/bold]")
            else:
                console.print(
                    "[yellow]Accommodation not resolved[/yellow]: display cells are narrower than their depth of "
                    f"focus over this range (defocus ratio {sweep.defocus_ratio:.3g}); keeping f = {eye.f * 1e3:.4g} mm"
                )
        image = eye_simulate(
            phase, pattern, eye, elem, analyzer=config.analyzer, coherent=config.coherent,
            helicity=config.helicity(), wavelength=wavelength,
        )
        lattice = retina_lattice(geom, eye.f, eye.retina_distance)
        blur = diffraction_blur(geom, eye.retina_distance)

    metrics = compute_metrics(
        image.intensity, image.pitch, pattern, lattice,
        co_power_fraction=image.zeroth_order_fraction, blur=blur,
    )
    metrics.extra.update(extra)
    image_path = save_retina_image(image, out / f"{config.plane}.pgm")
    if config.png:
        save_png(image.intensity, out / f"{config.plane}.png")
    write_report(out / REPORT_FILE, format_report(metrics))

    table = Table(show_header=False, box=None, padding=(0, 2, 0, 0))
    table.add_column(style="bold green")
    table.add_column()
    table.add_row("plane", config.plane)
    table.add_row("lit cells found", f"{metrics.lit_recall:.1%}")
    table.add_row("cells classified", f"{metrics.identification_accuracy:.1%}")
    table.add_row("contrast", f"{metrics.contrast:.4g}")
    table.add_row("zeroth-order fraction", f"{metrics.zeroth_order_fraction:.4g}")
    table.add_row("spots", str(metrics.spot_count))
    console.print(table)
    console.print(f"[green]Wrote[/green] {escape(str(image_path))}")
    return 0
