"""
holoretina pattern: write a built-in display pattern as an ASCII 0/1 file.
"""

from pathlib import Path

from rich.markup import escape

from holoretina.cli.commands.base import resolve_config
from holoretina.core.io import write_pattern
from holoretina.core.patterns import all_on, bar, letter_f, random_mask

PATTERNS = ("F", "bar", "all", "random")


def handle_pattern_command(args, console) -> int:
    config = resolve_config(args)
    m, aperture = config.pixels, config.aperture_m
    if args.name == "F":
        pattern = letter_f(m, aperture)
    elif args.name == "bar":
        pattern = bar(m, aperture, args.column, args.width)
    elif args.name == "all":
        pattern = all_on(m, aperture)
    else:
        pattern = random_mask(m, aperture, args.count, config.seed)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suffix = f"_{args.column}" if args.name == "bar" else ""
    path = write_pattern(pattern, out / f"pattern_{args.name}{suffix}.txt")
    console.print(f"[green]Wrote[/green] {escape(str(path))} ({m}x{m}, {len(pattern.lit())} lit)")
    return 0
